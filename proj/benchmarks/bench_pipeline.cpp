#include "zetasdp/certio.hpp"
#include "zetasdp/functionals.hpp"
#include "zetasdp/gausspoly.hpp"
#include "zetasdp/rigor.hpp"
#include "zetasdp/sdpcore.hpp"
#include "zetasdp/search.hpp"
#include "zetasdp/sosmodel.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace zetasdp;

namespace {

Vector random_coeffs(int n, std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-1000, 1000);
  Vector v;
  for (int k = 0; k < n; ++k) v.push_back(Real(num(rng)) / 997);
  return v;
}

Matrix random_gram(std::size_t n, std::mt19937& rng) {
  std::uniform_int_distribution<int> num(-1000, 1000);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = Real(num(rng)) / 1000;
  Matrix g = transpose(a) * a;
  for (std::size_t i = 0; i < n; ++i) g(i, i) += Real(1) / 100;
  return g;
}

void BM_FourierMonomial(benchmark::State& state) {
  ScopedPrecision p(256);
  std::mt19937 rng(7);
  const auto f = GaussianPoly::monomial(random_coeffs(static_cast<int>(state.range(0)) + 1, rng));
  for (auto _ : state) benchmark::DoNotOptimize(fourier(f));
}
BENCHMARK(BM_FourierMonomial)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_Cholesky(benchmark::State& state) {
  ScopedPrecision p(256);
  std::mt19937 rng(3);
  const Matrix g = random_gram(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(cholesky(g));
}
BENCHMARK(BM_Cholesky)->Arg(9)->Arg(13)->Arg(41)->Unit(benchmark::kMicrosecond);

void BM_IntervalDefiniteness(benchmark::State& state) {
  ScopedPrecision p(256);
  std::mt19937 rng(5);
  const Matrix g = random_gram(static_cast<std::size_t>(state.range(0)), rng);
  for (auto _ : state) benchmark::DoNotOptimize(check_positive_definite(g));
}
BENCHMARK(BM_IntervalDefiniteness)->Arg(9)->Arg(13)->Unit(benchmark::kMillisecond);

// One interior-point solve of the Z problem at a fixed radius.
void BM_SolveZ(benchmark::State& state) {
  ScopedPrecision p(256);
  const int d = static_cast<int>(state.range(0));
  const auto cfg = SearchConfig::defaults_for(FunctionalTag::Z);
  const SdpProblem prob = assemble(SosParameterization{d, Real("1.004"), true}, FunctionalKind(FunctionalTag::Z));
  for (auto _ : state) benchmark::DoNotOptimize(solve(prob, cfg.inner));
}
BENCHMARK(BM_SolveZ)->Arg(4)->Arg(8)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_VerifyZ(benchmark::State& state) {
  ScopedPrecision p(256);
  const int d = static_cast<int>(state.range(0));
  const auto cfg = SearchConfig::defaults_for(FunctionalTag::Z);
  const FunctionalKind kind(FunctionalTag::Z);
  const Real R("1.004");
  const SdpSolution sol = solve(assemble(SosParameterization{d, R, true}, kind), cfg.inner);
  const SosCertificate cert = resolve_for_certificate(kind, d, R, sol.primal_objective, cfg);
  for (auto _ : state) benchmark::DoNotOptimize(verify(cert));
}
BENCHMARK(BM_VerifyZ)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_BaselineHat(benchmark::State& state) {
  ScopedPrecision p(256);
  for (auto _ : state) benchmark::DoNotOptimize(baseline_values(Baseline::Hat));
}
BENCHMARK(BM_BaselineHat)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
