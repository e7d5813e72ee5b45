#include "zetasdp/search.hpp"

#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <limits>
#include <ostream>

namespace zetasdp {

namespace {

constexpr double kFailurePenalty = 1e30;

// First step away from a lambda guess; later steps grow by 4x.
const char* const kGuessStep = "0.002";

void log_line(const SearchConfig& cfg, FunctionalTag tag, int d, const Real& R, const std::optional<Real>& lambda,
              const std::optional<Real>& value, SdpStatus status) {
  if (!cfg.log) return;
  auto& out = *cfg.log;
  out << to_string(tag) << '\t' << d << '\t' << format_real(R, 17);
  if (lambda) out << '\t' << format_real(*lambda, 17);
  out << '\t' << (value ? format_real(*value, 20) : std::string("nan")) << '\t' << to_string(status) << std::endl;
}

SosParameterization params(int d, const Real& R) { return SosParameterization{d, R, true}; }

int brent_bits(const Real& tol) {
  const double t = tol.convert_to<double>();
  return 1 + static_cast<int>(std::ceil(-std::log2(t)));
}

struct ThresholdProbe {
  LambdaProbe probe;
  SdpSolution solution;
};

ThresholdProbe probe_threshold(FunctionalTag tag, int d, const Real& R, const Real& lambda, const SearchConfig& cfg) {
  const FunctionalKind kind(tag, lambda);
  AssembleOptions opts;
  opts.mode = AssembleMode::Optimize;
  opts.trunc = cfg.trunc;
  const SdpProblem prob = assemble(params(d, R), kind, opts);
  ThresholdProbe out;
  out.solution = solve(prob, cfg.inner);
  if (out.solution.status == SdpStatus::Optimal) {
    // The problem minimizes -p_f(lambda).
    out.probe.value = -out.solution.primal_objective - opts.threshold_margin;
    out.probe.feasible = *out.probe.value >= 0;
  }
  log_line(cfg, tag, d, R, lambda, out.probe.value, out.solution.status);
  return out;
}

}  // namespace

SearchConfig SearchConfig::defaults_for(FunctionalTag tag) {
  SearchConfig cfg;
  switch (tag) {
    case FunctionalTag::Z:
    case FunctionalTag::ZTilde: cfg.R_lo = 1; cfg.R_hi = Real("1.8"); break;
    case FunctionalTag::L: cfg.R_lo = Real("1.5"); cfg.R_hi = Real("2.2"); break;
    case FunctionalTag::Z1:
    case FunctionalTag::P:
    case FunctionalTag::PTilde: cfg.R_lo = 1; cfg.R_hi = Real("1.6"); break;
  }
  cfg.inner.gap_tolerance = Real("1e-20");
  cfg.inner.feasibility_tolerance = Real("1e-20");
  cfg.inner.initial_scale = 100;
  cfg.certify.initial_scale = 100;
  return cfg;
}

void SearchConfig::validate() const {
  if (!(R_lo >= 1)) throw std::invalid_argument("R bracket must start at 1 or above");
  if (!(R_lo < R_hi)) throw std::invalid_argument("R bracket is empty");
  if (!(lambda_lo > 0) || !(lambda_lo < lambda_hi)) throw std::invalid_argument("lambda bracket is empty");
  for (const Real* t : {&brent_tol, &lambda_tol}) {
    if (!(*t > 0)) throw std::invalid_argument("tolerances must be positive");
  }
  if (resolve_margin < 0 || lambda_bump < 0) throw std::invalid_argument("margins must be nonnegative");
}

void SearchTrace::record(Evaluation e, bool minimizing) {
  evaluations.push_back(std::move(e));
  const auto& last = evaluations.back();
  if (!minimizing || !last.value) return;
  if (!best || *last.value < *evaluations[*best].value) best = evaluations.size() - 1;
}

ScalarMinimum minimize_over_radius(const RadiusOracle& oracle, const SearchConfig& cfg, SearchTrace* trace) {
  cfg.validate();
  SearchTrace local;
  SearchTrace& t = trace ? *trace : local;
  std::optional<ScalarMinimum> best;
  auto f = [&](double r) {
    const Real R(r);
    const RadiusProbe probe = oracle(R);
    t.record({R, std::nullopt, probe.value, probe.status});
    if (!probe.value) return kFailurePenalty;
    if (!best || *probe.value < best->value) best = ScalarMinimum{R, *probe.value};
    return probe.value->convert_to<double>();
  };
  std::uintmax_t max_iter = 200;
  boost::math::tools::brent_find_minima(f, cfg.R_lo.convert_to<double>(), cfg.R_hi.convert_to<double>(),
                                        brent_bits(cfg.brent_tol), max_iter);
  if (!best) throw SearchError("inner solver failed at every evaluated radius", t);
  return *best;
}

OuterResult outer_minimize(const FunctionalKind& kind, int d, const SearchConfig& cfg) {
  if (is_threshold_kind(kind.tag())) throw std::invalid_argument("outer_minimize needs Z, ZTilde, L or Z1");
  OuterResult out;
  std::optional<SdpSolution> best_solution;
  Real best_value;
  auto oracle = [&](const Real& R) {
    AssembleOptions opts;
    opts.trunc = cfg.trunc;
    SdpSolution sol = solve(assemble(params(d, R), kind, opts), cfg.inner);
    RadiusProbe probe{std::nullopt, sol.status};
    if (sol.status == SdpStatus::Optimal) {
      probe.value = sol.primal_objective;
      if (!best_solution || sol.primal_objective < best_value) {
        best_value = sol.primal_objective;
        best_solution = std::move(sol);
      }
    }
    log_line(cfg, kind.tag(), d, R, std::nullopt, probe.value, probe.status);
    return probe;
  };
  const ScalarMinimum m = minimize_over_radius(oracle, cfg, &out.trace);
  out.R = m.R;
  out.value = m.value;
  out.solution = std::move(*best_solution);
  return out;
}

LambdaResult lambda_search(const LambdaOracle& oracle, const SearchConfig& cfg, SearchTrace* trace,
                           const std::optional<Real>& guess) {
  cfg.validate();
  SearchTrace local;
  SearchTrace& t = trace ? *trace : local;
  auto run = [&](const Real& lambda) {
    LambdaProbe p = oracle(lambda);
    t.record({Real(0), lambda, p.value, p.feasible ? SdpStatus::Feasible : SdpStatus::Infeasible}, false);
    return p;
  };
  Real lo = cfg.lambda_lo, hi = cfg.lambda_hi;
  LambdaProbe at_lo, at_hi;
  if (guess) {
    // Walk away from the guess in growing steps until the sign changes.
    Real x = std::clamp(*guess, lo, hi);
    LambdaProbe p = run(x);
    Real step(kGuessStep);
    const bool feasible = p.feasible;
    for (;;) {
      if (feasible) {
        hi = x;
        at_hi = p;
        if (x == cfg.lambda_lo) throw SearchError("bad bracket", t);
        x = std::max(cfg.lambda_lo, Real(x - step));
      } else {
        lo = x;
        at_lo = p;
        if (x == cfg.lambda_hi) throw SearchError("bad bracket", t);
        x = std::min(cfg.lambda_hi, Real(x + step));
      }
      p = run(x);
      if (p.feasible != feasible) break;
      step *= 4;
    }
    if (feasible) {
      lo = x;
      at_lo = p;
    } else {
      hi = x;
      at_hi = p;
    }
  } else {
    at_lo = run(lo);
    if (at_lo.feasible) throw SearchError("bad bracket", t);
    at_hi = run(hi);
    if (!at_hi.feasible) throw SearchError("bad bracket", t);
  }
  std::optional<Real> flo = at_lo.value, fhi = at_hi.value;
  // Unmodified end values for the final estimate.
  std::optional<Real> true_lo = flo, true_hi = fhi;
  int kept_lo = 0, kept_hi = 0;
  const Real half_tol = cfg.lambda_tol / 2;

  auto interpolate = [&](const std::optional<Real>& a, const std::optional<Real>& b) -> std::optional<Real> {
    if (!a || !b || !(*a < 0) || !(*b >= 0) || *b == *a) return std::nullopt;
    return Real((lo * *b - hi * *a) / (*b - *a));
  };
  while (hi - lo > cfg.lambda_tol) {
    Real x = interpolate(flo, fhi).value_or(Real((lo + hi) / 2));
    // Stay half a tolerance inside so every probe shrinks the bracket.
    x = std::clamp(x, Real(lo + half_tol), Real(hi - half_tol));
    const LambdaProbe p = run(x);
    if (p.feasible) {
      hi = x;
      fhi = true_hi = p.value;
      kept_hi = 0;
      // Illinois: halve the stale end's value when it survives twice.
      if (++kept_lo >= 2 && flo) *flo /= 2;
    } else {
      lo = x;
      flo = true_lo = p.value;
      kept_lo = 0;
      if (++kept_hi >= 2 && fhi) *fhi /= 2;
    }
  }
  LambdaResult r;
  r.lambda = hi;
  r.infeasible = lo;
  r.estimate = interpolate(true_lo, true_hi).value_or(Real((lo + hi) / 2));
  r.estimate = std::clamp(r.estimate, lo, hi);
  return r;
}

ThresholdResult threshold_at_radius(FunctionalTag tag, int d, const Real& R, const SearchConfig& cfg,
                                    const std::optional<Real>& guess) {
  if (!is_threshold_kind(tag)) throw std::invalid_argument("threshold search needs P or PTilde");
  ThresholdResult out;
  out.R = R;
  std::optional<Real> feasible_lambda;
  SdpSolution feasible_solution;
  auto oracle = [&](const Real& lambda) {
    ThresholdProbe p = probe_threshold(tag, d, R, lambda, cfg);
    if (p.probe.feasible && (!feasible_lambda || lambda < *feasible_lambda)) {
      feasible_lambda = lambda;
      feasible_solution = std::move(p.solution);
    }
    return p.probe;
  };
  const LambdaResult r = lambda_search(oracle, cfg, &out.trace, guess);
  for (auto& e : out.trace.evaluations) e.R = R;
  out.lambda = r.lambda;
  out.estimate = r.estimate;
  out.solution = std::move(feasible_solution);
  return out;
}

ThresholdResult threshold_minimize(FunctionalTag tag, int d, const SearchConfig& cfg) {
  if (!is_threshold_kind(tag)) throw std::invalid_argument("threshold search needs P or PTilde");
  std::optional<ThresholdResult> best;
  std::optional<Real> previous;
  SearchTrace trace;
  auto oracle = [&](const Real& R) -> RadiusProbe {
    std::optional<ThresholdResult> res;
    try {
      res = threshold_at_radius(tag, d, R, cfg, previous);
    } catch (const SearchError& e) {
      for (const auto& ev : e.trace().evaluations) trace.evaluations.push_back(ev);
      return {std::nullopt, SdpStatus::Infeasible};
    }
    for (const auto& ev : res->trace.evaluations) trace.evaluations.push_back(ev);
    previous = res->estimate;
    const Real estimate = res->estimate;
    if (!best || res->lambda < best->lambda) best = std::move(res);
    return {estimate, SdpStatus::Optimal};
  };
  minimize_over_radius(oracle, cfg);
  if (!best) throw SearchError("no radius produced a feasible threshold", trace);
  best->trace = std::move(trace);
  return std::move(*best);
}

SosCertificate certificate_from_solution(const FunctionalKind& kind, int d, const Real& R, const SdpSolution& sol) {
  if (sol.X.size() < 3) throw std::invalid_argument("solution has too few blocks");
  SosCertificate cert;
  cert.kind = kind;
  cert.d = d;
  cert.R = R;
  cert.lambda = kind.lambda();
  cert.X2 = sol.X[0];
  cert.X3 = sol.X[1];
  cert.X4 = sol.X[2];
  cert.monomial_coeffs = function_from_gram(params(d, R), Matrix(), cert.X2).monomial_coeffs();
  cert.validate();
  return cert;
}

SosCertificate resolve_for_certificate(const FunctionalKind& kind, int d, const Real& R, const Real& value,
                                       const SearchConfig& cfg) {
  const bool threshold = is_threshold_kind(kind.tag());
  AssembleOptions opts;
  opts.mode = AssembleMode::Certify;
  opts.trunc = cfg.trunc;
  std::optional<FunctionalKind> solved_kind;
  if (threshold) {
    solved_kind.emplace(kind.tag(), Real(value + cfg.lambda_bump));
  } else {
    solved_kind.emplace(kind.tag());
    opts.objective_cap = value + cfg.resolve_margin;
  }
  const SdpProblem prob = assemble(params(d, R), *solved_kind, opts);
  const SdpSolution sol = solve(prob, cfg.certify);
  log_line(cfg, kind.tag(), d, R, solved_kind->lambda(), threshold ? std::optional<Real>() : std::optional<Real>(*opts.objective_cap),
           sol.status);
  SearchTrace trace;
  trace.record({R, solved_kind->lambda(), std::nullopt, sol.status}, false);
  bool interior = sol.status == SdpStatus::Feasible;
  for (std::size_t b = 0; b < 3 && interior; ++b) interior = cholesky(sol.X[b]).has_value();
  if (!interior) throw SearchError("no interior point; widen margin", trace);
  return certificate_from_solution(*solved_kind, d, R, sol);
}

}  // namespace zetasdp
