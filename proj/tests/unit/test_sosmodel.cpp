#include "zetasdp/sosmodel.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace zetasdp;
using oracle::Float50;

namespace {

Float50 to50(const Real& x) { return Float50(format_real(x, 60)); }

std::vector<Float50> to50(const Vector& v) {
  std::vector<Float50> out;
  for (const auto& x : v) out.push_back(to50(x));
  return out;
}

Matrix random_psd(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix b(n, n);
  for (auto& v : b.values()) v = u(rng);
  return b * transpose(b);
}

Real block_dot(const ConstraintRow& row, const std::vector<Matrix>& X) {
  Real acc;
  for (std::size_t b = 0; b < X.size(); ++b) {
    if (!row.coeffs[b].empty()) acc += frobenius_dot(row.coeffs[b], X[b]);
  }
  return acc;
}

Real cost_value(const ObjectiveData& obj, const std::vector<Matrix>& X) {
  Real acc = obj.offset;
  for (std::size_t b = 0; b < X.size(); ++b) {
    if (!obj.costs[b].empty()) acc += frobenius_dot(obj.costs[b], X[b]);
  }
  return acc;
}

mpq_class q(long num, long den = 1) {
  mpq_class r(num, den);
  r.canonicalize();
  return r;
}

double rel_err(const Real& got, const Real& want) {
  const Real scale = std::max(Real(1), Real(abs(want)));
  return static_cast<double>(abs(got - want) / scale);
}

}  // namespace

TEST(ProductTable, DegreeOneByHand) {
  const auto t = product_table(1);
  EXPECT_EQ(t->product(0, 0), (RationalPoly{q(1), q(0), q(0), q(0)}));
  EXPECT_EQ(t->product(0, 1), (RationalPoly{q(0), q(1), q(0), q(0)}));
  EXPECT_EQ(t->product(1, 1), (RationalPoly{q(1, 2), q(-2), q(2), q(0)}));
  EXPECT_EQ(t->t_product(0, 0), (RationalPoly{q(1, 2), q(-1), q(0), q(0)}));
  EXPECT_EQ(t->t_product(0, 1), (RationalPoly{q(-1, 2), q(5, 2), q(-2), q(0)}));
  EXPECT_EQ(t->t_product(1, 1), (RationalPoly{q(5, 4), q(-17, 2), q(13), q(-6)}));
  // (1/2 - t)^2
  EXPECT_EQ(t->product_monomial(1, 1), (RationalPoly{q(1, 4), q(-1), q(1)}));
  EXPECT_EQ(t->product(1, 0), t->product(0, 1));
}

TEST(IdentityRows, TopRowAtDegreeOne) {
  SosParameterization p{1, Real("1.2")};
  const auto rows = build_identity_constraints(p);
  ASSERT_EQ(rows.size(), 4u);
  const auto& top = rows.rows[3];
  // Only t L_1 L_1 reaches L_3, with coefficient -6; the row scales to unit size.
  EXPECT_EQ(top.coeffs[0](0, 0), 0);
  EXPECT_EQ(top.coeffs[0](0, 1), 0);
  EXPECT_LT(rel_err(top.coeffs[0](1, 1), Real(-1)), 1e-70);
  EXPECT_EQ(max_abs(top.coeffs[1]), 0);
  EXPECT_LT(rel_err(top.coeffs[2](1, 1), Real(1)), 1e-70);
  EXPECT_EQ(top.rhs, 0);
}

TEST(IdentityRows, ScaledToUnitMaximum) {
  for (bool drop : {true, false}) {
    SosParameterization p{5, Real("1.3"), drop};
    for (const auto& row : build_identity_constraints(p).rows) {
      Real m;
      for (const auto& c : row.coeffs) m = std::max(m, max_abs(c));
      EXPECT_LT(rel_err(m, Real(1)), 1e-70) << row.label;
    }
  }
}

TEST(Assemble, RowAndBlockCounts) {
  SosParameterization p{2, Real("1.1")};
  const FunctionalKind z(FunctionalTag::Z);
  const auto prob = assemble(p, z);
  ASSERT_EQ(prob.blocks.size(), 3u);
  for (const auto& b : prob.blocks) EXPECT_EQ(b.size, 3u);
  EXPECT_EQ(prob.constraints.size(), 6u + 2u);
  EXPECT_EQ(prob.mode, SdpMode::Minimize);

  SosParameterization full{2, Real("1.1"), false};
  const auto prob_full = assemble(full, z);
  EXPECT_EQ(prob_full.blocks.size(), 4u);
  EXPECT_EQ(prob_full.constraints.size(), 6u + 3u);

  AssembleOptions cert;
  cert.mode = AssembleMode::Certify;
  cert.objective_cap = Real("1.4");
  const auto certified = assemble(p, z, cert);
  EXPECT_EQ(certified.constraints.size(), prob.constraints.size() + 1);
  EXPECT_EQ(certified.blocks.size(), 4u);
  EXPECT_EQ(certified.blocks.back().name, "slack");
  EXPECT_EQ(certified.mode, SdpMode::AnalyticCenter);

  const FunctionalKind pk(FunctionalTag::P, Real("0.7"));
  AssembleOptions cert_p;
  cert_p.mode = AssembleMode::Certify;
  EXPECT_EQ(assemble(p, pk, cert_p).constraints.size(), prob.constraints.size() + 1);

  AssembleOptions no_cap;
  no_cap.mode = AssembleMode::Certify;
  EXPECT_THROW(assemble(p, z, no_cap), std::invalid_argument);
  EXPECT_NO_THROW(prob.validate());
  EXPECT_NO_THROW(certified.validate());
}

TEST(Assemble, ThresholdKindHasNoObjective) {
  SosParameterization p{2, Real("1.1")};
  try {
    build_objective(p, FunctionalKind(FunctionalTag::P, Real("0.7")));
    FAIL() << "expected a throw";
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "feasibility kind");
  }
  EXPECT_THROW(build_threshold_functional(p, FunctionalKind(FunctionalTag::Z)), std::invalid_argument);
  EXPECT_THROW(assemble(SosParameterization{0, Real(1)}, FunctionalKind(FunctionalTag::Z)), std::invalid_argument);
}

TEST(Normalization, RowsEvaluateTheFunction) {
  std::mt19937_64 rng(7);
  for (bool drop : {true, false}) {
    SosParameterization p{4, Real("1.15"), drop};
    const auto rows = build_normalization_constraints(p, FunctionalKind(FunctionalTag::Z));
    const auto blocks = p.gram_blocks();
    std::vector<Matrix> X;
    for (std::size_t b = 0; b < blocks.size(); ++b) X.push_back(random_psd(blocks[b].size, rng));
    const std::size_t off = drop ? 0 : 1;
    const Matrix X1 = drop ? Matrix() : X[0];
    const GaussianPoly f = function_from_gram(p, X1, X[off]);
    const GaussianPoly g = fourier_from_gram(p, X[off + 1], X[off + 2]);
    EXPECT_LT(rel_err(block_dot(rows.rows[0], X), evaluate(f, Real(0))), 1e-60);
    EXPECT_LT(rel_err(block_dot(rows.rows[1], X), evaluate(g, Real(0))), 1e-60);
    EXPECT_EQ(rows.rows[0].rhs, 1);
    if (drop) {
      EXPECT_EQ(rows.size(), 2u);
      EXPECT_LT(abs(evaluate(f, p.R)), Real("1e-60"));
    } else {
      ASSERT_EQ(rows.size(), 3u);
      EXPECT_LT(rel_err(block_dot(rows.rows[2], X), -evaluate(f, p.R) * exp(pi() * p.R * p.R)), 1e-55);
    }
  }
  SosParameterization p{3, Real("1.1")};
  const auto thr = build_normalization_constraints(p, FunctionalKind(FunctionalTag::P, Real("0.7")));
  EXPECT_EQ(thr.rows[0].rhs, Real(1) - Real("1e-10"));
  EXPECT_EQ(thr.rows[1].rhs, Real(1) + Real("1e-10"));
}

// For random Gram matrices the costs reproduce the functional's numerator,
// checked against the library evaluator and an independent quadrature.
TEST(Objective, MatchesFunctionalOnRandomGrams) {
  std::mt19937_64 rng(11);
  const Real R("1.07");
  const SeriesTruncation trunc;
  for (FunctionalTag tag : {FunctionalTag::Z, FunctionalTag::ZTilde, FunctionalTag::L, FunctionalTag::Z1}) {
    for (bool drop : {true, false}) {
      SosParameterization p{3, R, drop};
      const FunctionalKind kind(tag);
      const ObjectiveData obj = build_objective(p, kind, trunc);
      const auto blocks = p.gram_blocks();
      std::vector<Matrix> X;
      for (std::size_t b = 0; b < blocks.size(); ++b) X.push_back(random_psd(blocks[b].size, rng));
      const std::size_t off = drop ? 0 : 1;
      const GaussianPoly f = function_from_gram(p, drop ? Matrix() : X[0], X[off]);
      const auto c = CandidateFunction::unchecked(f, R);
      const Real fhat0 = c.fhat_at(Real(0));
      const Real tail = tag == FunctionalTag::Z1 ? trunc.tail_bound : Real(0);
      const Real numerator = (eval_functional(c, kind, trunc) - tail) * fhat0 + tail;
      EXPECT_LT(rel_err(cost_value(obj, X), numerator), 1e-25) << to_string(tag) << " drop=" << drop;

      const auto mono = to50(f.monomial_coeffs());
      const Float50 R50 = to50(R);
      auto mom = [&](int power, Float50 lo, Float50 hi) {
        return oracle::integrate([&](Float50 x) { return oracle::gauss_poly(mono, x) * pow(x, power); }, lo, hi);
      };
      Float50 want;
      switch (tag) {
        case FunctionalTag::Z: want = R50 * mono[0] + 2 / R50 * mom(1, 0, R50); break;
        case FunctionalTag::ZTilde:
          want = R50 * mono[0] + 2 / R50 * mom(1, 0, R50) + 3 * mom(0, R50, 1.5 * R50) - 2 / R50 * mom(1, R50, 1.5 * R50);
          break;
        case FunctionalTag::L: want = R50 / 2 * mono[0] + 4 / R50 * mom(1, 0, R50 / 2) + 2 * mom(0, R50 / 2, R50); break;
        default: {
          want = R50 * mono[0] + 2 / R50 * mom(1, 0, R50) - 8 / (R50 * R50) * mom(2, 0, R50);
          for (int k = 1; k <= trunc.K; ++k) {
            want += 2 * oracle::to_float50(series_coefficient(k)) / pow(R50, 2 * k + 1) * mom(2 * k + 1, 0, R50);
          }
          want += to50(trunc.tail_bound);
        }
      }
      EXPECT_LT(static_cast<double>(abs(to50(cost_value(obj, X)) - want) / (abs(want) > 1 ? Float50(abs(want)) : Float50(1))), 1e-25)
          << to_string(tag) << " drop=" << drop;
    }
  }
}

TEST(Threshold, CostsGivePOfLambda) {
  std::mt19937_64 rng(13);
  const Real R("1.2");
  const Real lambda("0.66");
  for (FunctionalTag tag : {FunctionalTag::P, FunctionalTag::PTilde}) {
    SosParameterization p{3, R};
    const FunctionalKind kind(tag, lambda);
    const ObjectiveData thr = build_threshold_functional(p, kind);
    std::vector<Matrix> X;
    for (const auto& b : p.gram_blocks()) X.push_back(random_psd(b.size, rng));
    const GaussianPoly g = fourier_from_gram(p, X[1], X[2]);
    const auto c = CandidateFunction::unchecked(fourier(g), R);
    const Real lib = tag == FunctionalTag::P ? eval_p(c, lambda) : eval_p_tilde(c, lambda);
    EXPECT_LT(rel_err(cost_value(thr, X), lib), 1e-25);

    const auto mono = to50(g.monomial_coeffs());
    const Float50 a = to50(lambda / R);
    auto mom = [&](int power, Float50 lo, Float50 hi) {
      return oracle::integrate([&](Float50 x) { return oracle::gauss_poly(mono, x) * pow(x, power); }, lo, hi);
    };
    Float50 want = a - 1 + 2 / a * mom(1, 0, a);
    if (tag == FunctionalTag::PTilde) want += 3 * mom(0, a, 1.5 * a) - 2 / a * mom(1, a, 1.5 * a);
    EXPECT_LT(static_cast<double>(abs(to50(cost_value(thr, X)) - want)), 1e-25) << to_string(tag);

    const auto row = build_feasibility_row(p, kind, Real("1e-10"));
    ASSERT_EQ(row.size(), 1u);
    std::vector<Matrix> with_slack = X;
    with_slack.push_back(Matrix::identity(1, Real("0.25")));
    EXPECT_LT(rel_err(block_dot(row.rows[0], with_slack) + thr.offset, cost_value(thr, X) - Real("0.25")), 1e-60);
  }
}

// End to end at small degree: the solved Gram matrices give a pair (f, g)
// with g the Fourier transform of f, checked independently of the Laguerre
// tables.
TEST(Solve, RecoveredPairSatisfiesIdentity) {
  SosParameterization p{3, Real("1.1")};
  const FunctionalKind kind(FunctionalTag::Z);
  const auto prob = assemble(p, kind);
  const auto sol = solve(prob);
  ASSERT_EQ(sol.status, SdpStatus::Optimal);

  const GaussianPoly f = function_from_gram(p, Matrix(), sol.X[0]);
  const GaussianPoly g = fourier_from_gram(p, sol.X[1], sol.X[2]);
  const auto want = oracle::fourier_monomial(to50(f.monomial_coeffs()));
  const auto got = to50(g.monomial_coeffs());
  ASSERT_EQ(want.size(), got.size());
  for (std::size_t k = 0; k < got.size(); ++k) EXPECT_LT(static_cast<double>(abs(got[k] - want[k])), 1e-24) << k;

  EXPECT_LT(rel_err(evaluate(f, Real(0)), Real(1)), 1e-25);
  EXPECT_LT(rel_err(evaluate(g, Real(0)), Real(1)), 1e-25);
  const auto c = CandidateFunction::unchecked(f, p.R);
  EXPECT_LT(rel_err(sol.primal_objective, eval_Z(c)), 1e-24);
  // The degree-2 family embeds in the degree-3 one.
  const auto lower = solve(assemble(SosParameterization{2, p.R}, kind));
  ASSERT_EQ(lower.status, SdpStatus::Optimal);
  EXPECT_LE(sol.primal_objective, lower.primal_objective + Real("1e-25"));
}
