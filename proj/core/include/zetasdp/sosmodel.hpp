#pragma once

#include "zetasdp/functionals.hpp"
#include "zetasdp/gausspoly.hpp"
#include "zetasdp/laguerre.hpp"
#include "zetasdp/sdpcore.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace zetasdp {

// f(x) = -(s1(x^2) + (x^2 - R^2) s2(x^2)) e^{-pi x^2} and
// fhat(x) = (s3(x^2) + x^2 s4(x^2)) e^{-pi x^2}, with s_i(y) = v(y)^T X_i v(y)
// and v_n(y) = L_n^{-1/2}(2 pi y), n = 0..d. With drop_X1 the block X1 is
// absent and f has an exact root at R.
struct SosParameterization {
  int d = 1;
  Real R = 1;
  bool drop_X1 = true;

  // Block names in order: [X1,] X2, X3, X4.
  std::vector<BlockSpec> gram_blocks() const;
};

// Exact Laguerre expansions of the Gram products: for 0 <= i <= j <= d,
// L_i L_j and t L_i L_j as coefficient vectors of length 2d+2 over
// L_0 .. L_{2d+1}. Shared per d.
class ProductTable {
 public:
  explicit ProductTable(int d);
  int d() const { return d_; }
  const RationalPoly& product(int i, int j) const;
  const RationalPoly& t_product(int i, int j) const;
  // Monomial coefficients (powers of t) of L_i L_j, length 2d+1.
  const RationalPoly& product_monomial(int i, int j) const;

 private:
  std::size_t index(int i, int j) const;
  int d_;
  std::vector<RationalPoly> product_, t_product_, monomial_;
};

std::shared_ptr<const ProductTable> product_table(int d);

// One row per Laguerre coefficient k = 0..2d+1 of I = T(f-polynomial) -
// (s3 + y s4). Each row is scaled so its largest coefficient is 1.
LinearConstraintSet build_identity_constraints(const SosParameterization& p);

struct NormalizationTargets {
  Real f0 = 1;
  Real fhat0 = 1;
};
// Targets used for the threshold kinds: f(0) = 1 - eps, fhat(0) = 1 + eps.
NormalizationTargets threshold_targets(const Real& eps = Real("1e-10"));

// f(0) and fhat(0) rows, plus f(R) = 0 when X1 is kept.
LinearConstraintSet build_normalization_constraints(const SosParameterization& p, const FunctionalKind& kind,
                                                    const NormalizationTargets& targets);
LinearConstraintSet build_normalization_constraints(const SosParameterization& p, const FunctionalKind& kind);

struct ObjectiveData {
  std::vector<Matrix> costs;  // per gram block
  Real offset;
};

// Costs such that sum <C_b, X_b> + offset equals the functional of f when
// fhat(0) = 1. Throws std::invalid_argument("feasibility kind") for P, PTilde.
ObjectiveData build_objective(const SosParameterization& p, const FunctionalKind& kind,
                              const SeriesTruncation& trunc = {});

// Costs whose value is p_f(lambda) (or ptilde), linear in X3 and X4.
ObjectiveData build_threshold_functional(const SosParameterization& p, const FunctionalKind& kind);

// p_f(lambda) - s = margin with a 1x1 slack block s >= 0 appended after the
// gram blocks.
LinearConstraintSet build_feasibility_row(const SosParameterization& p, const FunctionalKind& kind,
                                          const Real& margin = Real("1e-10"));

enum class AssembleMode {
  Optimize,  // Z family: minimize the functional; P family: maximize p_f(lambda)
  Certify,   // analytic center with a cap (Z family) or feasibility row (P family)
};

struct AssembleOptions {
  AssembleMode mode = AssembleMode::Optimize;
  // Certify, Z family: objective <= cap.
  std::optional<Real> objective_cap;
  SeriesTruncation trunc;
  Real threshold_perturbation = Real("1e-10");
  Real threshold_margin = Real("1e-10");
};

SdpProblem assemble(const SosParameterization& p, const FunctionalKind& kind, const AssembleOptions& opts = {});

// f and fhat from Gram matrices, in the Laguerre basis with degree bound
// 2d+1. X1 may be empty.
GaussianPoly function_from_gram(const SosParameterization& p, const Matrix& X1, const Matrix& X2);
GaussianPoly fourier_from_gram(const SosParameterization& p, const Matrix& X3, const Matrix& X4);

}  // namespace zetasdp
