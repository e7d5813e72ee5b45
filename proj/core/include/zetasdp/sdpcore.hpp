#pragma once

#include "zetasdp/linalg.hpp"
#include "zetasdp/real.hpp"

#include <functional>
#include <string>
#include <vector>

namespace zetasdp {

struct BlockSpec {
  std::string name;
  std::size_t size = 0;
};

// sum_b <coeffs[b], X_b> = rhs. An empty matrix stands for a zero block.
struct ConstraintRow {
  std::vector<Matrix> coeffs;
  Real rhs;
  std::string label;
};

struct LinearConstraintSet {
  std::vector<ConstraintRow> rows;

  std::size_t size() const { return rows.size(); }
  void append(const LinearConstraintSet& other);
};

enum class SdpMode { Minimize, AnalyticCenter };

// minimize sum_b <C_b, X_b> + offset subject to the rows and X_b PSD. In
// AnalyticCenter mode the costs are ignored and the solver returns the
// maximizer of sum_b log det X_b over the feasible set.
struct SdpProblem {
  std::vector<BlockSpec> blocks;
  std::vector<Matrix> costs;  // empty matrix = zero cost
  Real objective_offset;
  LinearConstraintSet constraints;
  SdpMode mode = SdpMode::Minimize;

  std::size_t block_index(const std::string& name) const;
  // Throws std::invalid_argument on shape or symmetry violations.
  void validate() const;
};

enum class SdpStatus { Optimal, Feasible, Infeasible, Stalled };
std::string to_string(SdpStatus s);

struct SdpSolution {
  std::vector<Matrix> X;
  Vector y;
  std::vector<Matrix> S;
  Real primal_objective;
  Real dual_objective;
  Real duality_gap;
  SdpStatus status = SdpStatus::Stalled;
  int iterations = 0;
};

struct IterationInfo {
  int iteration = 0;
  Real mu, primal_infeasibility, dual_infeasibility, gap;
  Real primal_step, dual_step;
};

struct SolverOptions {
  unsigned precision_bits = kDefaultPrecisionBits;
  Real gap_tolerance = Real("1e-30");
  Real feasibility_tolerance = Real("1e-30");
  int max_iterations = 500;
  // Fraction of the distance to the cone boundary taken per step.
  Real step_fraction = Real("0.98");
  // Starting point X = S = scale * I, y = 0.
  Real initial_scale = 1;
  // Called once per iteration after the step; for diagnostics.
  std::function<void(const IterationInfo&)> observer;
};

// Infeasible-start primal-dual interior point method (HKM direction,
// Mehrotra predictor-corrector). Throws std::invalid_argument("degenerate
// rows") when the constraint matrices are linearly dependent.
SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts = {});

struct SdpResiduals {
  Real primal;  // max_j |sum_b <A_jb, X_b> - b_j|
  Real dual;    // max entry of |C - S - sum_j y_j A_j|
  std::vector<Real> min_eigenvalues;       // per X block
  std::vector<Real> min_dual_eigenvalues;  // per S block
};

SdpResiduals residuals(const SdpProblem& problem, const SdpSolution& solution);

}  // namespace zetasdp
