#pragma once

#include "zetasdp/certio.hpp"
#include "zetasdp/functionals.hpp"
#include "zetasdp/sdpcore.hpp"
#include "zetasdp/sosmodel.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

namespace zetasdp {

struct SearchConfig {
  Real R_lo = 1, R_hi = Real("1.8");
  Real brent_tol = Real("1e-6");
  Real lambda_lo = Real("0.4"), lambda_hi = Real("0.9");
  Real lambda_tol = Real("1e-6");
  Real resolve_margin = Real("1e-6");
  Real lambda_bump = Real("1e-6");
  SeriesTruncation trunc;
  // Solver settings while searching; the certificate solve uses `certify`.
  SolverOptions inner;
  SolverOptions certify;
  // Progress lines go here when set.
  std::ostream* log = nullptr;

  // Default brackets per kind.
  static SearchConfig defaults_for(FunctionalTag tag);
  // Throws std::invalid_argument on an empty bracket or nonpositive tolerance.
  void validate() const;
};

struct Evaluation {
  Real R;
  std::optional<Real> lambda;
  std::optional<Real> value;  // empty when the inner solve failed
  SdpStatus status = SdpStatus::Stalled;
};

struct SearchTrace {
  std::vector<Evaluation> evaluations;
  // Index into `evaluations` of the best value so far.
  std::optional<std::size_t> best;

  void record(Evaluation e, bool minimizing = true);
};

class SearchError : public std::runtime_error {
 public:
  SearchError(const std::string& what, SearchTrace trace) : std::runtime_error(what), trace_(std::move(trace)) {}
  const SearchTrace& trace() const { return trace_; }

 private:
  SearchTrace trace_;
};

// Value at R, empty if the inner problem could not be solved.
struct RadiusProbe {
  std::optional<Real> value;
  SdpStatus status = SdpStatus::Optimal;
};
using RadiusOracle = std::function<RadiusProbe(const Real& R)>;

struct ScalarMinimum {
  Real R;
  Real value;
};

// Brent minimization of the oracle over [cfg.R_lo, cfg.R_hi]; failures score
// as a large penalty. Throws SearchError if no evaluation succeeded.
ScalarMinimum minimize_over_radius(const RadiusOracle& oracle, const SearchConfig& cfg, SearchTrace* trace = nullptr);

struct OuterResult {
  Real R;
  Real value;
  SdpSolution solution;
  SearchTrace trace;
};

// Minimizes the optimal SDP value over R for Z, ZTilde, L or Z1.
OuterResult outer_minimize(const FunctionalKind& kind, int d, const SearchConfig& cfg);

// Inner feasibility at lambda: the value is max p_f(lambda) minus the
// required margin, so feasible means value >= 0.
struct LambdaProbe {
  bool feasible = false;
  std::optional<Real> value;
};
using LambdaOracle = std::function<LambdaProbe(const Real& lambda)>;

struct LambdaResult {
  Real lambda;       // smallest feasible lambda found (upper end of the final bracket)
  Real infeasible;   // largest infeasible lambda found
  Real estimate;     // interpolated root of the value, for the outer search
};

// Shrinks [cfg.lambda_lo, cfg.lambda_hi] to width cfg.lambda_tol, using the
// probe values for Illinois-style interpolation when present and bisection
// otherwise. Throws SearchError("bad bracket") unless lambda_lo is infeasible
// and lambda_hi feasible. With a guess the bracket is grown outward from it
// instead, staying inside the configured one.
LambdaResult lambda_search(const LambdaOracle& oracle, const SearchConfig& cfg, SearchTrace* trace = nullptr,
                           const std::optional<Real>& guess = std::nullopt);

struct ThresholdResult {
  Real R;
  Real lambda;
  Real estimate;  // interpolated root, smooth in R
  SdpSolution solution;  // inner solve at (R, lambda)
  SearchTrace trace;
};

// lambda_search for P or PTilde at a fixed R.
ThresholdResult threshold_at_radius(FunctionalTag tag, int d, const Real& R, const SearchConfig& cfg,
                                    const std::optional<Real>& guess = std::nullopt);
// Brent over R of the threshold found by lambda_search, each radius starting
// from the previous radius' estimate.
ThresholdResult threshold_minimize(FunctionalTag tag, int d, const SearchConfig& cfg);

// Analytic-center solve with the objective capped at value + resolve_margin.
// For threshold kinds `value` is lambda and the solve runs at lambda +
// lambda_bump with perturbed normalizations. Throws
// SearchError("no interior point; widen margin") if a Gram block is not
// strictly positive definite.
SosCertificate resolve_for_certificate(const FunctionalKind& kind, int d, const Real& R, const Real& value,
                                       const SearchConfig& cfg);

// Certificate from Gram blocks (the X1 block must be absent).
SosCertificate certificate_from_solution(const FunctionalKind& kind, int d, const Real& R, const SdpSolution& sol);

}  // namespace zetasdp
