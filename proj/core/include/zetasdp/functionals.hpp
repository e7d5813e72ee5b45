#pragma once

#include "zetasdp/gausspoly.hpp"
#include "zetasdp/real.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace zetasdp {

enum class FunctionalTag { Z, ZTilde, L, Z1, P, PTilde };

std::string to_string(FunctionalTag tag);
// Case-sensitive; throws std::invalid_argument on unknown names.
FunctionalTag parse_functional_tag(std::string_view name);

inline bool is_threshold_kind(FunctionalTag tag) { return tag == FunctionalTag::P || tag == FunctionalTag::PTilde; }

// Tag plus the threshold lambda, which is present exactly for P and PTilde.
class FunctionalKind {
 public:
  explicit FunctionalKind(FunctionalTag tag, std::optional<Real> lambda = std::nullopt);

  FunctionalTag tag() const { return tag_; }
  const std::optional<Real>& lambda() const { return lambda_; }

 private:
  FunctionalTag tag_;
  std::optional<Real> lambda_;
};

struct SeriesTruncation {
  int K = 15;
  Real tail_bound = Real("1e-10");
};

// c_k = 2^(2k+1) (k-1)! / (2k)!, exact.
mpq_class series_coefficient(int k);

// Term coeff * int_lo^hi g(x) x^power dx, hi empty meaning +infinity.
template <class S>
struct MomentTerm {
  S coeff;
  int power = 0;
  S lo;
  std::optional<S> hi;
};

// A functional of the shape
//   (at_zero * g(0) + sum terms) / (normalize ? fhat(0) : 1) + constant
// where g is f for the Z family and fhat for the p family. Generic in the
// scalar so the verifier can instantiate it with intervals.
template <class S>
struct LinearForm {
  bool on_fourier_side = false;
  bool normalize = true;
  S at_zero;
  S constant;
  std::vector<MomentTerm<S>> terms;
};

// Builds the modified functional for Z, ZTilde, L, Z1 (argument `lambda`
// ignored), or p_f(lambda) / ptilde_f(lambda) for P, PTilde.
template <class S>
LinearForm<S> functional_form(FunctionalTag tag, const S& R, const S& lambda, const S& tail_bound, int K);

// Convenience for Real scalars.
LinearForm<Real> functional_form(const FunctionalKind& kind, const Real& R, const SeriesTruncation& trunc = {});

enum class Baseline { Hat, Selberg };

std::string to_string(Baseline b);

// Either a Gaussian-weighted polynomial with a declared last sign change R,
// or one of the closed-form baselines (both have r = 1).
class CandidateFunction {
 public:
  // Checks the shape invariants (f(R) = 0, f <= 0 sampled on [R, R + 10],
  // eventual sign via the leading coefficient, fhat >= 0 sampled) to a
  // relative tolerance; throws std::invalid_argument naming the violation.
  static CandidateFunction from_poly(const GaussianPoly& f, const Real& radius);
  // No shape checks; the radius must still be positive.
  static CandidateFunction unchecked(const GaussianPoly& f, const Real& radius);
  static CandidateFunction baseline(Baseline b);

  bool is_baseline() const { return baseline_.has_value(); }
  std::optional<Baseline> baseline_kind() const { return baseline_; }
  // Valid only when !is_baseline().
  const GaussianPoly& f() const { return *f_; }
  const GaussianPoly& fhat() const { return *fhat_; }
  const Real& radius() const { return radius_; }

  Real f_at(const Real& x) const;
  Real fhat_at(const Real& x) const;
  // int_lo^hi g(x) x^power dx with g = f or fhat.
  Real moment(bool fourier_side, int power, const Real& lo, const std::optional<Real>& hi) const;

 private:
  CandidateFunction() = default;
  std::optional<GaussianPoly> f_;
  std::optional<GaussianPoly> fhat_;  // monomial basis
  std::optional<Baseline> baseline_;
  Real radius_;
};

// Returns an error description if a shape invariant fails.
std::optional<std::string> check_shape(const CandidateFunction& c);

enum class Normalization {
  Modified,   // divides by fhat(0) and weights the leading term by f(0)
  Idealized,  // assumes f(0) = fhat(0) = 1
};

Real evaluate_form(const CandidateFunction& c, const LinearForm<Real>& form, Normalization n = Normalization::Modified);

Real eval_Z(const CandidateFunction& c, Normalization n = Normalization::Modified);
Real eval_ZTilde(const CandidateFunction& c, Normalization n = Normalization::Modified);
Real eval_L(const CandidateFunction& c, Normalization n = Normalization::Modified);
// Truncated series plus trunc.tail_bound.
Real eval_Z1(const CandidateFunction& c, const SeriesTruncation& trunc = {}, Normalization n = Normalization::Modified);
Real eval_p(const CandidateFunction& c, const Real& lambda);
Real eval_p_tilde(const CandidateFunction& c, const Real& lambda);
// Dispatches on the tag; threshold kinds need a lambda.
Real eval_functional(const CandidateFunction& c, const FunctionalKind& kind, const SeriesTruncation& trunc = {},
                     Normalization n = Normalization::Modified);

struct CrossingOptions {
  Real tol = Real("1e-6");
  Real lambda_min = Real("1e-3");
  Real lambda_max = Real(1000);
  Real grid_ratio = Real("1.01");
};

// First sign change of p (or ptilde) on a geometric grid, refined by
// bisection. Returns hi with p(hi) > 0, p(hi - w) <= 0 and w <= tol. Throws
// std::runtime_error("no crossing") when p stays nonpositive up to
// lambda_max.
Real last_positive_crossing(const CandidateFunction& c, FunctionalTag which, const CrossingOptions& opts = {});

struct BaselineRow {
  Baseline baseline;
  Real Z, ZTilde, L, Z1, P, PTilde;
};
BaselineRow baseline_values(Baseline b, const SeriesTruncation& trunc = {}, const CrossingOptions& opts = {});

// ---- template definitions ----

template <class S>
LinearForm<S> functional_form(FunctionalTag tag, const S& R, const S& lambda, const S& tail_bound, int K) {
  LinearForm<S> form;
  const S zero(0);
  auto term = [&](S coeff, int power, S lo, S hi) { form.terms.push_back({std::move(coeff), power, std::move(lo), std::move(hi)}); };
  switch (tag) {
    case FunctionalTag::Z:
    case FunctionalTag::ZTilde: {
      form.at_zero = R;
      term(S(2) / R, 1, zero, R);
      if (tag == FunctionalTag::ZTilde) {
        const S upper = R * 3 / 2;
        term(S(3), 0, R, upper);
        term(-(S(2) / R), 1, R, upper);
      }
      break;
    }
    case FunctionalTag::L: {
      const S half = R / 2;
      form.at_zero = half;
      term(S(4) / R, 1, zero, half);
      term(S(2), 0, half, R);
      break;
    }
    case FunctionalTag::Z1: {
      form.at_zero = R;
      term(S(2) / R, 1, zero, R);
      term(-(S(8) / (R * R)), 2, zero, R);
      // c_{k+1} = c_k * 4k / ((2k+1)(2k+2)), c_1 = 4
      S c(4);
      S r_pow = R * R * R;
      for (int k = 1; k <= K; ++k) {
        term(c * 2 / r_pow, 2 * k + 1, zero, R);
        c = c * (4 * k) / ((2 * k + 1) * (2 * k + 2));
        r_pow = r_pow * R * R;
      }
      form.constant = tail_bound;
      break;
    }
    case FunctionalTag::P:
    case FunctionalTag::PTilde: {
      form.on_fourier_side = true;
      form.normalize = false;
      form.at_zero = zero;
      const S upper = lambda / R;
      form.constant = upper - 1;
      const S scale = R * 2 / lambda;
      term(scale, 1, zero, upper);
      if (tag == FunctionalTag::PTilde) {
        const S top = upper * 3 / 2;
        term(S(3), 0, upper, top);
        term(-scale, 1, upper, top);
      }
      break;
    }
  }
  return form;
}

}  // namespace zetasdp
