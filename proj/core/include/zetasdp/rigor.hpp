#pragma once

#include "zetasdp/certio.hpp"
#include "zetasdp/real.hpp"

#include <gmpxx.h>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace zetasdp {

// Closed interval [lo, hi] with endpoints at the working precision. Every
// operation rounds outward, so the result contains the exact result for any
// choice of points in the operands.
class Interval {
 public:
  Interval();  // [0, 0]
  Interval(int v);  // implicit so that LinearForm<Interval> reads like LinearForm<Real>
  explicit Interval(const Real& point);
  explicit Interval(const mpq_class& q);
  Interval(const Real& lo, const Real& hi);  // throws std::invalid_argument if lo > hi

  static Interval pi();
  static Interval hull(const Interval& a, const Interval& b);

  const Real& lo() const { return lo_; }
  const Real& hi() const { return hi_; }
  unsigned precision() const { return precision_; }

  Real width() const;  // rounded up
  Real mid() const;
  // max |x| over the interval, rounded up
  Real mag() const;
  bool contains(const Real& x) const;
  bool contains(const mpq_class& q) const;
  bool contains(const Interval& o) const;
  bool contains_zero() const { return lo_ <= 0 && hi_ >= 0; }
  bool positive() const { return lo_ > 0; }
  bool negative() const { return hi_ < 0; }

  Interval operator-() const;
  Interval& operator+=(const Interval& o);
  Interval& operator-=(const Interval& o);
  Interval& operator*=(const Interval& o);
  // Throws std::domain_error when the divisor contains zero.
  Interval& operator/=(const Interval& o);

  friend Interval operator+(Interval a, const Interval& b) { return a += b; }
  friend Interval operator-(Interval a, const Interval& b) { return a -= b; }
  friend Interval operator*(Interval a, const Interval& b) { return a *= b; }
  friend Interval operator/(Interval a, const Interval& b) { return a /= b; }

 private:
  Real lo_, hi_;
  unsigned precision_;
};

Interval sqr(const Interval& x);
// Throws std::domain_error if x.lo < 0.
Interval sqrt(const Interval& x);
Interval exp(const Interval& x);
Interval pow(const Interval& x, int n);
Interval abs(const Interval& x);

// "[lo, hi]" with `digits` significant digits, lo rounded down and hi up.
std::string format_interval(const Interval& x, int digits = 30);
std::ostream& operator<<(std::ostream& out, const Interval& x);

using IntervalMatrix = std::vector<std::vector<Interval>>;
IntervalMatrix to_interval_matrix(const Matrix& m);

struct DefinitenessResult {
  bool positive_definite = false;
  // Valid lower bound on the smallest eigenvalue (lo); hi is the smallest
  // diagonal entry, an upper bound. Empty when not positive definite.
  std::optional<Interval> min_eigenvalue;
};

// Validated Cholesky of M - sI with bisection on s. Throws
// std::invalid_argument on a non-square or non-symmetric input.
DefinitenessResult check_positive_definite(const IntervalMatrix& m, int bisection_steps = 20);
DefinitenessResult check_positive_definite(const Matrix& m, int bisection_steps = 20);

// Coefficients of I(0, X2, X3, X4) = T(f-polynomial) - (s3 + y s4) in the
// family v_i v_i, v_i v_{i+1} (i = 0..d, the diagonal and upper diagonal of
// v v^T) followed by y v_d v_d, ordered by degree. The family is triangular
// so the expansion is unique. Throws std::runtime_error("residual not
// representable; increase precision") if a pivot encloses zero.
std::vector<Interval> residual_coefficients(const SosCertificate& cert);

// int_0^a x^m exp(-pi x^2) dx for a >= 0 from the positive series
// exp(-pi a^2) sum_k (2 pi)^k a^(m+2k+1) / ((m+1)(m+3)...(m+2k+1)) with an
// explicit geometric bound on the truncated tail.
Interval gaussian_moment(int m, const Interval& a);

// Rigorous enclosures of the candidate's values at 0: f(0) and fhat(0).
struct ZeroValues {
  Interval f0, fhat0;
};
ZeroValues rigorous_zero_values(const SosCertificate& cert);

// Modified functional for the minimization kinds, or p_f(lambda) /
// ptilde_f(lambda) for the threshold kinds. Throws
// std::domain_error("normalization degenerate") when fhat(0) encloses zero.
Interval rigorous_functional(const SosCertificate& cert, const SeriesTruncation& trunc = {});

struct NamedCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  FunctionalTag kind = FunctionalTag::Z;
  int d = 0;
  bool pd_X2 = false, pd_X3 = false, pd_X4 = false;
  std::optional<Interval> b;  // min over X3, X4
  Interval B;                 // max |residual coefficient|
  bool test_passed = false;   // b.lo >= (1 + 2d) B.hi
  std::optional<Interval> functional_bound;
  std::vector<NamedCheck> checks;
  unsigned precision_bits = 0;

  bool pd_ok() const { return pd_X2 && pd_X3 && pd_X4; }
  // Every check passed.
  bool verified() const;
};

struct VerifyOptions {
  // 0 keeps the current working precision.
  unsigned precision_bits = 0;
  SeriesTruncation trunc;
  int bisection_steps = 20;
};

// Failures are reported in the checks, never thrown.
VerificationReport verify(const SosCertificate& cert, const VerifyOptions& opts = {});

// One JSON object with every report field; intervals as "[lo, hi]" strings.
std::string verdict_json(const VerificationReport& report);

}  // namespace zetasdp
