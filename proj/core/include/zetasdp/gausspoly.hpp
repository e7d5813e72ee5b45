#pragma once

#include "zetasdp/linalg.hpp"
#include "zetasdp/real.hpp"

#include <optional>
#include <span>
#include <vector>

namespace zetasdp {

enum class BasisKind {
  MonomialInXSquared,  // 1, x^2, x^4, ...
  LaguerreHalf,        // L_n^{-1/2}(2 pi x^2)
};

// Spans the even polynomials of degree <= 2 * degree_bound.
struct EvenPolyBasis {
  BasisKind kind = BasisKind::LaguerreHalf;
  int degree_bound = 1;

  bool operator==(const EvenPolyBasis&) const = default;
};

// f(x) = p(x) exp(-pi x^2) with p even of degree <= 2d, stored as d+1
// coefficients in `basis`. Immutable.
class GaussianPoly {
 public:
  GaussianPoly(Vector coeffs, EvenPolyBasis basis);

  static GaussianPoly monomial(Vector coeffs_in_x_squared);
  static GaussianPoly laguerre(Vector coeffs);

  const Vector& coeffs() const { return coeffs_; }
  const EvenPolyBasis& basis() const { return basis_; }
  int degree_bound() const { return basis_.degree_bound; }

  // Coefficients of p in powers of y = x^2.
  Vector monomial_coeffs() const;
  Vector laguerre_coeffs() const;

 private:
  Vector coeffs_;
  EvenPolyBasis basis_;
};

Real evaluate(const GaussianPoly& f, const Real& x);

// Fourier transform under fhat(x) = int f(y) exp(-2 pi i x y) dy. The
// Laguerre-Gauss functions are eigenfunctions with eigenvalue (-1)^n.
GaussianPoly fourier(const GaussianPoly& f);

// Throws std::invalid_argument when target.degree_bound < f.degree_bound().
GaussianPoly change_basis(const GaussianPoly& f, EvenPolyBasis target);

// Dense change-of-basis matrices acting on coefficient vectors, of size d+1.
// Both are triangular.
Matrix laguerre_to_monomial_matrix(int degree_bound);
Matrix monomial_to_laguerre_matrix(int degree_bound);

// Upper incomplete gamma Gamma(s, z) for s > 0, z >= 0: power series below
// z = s + 1, Lentz continued fraction above.
Real upper_incomplete_gamma(const Real& s, const Real& z);

// int_a^inf x^m exp(-pi x^2) dx = Gamma((m+1)/2, pi a^2) / (2 pi^((m+1)/2)).
Real partial_moment(int m, const Real& a);

// Tail moments int_a^inf x^m exp(-pi x^2) dx for m = 0..max_power. The first
// two entries come from partial_moment; the rest follow from integrating by
// parts, T(m) = a^(m-1) e^(-pi a^2) / (2 pi) + (m-1)/(2 pi) T(m-2), whose
// terms are all nonnegative.
class MomentTable {
 public:
  MomentTable(const Real& a, int max_power);
  // a = +infinity: every entry is zero.
  static MomentTable at_infinity(int max_power);

  const Real& at(int m) const { return values_.at(static_cast<std::size_t>(m)); }
  int max_power() const { return static_cast<int>(values_.size()) - 1; }
  unsigned precision() const { return precision_; }

 private:
  MomentTable() = default;
  Vector values_;
  unsigned precision_ = 0;
};

// One polynomial piece w(x) = sum_j coeffs[j] x^j on [lo, hi]; hi empty means
// +infinity.
struct WeightPiece {
  Vector coeffs;
  Real lo;
  std::optional<Real> hi;
};

// int_lo^hi f(x) w(x) dx, exact up to rounding via tail moments. lo may be
// negative; lo must be < hi.
Real weighted_moment_functional(const GaussianPoly& f, const WeightPiece& piece);
Real weighted_moment_functional(const GaussianPoly& f, std::span<const WeightPiece> pieces);

}  // namespace zetasdp
