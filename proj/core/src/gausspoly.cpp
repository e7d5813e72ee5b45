#include "zetasdp/gausspoly.hpp"

#include "zetasdp/laguerre.hpp"

#include <stdexcept>
#include <utility>

namespace zetasdp {

namespace {

Real epsilon_for_precision() {
  return ldexp(Real(1), -static_cast<int>(working_precision_bits() + 4));
}

// int_lo^hi x^m exp(-pi x^2) dx for 0 <= lo < hi (hi may be infinite).
Real nonnegative_range_moment(int m, const MomentTable& lo, const MomentTable& hi) {
  return lo.at(m) - hi.at(m);
}

}  // namespace

GaussianPoly::GaussianPoly(Vector coeffs, EvenPolyBasis basis) : coeffs_(std::move(coeffs)), basis_(basis) {
  if (basis_.degree_bound < 1) throw std::invalid_argument("degree bound must be at least 1");
  if (coeffs_.size() != static_cast<std::size_t>(basis_.degree_bound) + 1) {
    throw std::invalid_argument("coefficient count must be degree_bound + 1");
  }
}

GaussianPoly GaussianPoly::monomial(Vector coeffs) {
  const int d = std::max<int>(1, static_cast<int>(coeffs.size()) - 1);
  coeffs.resize(static_cast<std::size_t>(d) + 1);
  return GaussianPoly(std::move(coeffs), {BasisKind::MonomialInXSquared, d});
}

GaussianPoly GaussianPoly::laguerre(Vector coeffs) {
  const int d = std::max<int>(1, static_cast<int>(coeffs.size()) - 1);
  coeffs.resize(static_cast<std::size_t>(d) + 1);
  return GaussianPoly(std::move(coeffs), {BasisKind::LaguerreHalf, d});
}

Vector GaussianPoly::monomial_coeffs() const {
  if (basis_.kind == BasisKind::MonomialInXSquared) return coeffs_;
  return laguerre_to_monomial_matrix(basis_.degree_bound) * coeffs_;
}

Vector GaussianPoly::laguerre_coeffs() const {
  if (basis_.kind == BasisKind::LaguerreHalf) return coeffs_;
  return monomial_to_laguerre_matrix(basis_.degree_bound) * coeffs_;
}

Matrix laguerre_to_monomial_matrix(int d) {
  const auto table = laguerre_table(d);
  const auto n = static_cast<std::size_t>(d) + 1;
  Matrix m(n, n);
  const Real two_pi = 2 * pi();
  Real scale = 1;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = k; j < n; ++j) {
      const auto& lj = table->monomial(static_cast<int>(j));
      m(k, j) = from_rational(lj[k]) * scale;
    }
    scale *= two_pi;
  }
  return m;
}

Matrix monomial_to_laguerre_matrix(int d) {
  const auto table = laguerre_table(d);
  const auto n = static_cast<std::size_t>(d) + 1;
  Matrix m(n, n);
  const Real inv_two_pi = 1 / (2 * pi());
  Real scale = 1;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& pk = table->power(static_cast<int>(k));
    for (std::size_t j = 0; j <= k; ++j) m(j, k) = from_rational(pk[j]) * scale;
    scale *= inv_two_pi;
  }
  return m;
}

Real evaluate(const GaussianPoly& f, const Real& x) {
  const Real y = x * x;
  const Real gauss = exp(-pi() * y);
  const auto& c = f.coeffs();
  Real p;
  if (f.basis().kind == BasisKind::MonomialInXSquared) {
    for (std::size_t k = c.size(); k-- > 0;) p = p * y + c[k];
  } else {
    const Vector lv = laguerre_values(f.degree_bound(), 2 * pi() * y);
    for (std::size_t n = 0; n < c.size(); ++n) p += c[n] * lv[n];
  }
  return p * gauss;
}

GaussianPoly fourier(const GaussianPoly& f) {
  Vector lag = f.laguerre_coeffs();
  for (std::size_t n = 1; n < lag.size(); n += 2) lag[n] = -lag[n];
  GaussianPoly out(std::move(lag), {BasisKind::LaguerreHalf, f.degree_bound()});
  if (f.basis().kind == BasisKind::LaguerreHalf) return out;
  return change_basis(out, f.basis());
}

GaussianPoly change_basis(const GaussianPoly& f, EvenPolyBasis target) {
  if (target.degree_bound < f.degree_bound()) throw std::invalid_argument("target degree too small");
  Vector coeffs = target.kind == BasisKind::LaguerreHalf ? f.laguerre_coeffs() : f.monomial_coeffs();
  // Both bases are graded by degree, so padding with zeros is exact.
  coeffs.resize(static_cast<std::size_t>(target.degree_bound) + 1);
  return GaussianPoly(std::move(coeffs), target);
}

Real upper_incomplete_gamma(const Real& s, const Real& z) {
  if (!(s > 0)) throw std::invalid_argument("incomplete gamma needs s > 0");
  if (z < 0) throw std::invalid_argument("incomplete gamma needs z >= 0");
  Real gamma_s;
  mpfr_gamma(raw(gamma_s), raw(s), MPFR_RNDN);
  if (z == 0) return gamma_s;
  const Real eps = epsilon_for_precision();
  const Real prefactor = exp(s * log(z) - z);
  if (z < s + 1) {
    Real term = 1 / s;
    Real sum = term;
    for (int k = 1; k < 100000; ++k) {
      term *= z / (s + k);
      sum += term;
      if (abs(term) < abs(sum) * eps) break;
    }
    return gamma_s - sum * prefactor;
  }
  const Real tiny = eps * eps;
  Real b = z + 1 - s;
  Real c = 1 / tiny;
  Real d = 1 / b;
  Real h = d;
  for (int i = 1; i < 100000; ++i) {
    const Real an = -Real(i) * (Real(i) - s);
    b += 2;
    d = an * d + b;
    if (abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (abs(c) < tiny) c = tiny;
    d = 1 / d;
    const Real del = d * c;
    h *= del;
    if (abs(del - 1) < eps) break;
  }
  return prefactor * h;
}

Real partial_moment(int m, const Real& a) {
  if (m < 0) throw std::invalid_argument("negative moment order");
  if (a < 0) throw std::invalid_argument("partial moment needs a >= 0");
  const Real s = Real(m + 1) / 2;
  const Real p = pi();
  return upper_incomplete_gamma(s, p * a * a) / (2 * pow(p, s));
}

MomentTable::MomentTable(const Real& a, int max_power) : precision_(working_precision_bits()) {
  if (max_power < 0) throw std::invalid_argument("negative moment order");
  if (a < 0) throw std::invalid_argument("moment table needs a >= 0");
  values_.resize(static_cast<std::size_t>(max_power) + 1);
  values_[0] = partial_moment(0, a);
  if (max_power >= 1) values_[1] = partial_moment(1, a);
  const Real two_pi = 2 * pi();
  const Real gauss = exp(-pi() * a * a) / two_pi;
  Real a_pow = a;  // a^(m-1)
  for (int m = 2; m <= max_power; ++m) {
    const auto mm = static_cast<std::size_t>(m);
    values_[mm] = a_pow * gauss + Real(m - 1) / two_pi * values_[mm - 2];
    a_pow *= a;
  }
}

MomentTable MomentTable::at_infinity(int max_power) {
  MomentTable t;
  t.values_.resize(static_cast<std::size_t>(max_power) + 1);
  t.precision_ = working_precision_bits();
  return t;
}

Real weighted_moment_functional(const GaussianPoly& f, const WeightPiece& piece) {
  if (piece.hi && !(piece.lo < *piece.hi)) throw std::invalid_argument("invalid interval: need lo < hi");
  const Vector p = f.monomial_coeffs();
  const auto& w = piece.coeffs;
  if (w.empty()) return Real(0);
  const int max_power = 2 * (static_cast<int>(p.size()) - 1) + static_cast<int>(w.size()) - 1;

  // sum_k sum_j p_k w_j I(2k + j) where I(m) is the plain moment on the range.
  auto combine = [&](auto&& moment) {
    Real total;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] == 0) continue;
      for (std::size_t j = 0; j < w.size(); ++j) {
        if (w[j] == 0) continue;
        total += p[k] * w[j] * moment(static_cast<int>(2 * k + j));
      }
    }
    return total;
  };

  const Real zero;
  if (piece.lo >= 0) {
    const MomentTable lo(piece.lo, max_power);
    const MomentTable hi = piece.hi ? MomentTable(*piece.hi, max_power) : MomentTable::at_infinity(max_power);
    return combine([&](int m) { return nonnegative_range_moment(m, lo, hi); });
  }
  // Negative part reflected: int_lo^0 x^m g = (-1)^m int_0^{-lo} x^m g.
  const MomentTable origin(zero, max_power);
  const MomentTable neg(-piece.lo, max_power);
  if (piece.hi && *piece.hi <= 0) {
    const MomentTable hi(-*piece.hi, max_power);
    return combine([&](int m) {
      Real v = hi.at(m) - neg.at(m);
      return (m % 2 == 0) ? v : Real(-v);
    });
  }
  const MomentTable hi = piece.hi ? MomentTable(*piece.hi, max_power) : MomentTable::at_infinity(max_power);
  return combine([&](int m) {
    Real left = origin.at(m) - neg.at(m);
    if (m % 2 != 0) left = -left;
    return left + origin.at(m) - hi.at(m);
  });
}

Real weighted_moment_functional(const GaussianPoly& f, std::span<const WeightPiece> pieces) {
  Real total;
  for (const auto& piece : pieces) total += weighted_moment_functional(f, piece);
  return total;
}

}  // namespace zetasdp
