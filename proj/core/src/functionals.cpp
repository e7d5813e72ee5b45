#include "zetasdp/functionals.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace zetasdp {

namespace {

using Quad = boost::multiprecision::cpp_bin_float_50;

Quad to_quad(const Real& x) { return Quad(format_real(x, 60)); }
Real from_quad(const Quad& x) { return parse_real(x.str(60, std::ios::scientific)); }

const Quad& quad_pi() {
  static const Quad value = boost::math::constants::pi<Quad>();
  return value;
}

Quad integrate(const std::function<Quad(Quad)>& g, Quad a, Quad b) {
  // Unit-length pieces keep the oscillatory integrands well resolved.
  Quad total = 0;
  while (a < b) {
    const Quad next = std::min<Quad>(b, a + Quad(0.5));
    Quad err;
    total += boost::math::quadrature::gauss_kronrod<Quad, 31>::integrate(g, a, next, 20, Quad("1e-30"), &err);
    a = next;
  }
  return total;
}

Quad hat_fourier(const Quad& x) {
  if (x == 0) return Quad(1);
  const Quad s = sin(quad_pi() * x) / (quad_pi() * x);
  return s * s;
}

Quad selberg(const Quad& x) {
  const Quad ax = abs(x);
  if (ax == 0) return Quad(1);
  const Quad u = 1 - ax;
  const Quad s = sin(quad_pi() * u);
  // sin(pi x)^2 / (1 - x^2) with the removable zero at x = 1 kept explicit.
  const Quad ratio = (u == 0) ? quad_pi() : s / u;
  return ratio * s / (quad_pi() * quad_pi() * ax * ax * (1 + ax));
}

Quad selberg_fourier(const Quad& x) {
  const Quad ax = abs(x);
  if (ax >= 1) return Quad(0);
  return 1 - ax + sin(2 * quad_pi() * ax) / (2 * quad_pi());
}

Real baseline_moment(Baseline b, bool fourier_side, int power, const Real& lo, const std::optional<Real>& hi) {
  if (lo < 0) throw std::invalid_argument("baseline moments need lo >= 0");
  const bool compact = (b == Baseline::Hat && !fourier_side) || (b == Baseline::Selberg && fourier_side);
  if (compact) {
    Real top = hi ? std::min(*hi, Real(1)) : Real(1);
    if (!(lo < top)) return Real(0);
    if (b == Baseline::Hat) {
      // int (1 - x) x^k = x^(k+1)/(k+1) - x^(k+2)/(k+2)
      auto antiderivative = [power](const Real& x) {
        return pow(x, power + 1) / (power + 1) - pow(x, power + 2) / (power + 2);
      };
      return antiderivative(top) - antiderivative(lo);
    }
    auto g = [power](Quad x) { return selberg_fourier(x) * pow(x, power); };
    return from_quad(integrate(g, to_quad(lo), to_quad(top)));
  }
  if (!hi) throw std::invalid_argument("baseline moment over an unbounded range");
  std::function<Quad(Quad)> g;
  if (b == Baseline::Hat) {
    g = [power](Quad x) { return hat_fourier(x) * pow(x, power); };
  } else {
    g = [power](Quad x) { return selberg(x) * pow(x, power); };
  }
  return from_quad(integrate(g, to_quad(lo), to_quad(*hi)));
}

Real leading_coefficient(const Vector& mono) {
  for (std::size_t k = mono.size(); k-- > 0;) {
    if (mono[k] != 0) return mono[k];
  }
  return Real(0);
}

}  // namespace

std::string to_string(FunctionalTag tag) {
  switch (tag) {
    case FunctionalTag::Z: return "Z";
    case FunctionalTag::ZTilde: return "ZTilde";
    case FunctionalTag::L: return "L";
    case FunctionalTag::Z1: return "Z1";
    case FunctionalTag::P: return "P";
    case FunctionalTag::PTilde: return "PTilde";
  }
  return "?";
}

FunctionalTag parse_functional_tag(std::string_view name) {
  for (auto tag : {FunctionalTag::Z, FunctionalTag::ZTilde, FunctionalTag::L, FunctionalTag::Z1, FunctionalTag::P,
                   FunctionalTag::PTilde}) {
    if (to_string(tag) == name) return tag;
  }
  throw std::invalid_argument("unknown functional kind '" + std::string(name) + "'");
}

FunctionalKind::FunctionalKind(FunctionalTag tag, std::optional<Real> lambda) : tag_(tag), lambda_(std::move(lambda)) {
  if (is_threshold_kind(tag) && !lambda_) throw std::invalid_argument(to_string(tag) + " needs a lambda");
  if (!is_threshold_kind(tag) && lambda_) throw std::invalid_argument(to_string(tag) + " takes no lambda");
  if (lambda_ && !(*lambda_ > 0)) throw std::invalid_argument("lambda must be positive");
}

mpq_class series_coefficient(int k) {
  if (k < 1) throw std::invalid_argument("series index starts at 1");
  mpz_class num = 1;
  num <<= 2 * k + 1;
  mpz_class fact_km1 = 1, fact_2k = 1;
  for (int j = 2; j <= k - 1; ++j) fact_km1 *= j;
  for (int j = 2; j <= 2 * k; ++j) fact_2k *= j;
  mpq_class c(num * fact_km1, fact_2k);
  c.canonicalize();
  return c;
}

LinearForm<Real> functional_form(const FunctionalKind& kind, const Real& R, const SeriesTruncation& trunc) {
  if (!(R > 0)) throw std::invalid_argument("radius must be positive");
  if (trunc.K < 1) throw std::invalid_argument("series truncation needs K >= 1");
  const Real lambda = kind.lambda().value_or(Real(0));
  return functional_form<Real>(kind.tag(), R, lambda, trunc.tail_bound, trunc.K);
}

std::string to_string(Baseline b) { return b == Baseline::Hat ? "Hat" : "Selberg"; }

CandidateFunction CandidateFunction::unchecked(const GaussianPoly& f, const Real& radius) {
  if (!(radius > 0)) throw std::invalid_argument("radius must be positive");
  CandidateFunction c;
  c.f_ = f;
  c.fhat_ = change_basis(fourier(f), {BasisKind::MonomialInXSquared, f.degree_bound()});
  c.radius_ = radius;
  return c;
}

CandidateFunction CandidateFunction::from_poly(const GaussianPoly& f, const Real& radius) {
  auto c = unchecked(f, radius);
  if (auto problem = check_shape(c)) throw std::invalid_argument(*problem);
  return c;
}

CandidateFunction CandidateFunction::baseline(Baseline b) {
  CandidateFunction c;
  c.baseline_ = b;
  c.radius_ = 1;
  return c;
}

Real CandidateFunction::f_at(const Real& x) const {
  if (!baseline_) return evaluate(*f_, x);
  if (*baseline_ == Baseline::Hat) return std::max(Real(0), Real(1 - abs(x)));
  return from_quad(selberg(to_quad(x)));
}

Real CandidateFunction::fhat_at(const Real& x) const {
  if (!baseline_) return evaluate(*fhat_, x);
  if (*baseline_ == Baseline::Hat) return from_quad(hat_fourier(to_quad(x)));
  return from_quad(selberg_fourier(to_quad(x)));
}

Real CandidateFunction::moment(bool fourier_side, int power, const Real& lo, const std::optional<Real>& hi) const {
  if (baseline_) return baseline_moment(*baseline_, fourier_side, power, lo, hi);
  Vector w(static_cast<std::size_t>(power) + 1);
  w.back() = 1;
  return weighted_moment_functional(fourier_side ? *fhat_ : *f_, WeightPiece{std::move(w), lo, hi});
}

std::optional<std::string> check_shape(const CandidateFunction& c) {
  if (c.is_baseline()) return std::nullopt;
  const Real& R = c.radius();
  const Real scale = std::max(Real(abs(c.f_at(Real(0)))), Real(abs(c.fhat_at(Real(0)))));
  const Real tol = scale * Real("1e-20");
  if (abs(c.f_at(R)) > tol) return "f(R) is not zero";
  const int samples = 1000;
  for (int i = 1; i <= samples; ++i) {
    const Real x = R + Real(10) * i / samples;
    if (c.f_at(x) > tol) return "f is positive beyond R at x = " + format_real(x, 8);
  }
  const Vector mono = c.f().monomial_coeffs();
  if (leading_coefficient(mono) > 0) return "f is eventually positive";
  for (int i = 0; i <= samples; ++i) {
    const Real x = Real(10) * i / samples;
    if (c.fhat_at(x) < -tol) return "fhat is negative at x = " + format_real(x, 8);
  }
  return std::nullopt;
}

Real evaluate_form(const CandidateFunction& c, const LinearForm<Real>& form, Normalization n) {
  const bool idealized = n == Normalization::Idealized;
  Real total;
  if (form.at_zero != 0) {
    total += form.at_zero * (idealized ? Real(1) : (form.on_fourier_side ? c.fhat_at(Real(0)) : c.f_at(Real(0))));
  }
  if (c.is_baseline()) {
    for (const auto& t : form.terms) total += t.coeff * c.moment(form.on_fourier_side, t.power, t.lo, t.hi);
  } else {
    // Terms on a shared interval collapse into one polynomial weight.
    std::vector<WeightPiece> pieces;
    for (const auto& t : form.terms) {
      auto it = std::find_if(pieces.begin(), pieces.end(),
                             [&](const WeightPiece& p) { return p.lo == t.lo && p.hi == t.hi; });
      if (it == pieces.end()) {
        pieces.push_back(WeightPiece{{}, t.lo, t.hi});
        it = std::prev(pieces.end());
      }
      const auto power = static_cast<std::size_t>(t.power);
      if (it->coeffs.size() <= power) it->coeffs.resize(power + 1);
      it->coeffs[power] += t.coeff;
    }
    total += weighted_moment_functional(form.on_fourier_side ? c.fhat() : c.f(), pieces);
  }
  if (form.normalize && !idealized) {
    const Real fhat0 = c.fhat_at(Real(0));
    if (fhat0 == 0) throw std::domain_error("normalization degenerate");
    total /= fhat0;
  }
  return total + form.constant;
}

Real eval_Z(const CandidateFunction& c, Normalization n) {
  return evaluate_form(c, functional_form(FunctionalKind(FunctionalTag::Z), c.radius()), n);
}

Real eval_ZTilde(const CandidateFunction& c, Normalization n) {
  return evaluate_form(c, functional_form(FunctionalKind(FunctionalTag::ZTilde), c.radius()), n);
}

Real eval_L(const CandidateFunction& c, Normalization n) {
  return evaluate_form(c, functional_form(FunctionalKind(FunctionalTag::L), c.radius()), n);
}

Real eval_Z1(const CandidateFunction& c, const SeriesTruncation& trunc, Normalization n) {
  return evaluate_form(c, functional_form(FunctionalKind(FunctionalTag::Z1), c.radius(), trunc), n);
}

Real eval_p(const CandidateFunction& c, const Real& lambda) {
  return evaluate_form(c, functional_form(FunctionalKind(FunctionalTag::P, lambda), c.radius()));
}

Real eval_p_tilde(const CandidateFunction& c, const Real& lambda) {
  return evaluate_form(c, functional_form(FunctionalKind(FunctionalTag::PTilde, lambda), c.radius()));
}

Real eval_functional(const CandidateFunction& c, const FunctionalKind& kind, const SeriesTruncation& trunc,
                     Normalization n) {
  return evaluate_form(c, functional_form(kind, c.radius(), trunc), n);
}

Real last_positive_crossing(const CandidateFunction& c, FunctionalTag which, const CrossingOptions& opts) {
  if (!is_threshold_kind(which)) throw std::invalid_argument("crossing needs P or PTilde");
  if (!(opts.tol > 0)) throw std::invalid_argument("tolerance must be positive");
  if (!(opts.grid_ratio > 1)) throw std::invalid_argument("grid ratio must exceed 1");
  auto p = [&](const Real& lambda) { return which == FunctionalTag::P ? eval_p(c, lambda) : eval_p_tilde(c, lambda); };
  // p -> -1 as lambda -> 0, so 0 is a valid nonpositive end.
  Real lo = 0;
  Real hi = opts.lambda_min;
  bool found = false;
  while (hi <= opts.lambda_max) {
    if (p(hi) > 0) {
      found = true;
      break;
    }
    lo = hi;
    hi *= opts.grid_ratio;
  }
  if (!found) throw std::runtime_error("no crossing");
  while (hi - lo > opts.tol) {
    const Real mid = (lo + hi) / 2;
    if (p(mid) > 0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

BaselineRow baseline_values(Baseline b, const SeriesTruncation& trunc, const CrossingOptions& opts) {
  const auto c = CandidateFunction::baseline(b);
  BaselineRow row{b, eval_Z(c), eval_ZTilde(c), eval_L(c), eval_Z1(c, trunc), Real(), Real()};
  row.P = last_positive_crossing(c, FunctionalTag::P, opts);
  row.PTilde = last_positive_crossing(c, FunctionalTag::PTilde, opts);
  return row;
}

}  // namespace zetasdp
