#include "zetasdp/rigor.hpp"

#include "zetasdp/functionals.hpp"
#include "zetasdp/laguerre.hpp"
#include "zetasdp/sosmodel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <map>
#include <ostream>
#include <stdexcept>

namespace zetasdp {

namespace {

using Rnd = mpfr_rnd_t;

Real rounded(const Real& x, Rnd rnd) {
  Real out;
  mpfr_set(raw(out), raw(x), rnd);
  return out;
}

template <class Op>
Real apply(Op op, const Real& a, const Real& b, Rnd rnd) {
  Real out;
  op(raw(out), raw(a), raw(b), rnd);
  return out;
}

Real mul(const Real& a, const Real& b, Rnd rnd) { return apply(mpfr_mul, a, b, rnd); }
Real div(const Real& a, const Real& b, Rnd rnd) { return apply(mpfr_div, a, b, rnd); }

}  // namespace

Interval::Interval() : precision_(working_precision_bits()) {}

Interval::Interval(int v) : Interval() {
  mpfr_set_si(raw(lo_), v, MPFR_RNDD);
  mpfr_set_si(raw(hi_), v, MPFR_RNDU);
}

Interval::Interval(const Real& point) : Interval() {
  lo_ = rounded(point, MPFR_RNDD);
  hi_ = rounded(point, MPFR_RNDU);
}

Interval::Interval(const mpq_class& q) : Interval() {
  mpfr_set_q(raw(lo_), q.get_mpq_t(), MPFR_RNDD);
  mpfr_set_q(raw(hi_), q.get_mpq_t(), MPFR_RNDU);
}

Interval::Interval(const Real& lo, const Real& hi) : Interval() {
  if (lo > hi) throw std::invalid_argument("interval with lo > hi");
  lo_ = rounded(lo, MPFR_RNDD);
  hi_ = rounded(hi, MPFR_RNDU);
}

Interval Interval::pi() {
  Interval out;
  mpfr_const_pi(raw(out.lo_), MPFR_RNDD);
  mpfr_const_pi(raw(out.hi_), MPFR_RNDU);
  return out;
}

Interval Interval::hull(const Interval& a, const Interval& b) {
  return Interval(std::min(a.lo_, b.lo_), std::max(a.hi_, b.hi_));
}

Real Interval::width() const { return apply(mpfr_sub, hi_, lo_, MPFR_RNDU); }

Real Interval::mid() const { return (lo_ + hi_) / 2; }

Real Interval::mag() const { return std::max(boost::multiprecision::abs(lo_), boost::multiprecision::abs(hi_)); }

bool Interval::contains(const Real& x) const { return lo_ <= x && x <= hi_; }

bool Interval::contains(const mpq_class& q) const {
  return mpfr_cmp_q(raw(lo_), q.get_mpq_t()) <= 0 && mpfr_cmp_q(raw(hi_), q.get_mpq_t()) >= 0;
}

bool Interval::contains(const Interval& o) const { return lo_ <= o.lo_ && o.hi_ <= hi_; }

Interval Interval::operator-() const {
  Interval out;
  mpfr_neg(raw(out.lo_), raw(hi_), MPFR_RNDD);
  mpfr_neg(raw(out.hi_), raw(lo_), MPFR_RNDU);
  return out;
}

Interval& Interval::operator+=(const Interval& o) {
  mpfr_add(raw(lo_), raw(lo_), raw(o.lo_), MPFR_RNDD);
  mpfr_add(raw(hi_), raw(hi_), raw(o.hi_), MPFR_RNDU);
  return *this;
}

Interval& Interval::operator-=(const Interval& o) {
  Real lo = apply(mpfr_sub, lo_, o.hi_, MPFR_RNDD);
  Real hi = apply(mpfr_sub, hi_, o.lo_, MPFR_RNDU);
  lo_ = std::move(lo);
  hi_ = std::move(hi);
  return *this;
}

Interval& Interval::operator*=(const Interval& o) {
  const Real* a[2] = {&lo_, &hi_};
  const Real* b[2] = {&o.lo_, &o.hi_};
  Real lo = mul(*a[0], *b[0], MPFR_RNDD), hi = mul(*a[0], *b[0], MPFR_RNDU);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      lo = std::min(lo, mul(*a[i], *b[j], MPFR_RNDD));
      hi = std::max(hi, mul(*a[i], *b[j], MPFR_RNDU));
    }
  }
  lo_ = std::move(lo);
  hi_ = std::move(hi);
  return *this;
}

Interval& Interval::operator/=(const Interval& o) {
  if (o.contains_zero()) throw std::domain_error("interval division by an interval containing zero");
  const Real* a[2] = {&lo_, &hi_};
  const Real* b[2] = {&o.lo_, &o.hi_};
  Real lo = div(*a[0], *b[0], MPFR_RNDD), hi = div(*a[0], *b[0], MPFR_RNDU);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      lo = std::min(lo, div(*a[i], *b[j], MPFR_RNDD));
      hi = std::max(hi, div(*a[i], *b[j], MPFR_RNDU));
    }
  }
  lo_ = std::move(lo);
  hi_ = std::move(hi);
  return *this;
}

Interval sqr(const Interval& x) {
  const Interval a = abs(x);
  return Interval(mul(a.lo(), a.lo(), MPFR_RNDD), mul(a.hi(), a.hi(), MPFR_RNDU));
}

Interval sqrt(const Interval& x) {
  if (x.lo() < 0) throw std::domain_error("interval square root of a negative value");
  Real lo, hi;
  mpfr_sqrt(raw(lo), raw(x.lo()), MPFR_RNDD);
  mpfr_sqrt(raw(hi), raw(x.hi()), MPFR_RNDU);
  return Interval(lo, hi);
}

Interval exp(const Interval& x) {
  Real lo, hi;
  mpfr_exp(raw(lo), raw(x.lo()), MPFR_RNDD);
  mpfr_exp(raw(hi), raw(x.hi()), MPFR_RNDU);
  return Interval(lo, hi);
}

Interval pow(const Interval& x, int n) {
  if (n < 0) return Interval(1) / pow(x, -n);
  Interval result(1), base = x;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      result = first ? base : result * base;
      first = false;
    }
    n >>= 1;
    if (n > 0) base = sqr(base);
  }
  return result;
}

Interval abs(const Interval& x) {
  if (x.lo() >= 0) return x;
  if (x.hi() <= 0) return -x;
  return Interval(Real(0), x.mag());
}

std::string format_interval(const Interval& x, int digits) {
  auto fmt = [&](const Real& v, const char* spec) {
    char* buf = nullptr;
    mpfr_asprintf(&buf, spec, digits - 1, raw(v));
    std::string s(buf);
    mpfr_free_str(buf);
    return s;
  };
  return "[" + fmt(x.lo(), "%.*RDe") + ", " + fmt(x.hi(), "%.*RUe") + "]";
}

std::ostream& operator<<(std::ostream& out, const Interval& x) { return out << format_interval(x); }

IntervalMatrix to_interval_matrix(const Matrix& m) {
  IntervalMatrix out(m.rows(), std::vector<Interval>(m.cols()));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out[i][j] = Interval(m(i, j));
  return out;
}

namespace {

// Cholesky of M - sI; true if every pivot is provably positive.
bool validated_cholesky(const IntervalMatrix& m, const Real& shift) {
  const std::size_t n = m.size();
  const Interval s(shift);
  IntervalMatrix L(n, std::vector<Interval>(n));
  for (std::size_t j = 0; j < n; ++j) {
    Interval pivot = m[j][j] - s;
    for (std::size_t k = 0; k < j; ++k) pivot -= sqr(L[j][k]);
    if (!pivot.positive()) return false;
    L[j][j] = sqrt(pivot);
    for (std::size_t i = j + 1; i < n; ++i) {
      Interval v = m[i][j];
      for (std::size_t k = 0; k < j; ++k) v -= L[i][k] * L[j][k];
      L[i][j] = v / L[j][j];
    }
  }
  return true;
}

}  // namespace

DefinitenessResult check_positive_definite(const IntervalMatrix& m, int bisection_steps) {
  const std::size_t n = m.size();
  for (const auto& row : m) {
    if (row.size() != n) throw std::invalid_argument("matrix is not square");
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (m[i][j].lo() != m[j][i].lo() || m[i][j].hi() != m[j][i].hi()) {
        throw std::invalid_argument("matrix is not symmetric");
      }
    }
  }
  DefinitenessResult out;
  if (n == 0 || !validated_cholesky(m, Real(0))) return out;
  out.positive_definite = true;

  // The smallest diagonal entry bounds the smallest eigenvalue from above. A
  // floating-point estimate narrows the bracket so the bisection resolves
  // eigenvalues far below the diagonal.
  Real diag_min = m[0][0].hi();
  Matrix mid(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    diag_min = std::min(diag_min, m[i][i].hi());
    for (std::size_t j = 0; j < n; ++j) mid(i, j) = m[i][j].mid();
  }
  Real hi = diag_min;
  const Real estimate = min_eigenvalue(symmetrize(mid), Real("1e-30"));
  if (estimate > 0 && estimate < hi) hi = std::min(hi, estimate * Real("1.001"));
  Real lo = 0;
  for (int step = 0; step < bisection_steps; ++step) {
    const Real s = (lo + hi) / 2;
    if (validated_cholesky(m, s)) {
      lo = s;
    } else {
      hi = s;
    }
  }
  out.min_eigenvalue = Interval(lo, std::max(lo, diag_min));
  return out;
}

DefinitenessResult check_positive_definite(const Matrix& m, int bisection_steps) {
  return check_positive_definite(to_interval_matrix(m), bisection_steps);
}

namespace {

// Laguerre coefficients of sum_ij X_ij e_ij, where e_ij is a row of the
// product table, with weight 2 off the diagonal.
std::vector<Interval> gram_combination(const Matrix& X, int d, bool t_side) {
  const auto table = product_table(d);
  const auto len = static_cast<std::size_t>(2 * d + 2);
  std::vector<Interval> out(len);
  for (int i = 0; i <= d; ++i) {
    for (int j = i; j <= d; ++j) {
      const auto& row = t_side ? table->t_product(i, j) : table->product(i, j);
      Interval x(X(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      if (i != j) x = x * Interval(2);
      for (std::size_t k = 0; k < len; ++k) {
        if (row[k] != 0) out[k] += x * Interval(row[k]);
      }
    }
  }
  return out;
}

// Laguerre coefficients of the f-polynomial (R^2 - y) s2(y).
std::vector<Interval> f_laguerre(const SosCertificate& cert) {
  const Interval two_pi = Interval::pi() * Interval(2);
  const Interval R2 = sqr(Interval(cert.R));
  auto c = gram_combination(cert.X2, cert.d, false);
  const auto t = gram_combination(cert.X2, cert.d, true);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = R2 * c[k] - t[k] / two_pi;
  return c;
}

std::vector<Interval> apply_fourier(std::vector<Interval> c) {
  for (std::size_t k = 1; k < c.size(); k += 2) c[k] = -c[k];
  return c;
}

// Coefficients in powers of y of sum_k c_k L_k(2 pi y).
std::vector<Interval> laguerre_to_y_powers(const std::vector<Interval>& c) {
  const auto table = laguerre_table(static_cast<int>(c.size()) - 1);
  std::vector<Interval> out(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto& mono = table->monomial(static_cast<int>(k));
    for (std::size_t j = 0; j < mono.size() && j < out.size(); ++j) {
      if (mono[j] != 0) out[j] += c[k] * Interval(mono[j]);
    }
  }
  Interval scale(1);
  const Interval two_pi = Interval::pi() * Interval(2);
  for (auto& x : out) {
    x = x * scale;
    scale = scale * two_pi;
  }
  return out;
}

Interval value_at_zero(const std::vector<Interval>& c) {
  const auto table = laguerre_table(static_cast<int>(c.size()) - 1);
  Interval out;
  for (std::size_t k = 0; k < c.size(); ++k) out += c[k] * Interval(table->value_at_zero(static_cast<int>(k)));
  return out;
}

}  // namespace

std::vector<Interval> residual_coefficients(const SosCertificate& cert) {
  cert.validate();
  const int d = cert.d;
  const auto len = static_cast<std::size_t>(2 * d + 2);
  const auto table = product_table(d);
  const Interval two_pi = Interval::pi() * Interval(2);

  auto r = apply_fourier(f_laguerre(cert));
  const auto s3 = gram_combination(cert.X3, d, false);
  const auto s4 = gram_combination(cert.X4, d, true);
  for (std::size_t k = 0; k < len; ++k) r[k] = r[k] - s3[k] - s4[k] / two_pi;

  // Family element of Laguerre degree k.
  auto element = [&](std::size_t k) {
    std::vector<Interval> e(len);
    const int i = static_cast<int>(k / 2);
    if (k == len - 1) {
      const auto& row = table->t_product(d, d);
      for (std::size_t j = 0; j < len; ++j) e[j] = Interval(row[j]) / two_pi;
    } else {
      const auto& row = k % 2 == 0 ? table->product(i, i) : table->product(i, i + 1);
      for (std::size_t j = 0; j < len; ++j) e[j] = Interval(row[j]);
    }
    return e;
  };

  std::vector<Interval> coeffs(len);
  for (std::size_t k = len; k-- > 0;) {
    const auto e = element(k);
    if (e[k].contains_zero()) throw std::runtime_error("residual not representable; increase precision");
    coeffs[k] = r[k] / e[k];
    for (std::size_t j = 0; j <= k; ++j) r[j] -= coeffs[k] * e[j];
  }
  return coeffs;
}

Interval gaussian_moment(int m, const Interval& a) {
  if (m < 0) throw std::invalid_argument("negative moment order");
  if (a.lo() < 0) throw std::invalid_argument("moment endpoint must be nonnegative");
  if (a.hi() == 0) return Interval(0);
  const Interval a2 = sqr(a);
  const Interval growth = Interval::pi() * Interval(2) * a2;
  Interval term = pow(a, m + 1) / Interval(m + 1);
  Interval sum = term;
  // 2^-(precision + 8) relative to the partial sum
  Real negligible;
  mpfr_set_ui_2exp(raw(negligible), 1, -static_cast<long>(working_precision_bits()) - 8, MPFR_RNDD);
  for (int k = 0; k < 100000; ++k) {
    const Interval ratio = growth / Interval(m + 2 * k + 3);
    term = term * ratio;
    sum += term;
    // Later ratios are smaller, so the rest is below term * q / (1 - q).
    if (ratio.hi() <= Real("0.5") && term.hi() <= sum.lo() * negligible) {
      const Interval q(Real(0), ratio.hi());
      const Interval tail = term * q / (Interval(1) - q);
      sum += Interval(Real(0), tail.hi());
      return exp(-(Interval::pi() * a2)) * sum;
    }
  }
  throw std::runtime_error("moment series did not converge");
}

ZeroValues rigorous_zero_values(const SosCertificate& cert) {
  cert.validate();
  const auto c = f_laguerre(cert);
  return {value_at_zero(c), value_at_zero(apply_fourier(c))};
}

Interval rigorous_functional(const SosCertificate& cert, const SeriesTruncation& trunc) {
  cert.validate();
  const FunctionalTag tag = cert.kind.tag();
  const Interval R(cert.R);
  const Interval lambda = cert.lambda ? Interval(*cert.lambda) : Interval(1);
  const LinearForm<Interval> form =
      functional_form<Interval>(tag, R, lambda, Interval(trunc.tail_bound), trunc.K);

  const auto c = f_laguerre(cert);
  const auto fhat_c = apply_fourier(c);
  const auto g = laguerre_to_y_powers(form.on_fourier_side ? fhat_c : c);

  // Moments cached per distinct endpoint.
  std::vector<std::pair<Interval, std::map<int, Interval>>> cache;
  auto F = [&](int m, const Interval& a) -> const Interval& {
    auto it = std::find_if(cache.begin(), cache.end(), [&](const auto& e) {
      return e.first.lo() == a.lo() && e.first.hi() == a.hi();
    });
    if (it == cache.end()) {
      cache.emplace_back(a, std::map<int, Interval>{});
      it = std::prev(cache.end());
    }
    auto slot = it->second.find(m);
    if (slot == it->second.end()) slot = it->second.emplace(m, gaussian_moment(m, a)).first;
    return slot->second;
  };

  Interval total = form.at_zero * g[0];
  for (const auto& t : form.terms) {
    if (!t.hi) throw std::invalid_argument("unbounded moment range");
    Interval integral;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const int m = static_cast<int>(2 * j) + t.power;
      Interval piece = F(m, *t.hi);
      if (t.lo.hi() > 0) piece -= F(m, t.lo);
      integral += g[j] * piece;
    }
    total += t.coeff * integral;
  }
  if (form.normalize) {
    const Interval fhat0 = value_at_zero(fhat_c);
    if (fhat0.contains_zero()) throw std::domain_error("normalization degenerate");
    total = total / fhat0;
  }
  return total + form.constant;
}

bool VerificationReport::verified() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const NamedCheck& c) { return c.passed; });
}

VerificationReport verify(const SosCertificate& cert, const VerifyOptions& opts) {
  cert.validate();
  std::optional<ScopedPrecision> precision;
  if (opts.precision_bits != 0) precision.emplace(opts.precision_bits);
  VerificationReport rep;
  rep.kind = cert.kind.tag();
  rep.d = cert.d;
  rep.precision_bits = working_precision_bits();
  auto add = [&](std::string name, bool passed, std::string detail = {}) {
    rep.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  const auto pd2 = check_positive_definite(cert.X2, opts.bisection_steps);
  const auto pd3 = check_positive_definite(cert.X3, opts.bisection_steps);
  const auto pd4 = check_positive_definite(cert.X4, opts.bisection_steps);
  rep.pd_X2 = pd2.positive_definite;
  rep.pd_X3 = pd3.positive_definite;
  rep.pd_X4 = pd4.positive_definite;
  auto eig = [](const DefinitenessResult& r) {
    return r.min_eigenvalue ? "min eigenvalue >= " + format_interval(*r.min_eigenvalue, 6) : std::string("not positive definite");
  };
  add("X2 positive definite", rep.pd_X2, eig(pd2));
  add("X3 positive definite", rep.pd_X3, eig(pd3));
  add("X4 positive definite", rep.pd_X4, eig(pd4));
  if (pd3.min_eigenvalue && pd4.min_eigenvalue) {
    rep.b = Interval(std::min(pd3.min_eigenvalue->lo(), pd4.min_eigenvalue->lo()),
                     std::min(pd3.min_eigenvalue->hi(), pd4.min_eigenvalue->hi()));
  }

  try {
    const auto coeffs = residual_coefficients(cert);
    Real lo = 0, hi = 0;
    for (const auto& c : coeffs) {
      const Interval a = abs(c);
      lo = std::max(lo, a.lo());
      hi = std::max(hi, a.hi());
    }
    rep.B = Interval(lo, hi);
    const Interval threshold = Interval(1 + 2 * cert.d) * Interval(rep.B.hi());
    rep.test_passed = rep.pd_X3 && rep.pd_X4 && rep.b && rep.b->lo() >= threshold.hi();
    add("residual absorbed (b >= (1+2d)B)", rep.test_passed,
        "b = " + (rep.b ? format_interval(*rep.b, 6) : std::string("none")) + ", B = " + format_interval(rep.B, 6));
  } catch (const std::exception& e) {
    add("residual absorbed (b >= (1+2d)B)", false, e.what());
  }

  try {
    rep.functional_bound = rigorous_functional(cert, opts.trunc);
    if (is_threshold_kind(rep.kind)) {
      const auto zero = rigorous_zero_values(cert);
      add("f(0) <= 1", zero.f0.hi() <= 1, format_interval(zero.f0, 20));
      add("fhat(0) >= 1", zero.fhat0.lo() >= 1, format_interval(zero.fhat0, 20));
      add("p(lambda) > 0", rep.functional_bound->positive(), format_interval(*rep.functional_bound, 20));
    } else {
      add("functional enclosed", true, format_interval(*rep.functional_bound, 20));
    }
  } catch (const std::exception& e) {
    add("functional enclosed", false, e.what());
  }
  return rep;
}

std::string verdict_json(const VerificationReport& report) {
  using nlohmann::ordered_json;
  auto iv = [](const std::optional<Interval>& x) -> ordered_json {
    if (!x) return nullptr;
    return format_interval(*x, 40);
  };
  ordered_json j;
  j["kind"] = to_string(report.kind);
  j["d"] = report.d;
  j["precision_bits"] = report.precision_bits;
  j["pd_ok"] = {{"X2", report.pd_X2}, {"X3", report.pd_X3}, {"X4", report.pd_X4}};
  j["b"] = iv(report.b);
  j["B"] = format_interval(report.B, 40);
  j["test_passed"] = report.test_passed;
  j["functional_bound"] = iv(report.functional_bound);
  ordered_json checks = ordered_json::array();
  for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  j["checks"] = std::move(checks);
  j["verified"] = report.verified();
  return j.dump(2);
}

}  // namespace zetasdp
