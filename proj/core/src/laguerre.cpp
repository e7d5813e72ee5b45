#include "zetasdp/laguerre.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace zetasdp {

namespace {

const mpq_class kAlpha(-1, 2);

}  // namespace

LaguerreTable::LaguerreTable(int max_degree) : max_degree_(max_degree) {
  if (max_degree < 0) throw std::invalid_argument("negative Laguerre degree");
  const auto n_total = static_cast<std::size_t>(max_degree) + 1;
  monomial_.reserve(n_total);
  monomial_.push_back(RationalPoly{1});
  if (max_degree >= 1) monomial_.push_back(RationalPoly{1 + kAlpha, -1});
  // (n+1) L_{n+1} = (2n+1+alpha - t) L_n - (n+alpha) L_{n-1}
  for (int n = 1; n < max_degree; ++n) {
    const auto& ln = monomial_[static_cast<std::size_t>(n)];
    const auto& lm = monomial_[static_cast<std::size_t>(n - 1)];
    RationalPoly next(static_cast<std::size_t>(n) + 2);
    const mpq_class a = 2 * n + 1 + kAlpha;
    const mpq_class b = n + kAlpha;
    for (std::size_t k = 0; k < ln.size(); ++k) {
      next[k] += a * ln[k];
      next[k + 1] -= ln[k];
    }
    for (std::size_t k = 0; k < lm.size(); ++k) next[k] -= b * lm[k];
    for (auto& c : next) c /= n + 1;
    monomial_.push_back(std::move(next));
  }
  // t^k = sum_n b_kn L_n by back substitution against the triangular table.
  power_.reserve(n_total);
  for (std::size_t k = 0; k < n_total; ++k) {
    RationalPoly rest(k + 1);
    rest[k] = 1;
    RationalPoly coeffs(k + 1);
    for (std::size_t n = k + 1; n-- > 0;) {
      if (rest[n] == 0) continue;
      coeffs[n] = rest[n] / monomial_[n][n];
      for (std::size_t j = 0; j <= n; ++j) rest[j] -= coeffs[n] * monomial_[n][j];
    }
    power_.push_back(std::move(coeffs));
  }
  at_zero_.reserve(n_total);
  for (const auto& p : monomial_) at_zero_.push_back(p[0]);
}

RationalPoly LaguerreTable::to_laguerre(const RationalPoly& mono) const {
  if (mono.size() > static_cast<std::size_t>(max_degree_) + 1) throw std::out_of_range("polynomial exceeds Laguerre table");
  RationalPoly out(mono.size());
  for (std::size_t k = 0; k < mono.size(); ++k) {
    if (mono[k] == 0) continue;
    const auto& pk = power_[k];
    for (std::size_t n = 0; n < pk.size(); ++n) out[n] += mono[k] * pk[n];
  }
  return out;
}

RationalPoly LaguerreTable::to_monomial(const RationalPoly& lag) const {
  if (lag.size() > static_cast<std::size_t>(max_degree_) + 1) throw std::out_of_range("polynomial exceeds Laguerre table");
  RationalPoly out(lag.size());
  for (std::size_t n = 0; n < lag.size(); ++n) {
    if (lag[n] == 0) continue;
    const auto& ln = monomial_[n];
    for (std::size_t k = 0; k < ln.size(); ++k) out[k] += lag[n] * ln[k];
  }
  return out;
}

std::shared_ptr<const LaguerreTable> laguerre_table(int max_degree) {
  static std::mutex mutex;
  static std::shared_ptr<const LaguerreTable> cached;
  std::lock_guard lock(mutex);
  if (!cached || cached->max_degree() < max_degree) {
    // Grow geometrically so repeated small increases stay cheap.
    const int target = cached ? std::max(max_degree, 2 * cached->max_degree()) : std::max(max_degree, 16);
    cached = std::make_shared<const LaguerreTable>(target);
  }
  return cached;
}

RationalPoly laguerre_times_t(const RationalPoly& c) {
  // t L_k = -(k+1) L_{k+1} + (2k+1+alpha) L_k - (k+alpha) L_{k-1}
  RationalPoly out(c.size() + 1);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] == 0) continue;
    const long kk = static_cast<long>(k);
    out[k + 1] -= (kk + 1) * c[k];
    out[k] += (2 * kk + 1 + kAlpha) * c[k];
    if (k > 0) out[k - 1] -= (kk + kAlpha) * c[k];
  }
  return out;
}

RationalPoly poly_multiply(const RationalPoly& a, const RationalPoly& b) {
  if (a.empty() || b.empty()) return {};
  RationalPoly out(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) continue;
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Vector laguerre_values(int n, const Real& t) {
  if (n < 0) throw std::invalid_argument("negative Laguerre degree");
  Vector v(static_cast<std::size_t>(n) + 1);
  v[0] = 1;
  if (n >= 1) v[1] = Real(1) / 2 - t;
  for (int k = 1; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    v[kk + 1] = ((Real(2 * k) + Real(1) / 2 - t) * v[kk] - (Real(k) - Real(1) / 2) * v[kk - 1]) / (k + 1);
  }
  return v;
}

}  // namespace zetasdp
