#include "zetasdp/sosmodel.hpp"

#include <map>
#include <mutex>
#include <stdexcept>

namespace zetasdp {

namespace {

void check(const SosParameterization& p) {
  if (p.d < 1) throw std::invalid_argument("degree d must be at least 1");
  if (!(p.R > 0)) throw std::invalid_argument("radius must be positive");
}

std::size_t dim(const SosParameterization& p) { return static_cast<std::size_t>(p.d) + 1; }

// Block positions within the gram block list.
struct Layout {
  std::optional<std::size_t> x1;
  std::size_t x2, x3, x4, count;
};

Layout layout(const SosParameterization& p) {
  if (p.drop_X1) return {std::nullopt, 0, 1, 2, 3};
  return {0, 1, 2, 3, 4};
}

// Fills a symmetric (d+1)x(d+1) matrix from a function of (i, j), i <= j.
template <class F>
Matrix symmetric_from(std::size_t n, F&& entry) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      m(i, j) = entry(static_cast<int>(i), static_cast<int>(j));
      if (i != j) m(j, i) = m(i, j);
    }
  }
  return m;
}

Vector laguerre_at_zero(int d) {
  const auto table = laguerre_table(d);
  Vector v;
  for (int n = 0; n <= d; ++n) v.push_back(from_rational(table->value_at_zero(n)));
  return v;
}

ConstraintRow empty_row(std::size_t blocks) {
  ConstraintRow r;
  r.coeffs.resize(blocks);
  return r;
}

// Per-power integrals of a form: w[k] = sum_t coeff_t int_t x^(2k + power_t) e^{-pi x^2}.
Vector form_weights(const LinearForm<Real>& form, int kmax) {
  int max_power = 0;
  for (const auto& t : form.terms) max_power = std::max(max_power, t.power);
  const int top = 2 * kmax + max_power;
  std::vector<std::pair<Real, MomentTable>> tables;
  const MomentTable infinity = MomentTable::at_infinity(top);
  auto table_at = [&](const std::optional<Real>& a) -> const MomentTable& {
    if (!a) return infinity;
    for (const auto& [x, t] : tables) {
      if (x == *a) return t;
    }
    tables.emplace_back(*a, MomentTable(*a, top));
    return tables.back().second;
  };
  // Materialise every table first so later references stay valid.
  tables.reserve(2 * form.terms.size());
  for (const auto& t : form.terms) {
    table_at(t.lo);
    table_at(t.hi);
  }
  Vector w(static_cast<std::size_t>(kmax) + 1);
  for (const auto& t : form.terms) {
    if (t.lo < 0) throw std::invalid_argument("form terms must start at lo >= 0");
    const MomentTable& lo = table_at(t.lo);
    for (int k = 0; k <= kmax; ++k) {
      const int m = 2 * k + t.power;
      Real integral = lo.at(m);
      if (t.hi) integral -= table_at(t.hi).at(m);
      w[static_cast<std::size_t>(k)] += t.coeff * integral;
    }
  }
  return w;
}

// L_i L_j as a polynomial in y = t / (2 pi), coefficients of y^k.
Vector product_in_y(const ProductTable& table, int i, int j, const Vector& two_pi_pow) {
  const auto& r = table.product_monomial(i, j);
  Vector out(r.size());
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (r[k] != 0) out[k] = from_rational(r[k]) * two_pi_pow[k];
  }
  return out;
}

Vector powers_of_two_pi(std::size_t count) {
  Vector v(count);
  const Real two_pi = 2 * pi();
  Real acc = 1;
  for (auto& x : v) {
    x = acc;
    acc *= two_pi;
  }
  return v;
}

}  // namespace

std::vector<BlockSpec> SosParameterization::gram_blocks() const {
  const auto n = static_cast<std::size_t>(d) + 1;
  std::vector<BlockSpec> out;
  if (!drop_X1) out.push_back({"X1", n});
  out.push_back({"X2", n});
  out.push_back({"X3", n});
  out.push_back({"X4", n});
  return out;
}

ProductTable::ProductTable(int d) : d_(d) {
  if (d < 0) throw std::invalid_argument("negative degree");
  const auto table = laguerre_table(2 * d + 1);
  const auto len = static_cast<std::size_t>(2 * d + 2);
  for (int i = 0; i <= d; ++i) {
    for (int j = i; j <= d; ++j) {
      RationalPoly mono = poly_multiply(table->monomial(i), table->monomial(j));
      RationalPoly lag = table->to_laguerre(mono);
      RationalPoly tlag = laguerre_times_t(lag);
      mono.resize(len - 1);
      lag.resize(len);
      tlag.resize(len);
      monomial_.push_back(std::move(mono));
      product_.push_back(std::move(lag));
      t_product_.push_back(std::move(tlag));
    }
  }
}

std::size_t ProductTable::index(int i, int j) const {
  if (i > j) std::swap(i, j);
  if (i < 0 || j > d_) throw std::out_of_range("product index out of range");
  // Row-major upper triangle.
  const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j), n = static_cast<std::size_t>(d_) + 1;
  return ii * n - ii * (ii - 1) / 2 + (jj - ii);
}

const RationalPoly& ProductTable::product(int i, int j) const { return product_[index(i, j)]; }
const RationalPoly& ProductTable::t_product(int i, int j) const { return t_product_[index(i, j)]; }
const RationalPoly& ProductTable::product_monomial(int i, int j) const { return monomial_[index(i, j)]; }

std::shared_ptr<const ProductTable> product_table(int d) {
  static std::mutex mutex;
  static std::map<int, std::shared_ptr<const ProductTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[d];
  if (!slot) slot = std::make_shared<const ProductTable>(d);
  return slot;
}

LinearConstraintSet build_identity_constraints(const SosParameterization& p) {
  check(p);
  const auto table = product_table(p.d);
  const auto lay = layout(p);
  const auto n = dim(p);
  const Real R2 = p.R * p.R;
  const Real inv_two_pi = 1 / (2 * pi());
  LinearConstraintSet out;
  for (int k = 0; k <= 2 * p.d + 1; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int sign = (k % 2 == 0) ? 1 : -1;
    ConstraintRow row = empty_row(lay.count);
    auto prod = [&](int i, int j) { return from_rational(table->product(i, j)[kk]); };
    auto tprod = [&](int i, int j) { return from_rational(table->t_product(i, j)[kk]) * inv_two_pi; };
    row.coeffs[lay.x2] = symmetric_from(n, [&](int i, int j) { return Real(sign * (R2 * prod(i, j) - tprod(i, j))); });
    if (lay.x1) row.coeffs[*lay.x1] = symmetric_from(n, [&](int i, int j) { return Real(-sign * prod(i, j)); });
    row.coeffs[lay.x3] = symmetric_from(n, [&](int i, int j) { return Real(-prod(i, j)); });
    row.coeffs[lay.x4] = symmetric_from(n, [&](int i, int j) { return Real(-tprod(i, j)); });
    Real scale;
    for (const auto& c : row.coeffs) {
      if (!c.empty()) scale = std::max(scale, max_abs(c));
    }
    if (scale > 0) {
      for (auto& c : row.coeffs) {
        if (!c.empty()) c *= 1 / scale;
      }
    }
    row.rhs = 0;
    row.label = "identity L" + std::to_string(k);
    out.rows.push_back(std::move(row));
  }
  return out;
}

NormalizationTargets threshold_targets(const Real& eps) { return {1 - eps, 1 + eps}; }

LinearConstraintSet build_normalization_constraints(const SosParameterization& p, const FunctionalKind& kind,
                                                    const NormalizationTargets& targets) {
  check(p);
  (void)kind;
  const auto lay = layout(p);
  const Vector v0 = laguerre_at_zero(p.d);
  const Matrix v0v0 = outer(v0);
  LinearConstraintSet out;

  ConstraintRow f0 = empty_row(lay.count);
  f0.coeffs[lay.x2] = v0v0 * (p.R * p.R);
  if (lay.x1) f0.coeffs[*lay.x1] = v0v0 * Real(-1);
  f0.rhs = targets.f0;
  f0.label = "f(0)";
  out.rows.push_back(std::move(f0));

  ConstraintRow fhat0 = empty_row(lay.count);
  fhat0.coeffs[lay.x3] = v0v0;
  fhat0.rhs = targets.fhat0;
  fhat0.label = "fhat(0)";
  out.rows.push_back(std::move(fhat0));

  if (lay.x1) {
    ConstraintRow root = empty_row(lay.count);
    root.coeffs[*lay.x1] = outer(laguerre_values(p.d, 2 * pi() * p.R * p.R));
    root.rhs = 0;
    root.label = "f(R)";
    out.rows.push_back(std::move(root));
  }
  return out;
}

LinearConstraintSet build_normalization_constraints(const SosParameterization& p, const FunctionalKind& kind) {
  return build_normalization_constraints(p, kind, is_threshold_kind(kind.tag()) ? threshold_targets() : NormalizationTargets{});
}

ObjectiveData build_objective(const SosParameterization& p, const FunctionalKind& kind, const SeriesTruncation& trunc) {
  check(p);
  if (is_threshold_kind(kind.tag())) throw std::invalid_argument("feasibility kind");
  const auto table = product_table(p.d);
  const auto lay = layout(p);
  const auto n = dim(p);
  const LinearForm<Real> form = functional_form(kind, p.R, trunc);
  const Vector w = form_weights(form, 2 * p.d + 1);
  const Vector tp = powers_of_two_pi(static_cast<std::size_t>(2 * p.d + 1));
  const Real R2 = p.R * p.R;

  ObjectiveData out;
  out.costs.resize(lay.count);
  Matrix c2(n, n), c1(n, n);
  for (int i = 0; i <= p.d; ++i) {
    for (int j = i; j <= p.d; ++j) {
      const Vector r = product_in_y(*table, i, j, tp);
      // (R^2 - y) r(y): sum_k r_k (R^2 w_k - w_{k+1}); plain r(y): sum_k r_k w_k.
      Real shifted, plain;
      for (std::size_t k = 0; k < r.size(); ++k) {
        shifted += r[k] * (R2 * w[k] - w[k + 1]);
        plain += r[k] * w[k];
      }
      shifted += form.at_zero * R2 * r[0];
      plain += form.at_zero * r[0];
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      c2(ii, jj) = c2(jj, ii) = shifted;
      c1(ii, jj) = c1(jj, ii) = -plain;
    }
  }
  out.costs[lay.x2] = std::move(c2);
  if (lay.x1) out.costs[*lay.x1] = std::move(c1);
  out.offset = form.constant;
  return out;
}

ObjectiveData build_threshold_functional(const SosParameterization& p, const FunctionalKind& kind) {
  check(p);
  if (!is_threshold_kind(kind.tag())) throw std::invalid_argument("threshold functional needs P or PTilde");
  const auto table = product_table(p.d);
  const auto lay = layout(p);
  const auto n = dim(p);
  const LinearForm<Real> form = functional_form(kind, p.R);
  const Vector w = form_weights(form, 2 * p.d + 1);
  const Vector tp = powers_of_two_pi(static_cast<std::size_t>(2 * p.d + 1));

  ObjectiveData out;
  out.costs.resize(lay.count);
  Matrix c3(n, n), c4(n, n);
  for (int i = 0; i <= p.d; ++i) {
    for (int j = i; j <= p.d; ++j) {
      const Vector r = product_in_y(*table, i, j, tp);
      Real a3, a4;
      for (std::size_t k = 0; k < r.size(); ++k) {
        a3 += r[k] * w[k];
        a4 += r[k] * w[k + 1];
      }
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      c3(ii, jj) = c3(jj, ii) = a3;
      c4(ii, jj) = c4(jj, ii) = a4;
    }
  }
  out.costs[lay.x3] = std::move(c3);
  out.costs[lay.x4] = std::move(c4);
  out.offset = form.constant;
  return out;
}

LinearConstraintSet build_feasibility_row(const SosParameterization& p, const FunctionalKind& kind, const Real& margin) {
  const ObjectiveData thr = build_threshold_functional(p, kind);
  ConstraintRow row;
  row.coeffs = thr.costs;
  row.coeffs.push_back(Matrix::identity(1, Real(-1)));
  row.rhs = margin - thr.offset;
  row.label = "p(lambda) >= margin";
  LinearConstraintSet out;
  out.rows.push_back(std::move(row));
  return out;
}

SdpProblem assemble(const SosParameterization& p, const FunctionalKind& kind, const AssembleOptions& opts) {
  check(p);
  const bool threshold = is_threshold_kind(kind.tag());
  SdpProblem prob;
  prob.blocks = p.gram_blocks();
  prob.constraints = build_identity_constraints(p);
  prob.constraints.append(build_normalization_constraints(
      p, kind, threshold ? threshold_targets(opts.threshold_perturbation) : NormalizationTargets{}));

  if (opts.mode == AssembleMode::Optimize) {
    prob.mode = SdpMode::Minimize;
    if (threshold) {
      ObjectiveData thr = build_threshold_functional(p, kind);
      for (auto& c : thr.costs) {
        if (!c.empty()) c *= Real(-1);
      }
      prob.costs = std::move(thr.costs);
      prob.objective_offset = -thr.offset;
    } else {
      ObjectiveData obj = build_objective(p, kind, opts.trunc);
      prob.costs = std::move(obj.costs);
      prob.objective_offset = obj.offset;
    }
    return prob;
  }

  prob.mode = SdpMode::AnalyticCenter;
  prob.blocks.push_back({"slack", 1});
  prob.costs.assign(prob.blocks.size(), Matrix());
  for (auto& row : prob.constraints.rows) row.coeffs.emplace_back();
  if (threshold) {
    prob.constraints.append(build_feasibility_row(p, kind, opts.threshold_margin));
  } else {
    if (!opts.objective_cap) throw std::invalid_argument("certify mode needs an objective cap");
    const ObjectiveData obj = build_objective(p, kind, opts.trunc);
    ConstraintRow cap;
    cap.coeffs = obj.costs;
    cap.coeffs.push_back(Matrix::identity(1));
    cap.rhs = *opts.objective_cap - obj.offset;
    cap.label = "objective <= cap";
    prob.constraints.rows.push_back(std::move(cap));
  }
  return prob;
}

GaussianPoly function_from_gram(const SosParameterization& p, const Matrix& X1, const Matrix& X2) {
  check(p);
  const auto table = product_table(p.d);
  const auto len = static_cast<std::size_t>(2 * p.d + 2);
  const Real R2 = p.R * p.R;
  const Real inv_two_pi = 1 / (2 * pi());
  Vector c(len);
  for (int i = 0; i <= p.d; ++i) {
    for (int j = 0; j <= p.d; ++j) {
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      const Real x2 = X2(ii, jj);
      const bool has_x1 = !X1.empty() && X1(ii, jj) != 0;
      if (x2 == 0 && !has_x1) continue;
      const auto& pr = table->product(i, j);
      const auto& tpr = table->t_product(i, j);
      for (std::size_t k = 0; k < len; ++k) {
        Real term = x2 * (R2 * from_rational(pr[k]) - from_rational(tpr[k]) * inv_two_pi);
        if (has_x1) term -= X1(ii, jj) * from_rational(pr[k]);
        c[k] += term;
      }
    }
  }
  return GaussianPoly(std::move(c), {BasisKind::LaguerreHalf, 2 * p.d + 1});
}

GaussianPoly fourier_from_gram(const SosParameterization& p, const Matrix& X3, const Matrix& X4) {
  check(p);
  const auto table = product_table(p.d);
  const auto len = static_cast<std::size_t>(2 * p.d + 2);
  const Real inv_two_pi = 1 / (2 * pi());
  Vector c(len);
  for (int i = 0; i <= p.d; ++i) {
    for (int j = 0; j <= p.d; ++j) {
      const auto ii = static_cast<std::size_t>(i), jj = static_cast<std::size_t>(j);
      const auto& pr = table->product(i, j);
      const auto& tpr = table->t_product(i, j);
      for (std::size_t k = 0; k < len; ++k) {
        c[k] += X3(ii, jj) * from_rational(pr[k]) + X4(ii, jj) * from_rational(tpr[k]) * inv_two_pi;
      }
    }
  }
  return GaussianPoly(std::move(c), {BasisKind::LaguerreHalf, 2 * p.d + 1});
}

}  // namespace zetasdp
