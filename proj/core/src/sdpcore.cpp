#include "zetasdp/sdpcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace zetasdp {

namespace {

struct Direction {
  std::vector<Matrix> dX, dS;
  Vector dy;
};

// Nonzero entries of one constraint block, both triangles.
struct SparseEntry {
  std::size_t i, j;
  Real v;
};
using SparseBlock = std::vector<SparseEntry>;
using SparseRow = std::vector<SparseBlock>;

SparseRow sparsify(const ConstraintRow& row) {
  SparseRow out(row.coeffs.size());
  for (std::size_t b = 0; b < row.coeffs.size(); ++b) {
    const auto& c = row.coeffs[b];
    if (c.empty()) continue;
    for (std::size_t i = 0; i < c.rows(); ++i)
      for (std::size_t j = 0; j < c.cols(); ++j)
        if (c(i, j) != 0) out[b].push_back({i, j, c(i, j)});
  }
  return out;
}

Real sparse_dot(const SparseBlock& a, const Matrix& x) {
  Real acc;
  for (const auto& e : a) mpfr_fma(raw(acc), raw(e.v), raw(x(e.i, e.j)), raw(acc), MPFR_RNDN);
  return acc;
}

Real row_dot(const SparseRow& row, const std::vector<Matrix>& X) {
  Real acc;
  for (std::size_t b = 0; b < X.size(); ++b) acc += sparse_dot(row[b], X[b]);
  return acc;
}

Real row_dot(const ConstraintRow& row, const std::vector<Matrix>& X) {
  Real acc;
  for (std::size_t b = 0; b < X.size(); ++b) {
    if (!row.coeffs[b].empty()) acc += frobenius_dot(row.coeffs[b], X[b]);
  }
  return acc;
}

// sum_j y_j A_jb for every block.
std::vector<Matrix> adjoint(const SdpProblem& p, const std::vector<SparseRow>& sparse, const Vector& y) {
  std::vector<Matrix> out;
  for (const auto& blk : p.blocks) out.emplace_back(blk.size, blk.size);
  for (std::size_t j = 0; j < sparse.size(); ++j) {
    if (y[j] == 0) continue;
    for (std::size_t b = 0; b < out.size(); ++b) {
      for (const auto& e : sparse[j][b]) {
        Real& t = out[b](e.i, e.j);
        mpfr_fma(raw(t), raw(e.v), raw(y[j]), raw(t), MPFR_RNDN);
      }
    }
  }
  return out;
}

std::vector<Matrix> adjoint(const SdpProblem& p, const Vector& y) {
  std::vector<SparseRow> sparse;
  for (const auto& row : p.constraints.rows) sparse.push_back(sparsify(row));
  return adjoint(p, sparse, y);
}

// X A S^{-1} for sparse symmetric A, skipping the zero rows of A S^{-1}.
Matrix sandwich(const Matrix& X, const SparseBlock& a, const Matrix& Sinv) {
  const std::size_t n = X.rows();
  Matrix w(n, n);
  std::vector<char> used(n, 0);
  for (const auto& e : a) {
    used[e.i] = 1;
    for (std::size_t c = 0; c < n; ++c) mpfr_fma(raw(w(e.i, c)), raw(e.v), raw(Sinv(e.j, c)), raw(w(e.i, c)), MPFR_RNDN);
  }
  Matrix t(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) {
      if (!used[k]) continue;
      for (std::size_t c = 0; c < n; ++c) mpfr_fma(raw(t(r, c)), raw(X(r, k)), raw(w(k, c)), raw(t(r, c)), MPFR_RNDN);
    }
  return t;
}

Real inner(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
  Real acc;
  for (std::size_t i = 0; i < a.size(); ++i) acc += frobenius_dot(a[i], b[i]);
  return acc;
}

Real max_abs(const std::vector<Matrix>& blocks) {
  Real m;
  for (const auto& b : blocks) m = std::max(m, max_abs(b));
  return m;
}

// Smallest eigenvalue of a symmetric matrix in long double (Householder
// tridiagonalisation, then Sturm bisection). Step lengths only need a few
// digits; the caller re-checks definiteness.
long double min_eigenvalue_ld(const Matrix& m) {
  const std::size_t n = m.rows();
  std::vector<long double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j).convert_to<long double>();
  auto at = [&](std::size_t i, std::size_t j) -> long double& { return a[i * n + j]; };
  std::vector<long double> v(n), p(n), q(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    long double alpha = 0;
    for (std::size_t i = k + 1; i < n; ++i) alpha += at(i, k) * at(i, k);
    alpha = std::sqrt(alpha);
    if (alpha == 0) continue;
    if (at(k + 1, k) > 0) alpha = -alpha;
    std::fill(v.begin(), v.end(), 0.0L);
    v[k + 1] = at(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = at(i, k);
    long double vn2 = 0;
    for (std::size_t i = k + 1; i < n; ++i) vn2 += v[i] * v[i];
    if (vn2 == 0) continue;
    for (std::size_t i = k; i < n; ++i) {
      long double s = 0;
      for (std::size_t j = k + 1; j < n; ++j) s += at(i, j) * v[j];
      p[i] = 2 * s / vn2;
    }
    long double kf = 0;
    for (std::size_t i = k + 1; i < n; ++i) kf += v[i] * p[i];
    kf /= vn2;
    for (std::size_t i = k; i < n; ++i) q[i] = p[i] - kf * v[i];
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j) at(i, j) -= v[i] * q[j] + q[i] * v[j];
  }
  std::vector<long double> d(n), b2(n > 0 ? n - 1 : 0);
  for (std::size_t i = 0; i < n; ++i) d[i] = at(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) b2[i] = at(i + 1, i) * at(i + 1, i);
  long double lo = d[0], hi = d[0];
  for (std::size_t i = 0; i < n; ++i) {
    long double r = 0;
    if (i > 0) r += std::sqrt(b2[i - 1]);
    if (i + 1 < n) r += std::sqrt(b2[i]);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  const long double tiny = std::numeric_limits<long double>::min();
  auto count_below = [&](long double x) {
    int count = 0;
    long double t = d[0] - x;
    if (t < 0) ++count;
    for (std::size_t i = 1; i < n; ++i) {
      if (std::fabs(t) < tiny) t = -tiny;
      t = d[i] - x - b2[i - 1] / t;
      if (t < 0) ++count;
    }
    return count;
  };
  for (int it = 0; it < 80; ++it) {
    const long double mid = (lo + hi) / 2;
    if (mid == lo || mid == hi) break;
    if (count_below(mid) >= 1) hi = mid;
    else lo = mid;
    if (hi - lo <= 1e-9L * std::max(std::fabs(lo), std::fabs(hi))) break;
  }
  return lo;
}

// Largest alpha with L L^T + alpha D still PSD (capped at `cap`).
Real max_step(const Matrix& lower, const Matrix& d, const Real& cap) {
  const long double lmin = min_eigenvalue_ld(congruence_by_inverse(lower, d));
  if (lmin >= 0) return cap;
  return std::min(cap, Real(-1.0L / lmin));
}

// Shrinks alpha until every block of base + alpha * dir factors.
Real backtrack(const std::vector<Matrix>& base, const std::vector<Matrix>& dir, Real alpha) {
  for (int attempt = 0; attempt < 60; ++attempt) {
    bool ok = true;
    for (std::size_t b = 0; b < base.size() && ok; ++b) ok = cholesky(base[b] + dir[b] * alpha).has_value();
    if (ok) return alpha;
    alpha *= Real("0.8");
  }
  return Real(0);
}

}  // namespace

void LinearConstraintSet::append(const LinearConstraintSet& other) {
  rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::size_t SdpProblem::block_index(const std::string& name) const {
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].name == name) return b;
  }
  throw std::out_of_range("no block named " + name);
}

void SdpProblem::validate() const {
  auto check = [&](const Matrix& m, std::size_t b, const std::string& what) {
    if (m.empty()) return;
    if (m.rows() != blocks[b].size || m.cols() != blocks[b].size) {
      throw std::invalid_argument(what + ": block " + blocks[b].name + " has the wrong size");
    }
    if (!(m == transpose(m))) throw std::invalid_argument(what + ": block " + blocks[b].name + " is not symmetric");
  };
  if (blocks.empty()) throw std::invalid_argument("problem has no blocks");
  for (const auto& blk : blocks) {
    if (blk.size == 0) throw std::invalid_argument("block " + blk.name + " is empty");
  }
  if (costs.size() != blocks.size()) throw std::invalid_argument("cost count does not match block count");
  for (std::size_t b = 0; b < blocks.size(); ++b) check(costs[b], b, "cost");
  for (const auto& row : constraints.rows) {
    if (row.coeffs.size() != blocks.size()) throw std::invalid_argument("row " + row.label + " has the wrong block count");
    for (std::size_t b = 0; b < blocks.size(); ++b) check(row.coeffs[b], b, "row " + row.label);
  }
}

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::Optimal: return "Optimal";
    case SdpStatus::Feasible: return "Feasible";
    case SdpStatus::Infeasible: return "Infeasible";
    case SdpStatus::Stalled: return "Stalled";
  }
  return "?";
}

SdpSolution solve(const SdpProblem& problem, const SolverOptions& opts) {
  problem.validate();
  ScopedPrecision precision(opts.precision_bits);
  const std::size_t nb = problem.blocks.size();
  const std::size_t m = problem.constraints.rows.size();
  const auto& rows = problem.constraints.rows;
  const bool center = problem.mode == SdpMode::AnalyticCenter;

  // Gram matrix of the rows; dependence makes the Schur complement singular.
  {
    Matrix gram(m, m);
    Real scale;
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t j = i; j < m; ++j) {
        Real acc;
        for (std::size_t b = 0; b < nb; ++b) {
          if (!rows[i].coeffs[b].empty() && !rows[j].coeffs[b].empty()) {
            acc += frobenius_dot(rows[i].coeffs[b], rows[j].coeffs[b]);
          }
        }
        gram(i, j) = acc;
        gram(j, i) = acc;
      }
      scale = std::max(scale, gram(i, i));
    }
    if (m > 0) {
      const Real eps = ldexp(Real(1), -static_cast<int>(opts.precision_bits / 2));
      if (!(scale > 0) || !cholesky(gram - Matrix::identity(m, eps * scale))) {
        throw std::invalid_argument("degenerate rows");
      }
    }
  }

  std::vector<Matrix> C;
  std::size_t n_total = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    const auto n = problem.blocks[b].size;
    n_total += n;
    C.push_back(center || problem.costs[b].empty() ? Matrix(n, n) : problem.costs[b]);
  }
  std::vector<SparseRow> sparse;
  for (const auto& row : rows) sparse.push_back(sparsify(row));
  // Which blocks each row touches, to skip zero work in the Schur complement.
  std::vector<std::vector<std::size_t>> touches(nb);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t b = 0; b < nb; ++b) {
      if (!sparse[j][b].empty()) touches[b].push_back(j);
    }
  }

  SdpSolution sol;
  for (const auto& blk : problem.blocks) {
    sol.X.push_back(Matrix::identity(blk.size, opts.initial_scale));
    sol.S.push_back(Matrix::identity(blk.size, opts.initial_scale));
  }
  sol.y.assign(m, Real(0));

  const Real big_cap(1e6);
  const Real divergence("1e60");
  const Real centrality_tol("1e-12");
  const Real sigma_floor("0.2");
  int tiny_steps = 0;

  for (int iter = 0;; ++iter) {
    sol.iterations = iter;
    Vector rp(m);
    for (std::size_t j = 0; j < m; ++j) rp[j] = rows[j].rhs - row_dot(sparse[j], sol.X);
    std::vector<Matrix> Rd = adjoint(problem, sparse, sol.y);
    for (std::size_t b = 0; b < nb; ++b) Rd[b] = C[b] - sol.S[b] - Rd[b];

    sol.primal_objective = inner(C, sol.X) + problem.objective_offset;
    sol.dual_objective = problem.objective_offset;
    for (std::size_t j = 0; j < m; ++j) sol.dual_objective += rows[j].rhs * sol.y[j];
    sol.duality_gap = abs(sol.primal_objective - sol.dual_objective);
    const Real pinf = max_abs(rp);
    const Real dinf = max_abs(Rd);
    const Real mu = inner(sol.X, sol.S) / Real(n_total);

    std::vector<Matrix> Lx, Ls, Sinv;
    bool factor_ok = true;
    for (std::size_t b = 0; b < nb && factor_ok; ++b) {
      auto lx = cholesky(sol.X[b]);
      auto ls = cholesky(sol.S[b]);
      if (!lx || !ls) {
        factor_ok = false;
        break;
      }
      Lx.push_back(std::move(*lx));
      Sinv.push_back(cholesky_inverse(*ls));
      Ls.push_back(std::move(*ls));
    }
    if (!factor_ok) {
      sol.status = SdpStatus::Stalled;
      return sol;
    }

    const bool feasible = pinf <= opts.feasibility_tolerance && dinf <= opts.feasibility_tolerance;
    if (!center && feasible && sol.duality_gap <= opts.gap_tolerance) {
      sol.status = SdpStatus::Optimal;
      return sol;
    }
    if (center && feasible) {
      // Centrality: L_x^T S L_x = I at the analytic center (mu target 1).
      Real dev;
      for (std::size_t b = 0; b < nb; ++b) {
        Matrix t = transpose(Lx[b]) * sol.S[b] * Lx[b];
        for (std::size_t i = 0; i < t.rows(); ++i) t(i, i) -= 1;
        dev = std::max(dev, max_abs(t));
      }
      if (dev <= centrality_tol) {
        sol.status = SdpStatus::Feasible;
        return sol;
      }
    }
    if (max_abs(sol.y) > divergence || (!center && sol.dual_objective > divergence)) {
      sol.status = SdpStatus::Infeasible;
      return sol;
    }
    if (iter >= opts.max_iterations || tiny_steps >= 8) {
      sol.status = (center && pinf > opts.feasibility_tolerance) ? SdpStatus::Infeasible : SdpStatus::Stalled;
      return sol;
    }

    // Schur complement M_ij = sum_b <A_ib, X_b A_jb S_b^{-1}>.
    Matrix M(m, m);
    for (std::size_t b = 0; b < nb; ++b) {
      for (std::size_t jj = 0; jj < touches[b].size(); ++jj) {
        const std::size_t j = touches[b][jj];
        const Matrix T = sandwich(sol.X[b], sparse[j][b], Sinv[b]);
        for (std::size_t ii = 0; ii <= jj; ++ii) {
          const std::size_t i = touches[b][ii];
          M(i, j) += sparse_dot(sparse[i][b], T);
        }
      }
    }
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t i = 0; i < j; ++i) M(j, i) = M(i, j);
    }
    const auto LM = cholesky(M);
    if (!LM) {
      sol.status = SdpStatus::Stalled;
      return sol;
    }

    // dX = G - X dS S^{-1}, dS = Rd - A*(dy).
    auto direction = [&](const std::vector<Matrix>& G) {
      Direction d;
      std::vector<Matrix> H(nb);
      for (std::size_t b = 0; b < nb; ++b) H[b] = G[b] - sol.X[b] * Rd[b] * Sinv[b];
      Vector rhs(m);
      for (std::size_t j = 0; j < m; ++j) rhs[j] = rp[j] - row_dot(sparse[j], H);
      d.dy = cholesky_solve(*LM, rhs);
      d.dS = adjoint(problem, sparse, d.dy);
      for (std::size_t b = 0; b < nb; ++b) {
        d.dS[b] = Rd[b] - d.dS[b];
        d.dX.push_back(symmetrize(G[b] - sol.X[b] * d.dS[b] * Sinv[b]));
      }
      return d;
    };
    auto step_lengths = [&](const Direction& d) {
      Real ap = big_cap, ad = big_cap;
      for (std::size_t b = 0; b < nb; ++b) {
        ap = std::min(ap, max_step(Lx[b], d.dX[b], big_cap));
        ad = std::min(ad, max_step(Ls[b], d.dS[b], big_cap));
      }
      return std::pair{std::min(Real(1), Real(opts.step_fraction * ap)), std::min(Real(1), Real(opts.step_fraction * ad))};
    };

    Direction dir;
    if (center) {
      std::vector<Matrix> G(nb);
      for (std::size_t b = 0; b < nb; ++b) G[b] = Sinv[b] - sol.X[b];
      dir = direction(G);
    } else {
      std::vector<Matrix> G(nb);
      for (std::size_t b = 0; b < nb; ++b) G[b] = sol.X[b] * Real(-1);
      const Direction pred = direction(G);
      const auto [ap, ad] = step_lengths(pred);
      Real mu_aff;
      for (std::size_t b = 0; b < nb; ++b) {
        mu_aff += frobenius_dot(sol.X[b] + pred.dX[b] * ap, sol.S[b] + pred.dS[b] * ad);
      }
      mu_aff /= Real(n_total);
      Real ratio = mu > 0 ? Real(mu_aff / mu) : Real(0);
      ratio = std::clamp(ratio, Real(0), Real(1));
      // While infeasible, keep mu from outrunning the residuals.
      const Real sigma = feasible ? Real(ratio * ratio * ratio) : std::max(Real(ratio * ratio * ratio), sigma_floor);
      for (std::size_t b = 0; b < nb; ++b) {
        G[b] = Sinv[b] * (sigma * mu) - sol.X[b] - pred.dX[b] * pred.dS[b] * Sinv[b];
      }
      dir = direction(G);
    }
    auto [ap, ad] = step_lengths(dir);
    ap = backtrack(sol.X, dir.dX, ap);
    ad = backtrack(sol.S, dir.dS, ad);
    tiny_steps = (ap < Real("1e-10") && ad < Real("1e-10")) ? tiny_steps + 1 : 0;
    if (opts.observer) opts.observer({iter, mu, pinf, dinf, sol.duality_gap, ap, ad});
    for (std::size_t b = 0; b < nb; ++b) {
      sol.X[b] += dir.dX[b] * ap;
      sol.S[b] += dir.dS[b] * ad;
    }
    for (std::size_t j = 0; j < m; ++j) sol.y[j] += dir.dy[j] * ad;
  }
}

SdpResiduals residuals(const SdpProblem& problem, const SdpSolution& solution) {
  SdpResiduals r;
  for (const auto& row : problem.constraints.rows) {
    r.primal = std::max(r.primal, Real(abs(row.rhs - row_dot(row, solution.X))));
  }
  const auto aty = adjoint(problem, solution.y);
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) {
    const auto n = problem.blocks[b].size;
    const Matrix c = (problem.mode == SdpMode::AnalyticCenter || problem.costs[b].empty()) ? Matrix(n, n) : problem.costs[b];
    r.dual = std::max(r.dual, max_abs(c - solution.S[b] - aty[b]));
    r.min_eigenvalues.push_back(min_eigenvalue(solution.X[b], Real("1e-30")));
    r.min_dual_eigenvalues.push_back(min_eigenvalue(solution.S[b], Real("1e-30")));
  }
  return r;
}

}  // namespace zetasdp
