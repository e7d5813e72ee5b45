#include "zetasdp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace zetasdp {

namespace {

// acc -= a * b
void sub_product(Real& acc, const Real& a, const Real& b) {
  mpfr_fms(raw(acc), raw(a), raw(b), raw(acc), MPFR_RNDN);
  mpfr_neg(raw(acc), raw(acc), MPFR_RNDN);
}

void require_same_shape(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("matrix shape mismatch");
}

// Number of eigenvalues of the symmetric tridiagonal (diag, off) below x.
std::size_t sturm_count(const Vector& diag, const Vector& off, const Real& x) {
  std::size_t count = 0;
  Real q = diag[0] - x;
  const Real tiny = ldexp(Real(1), -200);
  for (std::size_t i = 0;; ++i) {
    if (q == 0) q = tiny;
    if (q < 0) ++count;
    if (i + 1 == diag.size()) break;
    q = diag[i + 1] - x - off[i] * off[i] / q;
  }
  return count;
}

}  // namespace

Matrix Matrix::identity(std::size_t n, const Real& scale) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  require_same_shape(*this, o);
  for (std::size_t k = 0; k < data_.size(); ++k) mpfr_add(raw(data_[k]), raw(data_[k]), raw(o.data_[k]), MPFR_RNDN);
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  require_same_shape(*this, o);
  for (std::size_t k = 0; k < data_.size(); ++k) mpfr_sub(raw(data_[k]), raw(data_[k]), raw(o.data_[k]), MPFR_RNDN);
  return *this;
}

Matrix& Matrix::operator*=(const Real& s) {
  for (auto& v : data_) mpfr_mul(raw(v), raw(v), raw(s), MPFR_RNDN);
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, const Real& s) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real& aik = a(i, k);
      if (mpfr_zero_p(raw(aik))) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) {
        mpfr_fma(raw(c(i, j)), raw(aik), raw(b(k, j)), raw(c(i, j)), MPFR_RNDN);
      }
    }
  }
  return c;
}

Vector operator*(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) throw std::invalid_argument("matrix-vector shape mismatch");
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) mpfr_fma(raw(y[i]), raw(a(i, j)), raw(x[j]), raw(y[i]), MPFR_RNDN);
  return y;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Matrix symmetrize(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("symmetrize needs a square matrix");
  Matrix s(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    s(i, i) = a(i, i);
    for (std::size_t j = i + 1; j < a.cols(); ++j) {
      Real v = (a(i, j) + a(j, i)) / 2;
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  return s;
}

Real frobenius_dot(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b);
  Real acc;
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) mpfr_fma(raw(acc), raw(av[k]), raw(bv[k]), raw(acc), MPFR_RNDN);
  return acc;
}

Real max_abs(const Matrix& a) {
  Real m;
  for (const auto& v : a.values()) m = std::max(m, Real(abs(v)));
  return m;
}

Real max_abs(const Vector& v) {
  Real m;
  for (const auto& x : v) m = std::max(m, Real(abs(x)));
  return m;
}

Real trace(const Matrix& a) {
  Real t;
  for (std::size_t i = 0; i < std::min(a.rows(), a.cols()); ++i) t += a(i, i);
  return t;
}

Real dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("vector length mismatch");
  Real acc;
  for (std::size_t k = 0; k < a.size(); ++k) mpfr_fma(raw(acc), raw(a[k]), raw(b[k]), raw(acc), MPFR_RNDN);
  return acc;
}

Real quadratic_form(const Matrix& a, const Vector& x) { return dot(x, a * x); }

Matrix outer(const Vector& x) {
  Matrix m(x.size(), x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < x.size(); ++j) m(i, j) = x[i] * x[j];
  return m;
}

std::optional<Matrix> cholesky(const Matrix& a) {
  if (!a.square()) throw std::invalid_argument("cholesky needs a square matrix");
  const std::size_t n = a.rows();
  Matrix l(n, n);
  Real s;
  for (std::size_t j = 0; j < n; ++j) {
    s = a(j, j);
    for (std::size_t k = 0; k < j; ++k) sub_product(s, l(j, k), l(j, k));
    if (!(s > 0)) return std::nullopt;
    l(j, j) = sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sub_product(s, l(i, k), l(j, k));
      mpfr_div(raw(l(i, j)), raw(s), raw(l(j, j)), MPFR_RNDN);
    }
  }
  return l;
}

Vector cholesky_solve(const Matrix& l, Vector b) {
  const std::size_t n = l.rows();
  if (b.size() != n) throw std::invalid_argument("cholesky_solve length mismatch");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= l(i, k) * b[k];
    b[i] /= l(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) b[i] -= l(k, i) * b[k];
    b[i] /= l(i, i);
  }
  return b;
}

Matrix cholesky_inverse(const Matrix& l) {
  const std::size_t n = l.rows();
  // Invert L (lower triangular), then A^{-1} = L^{-T} L^{-1}.
  Matrix li(n, n);
  Real s;
  for (std::size_t j = 0; j < n; ++j) {
    li(j, j) = Real(1) / l(j, j);
    for (std::size_t i = j + 1; i < n; ++i) {
      s = 0;
      for (std::size_t k = j; k < i; ++k) mpfr_fma(raw(s), raw(l(i, k)), raw(li(k, j)), raw(s), MPFR_RNDN);
      li(i, j) = -s / l(i, i);
    }
  }
  Matrix inv(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      s = 0;
      for (std::size_t k = i; k < n; ++k) mpfr_fma(raw(s), raw(li(k, i)), raw(li(k, j)), raw(s), MPFR_RNDN);
      inv(i, j) = s;
      inv(j, i) = s;
    }
  }
  return inv;
}

Matrix congruence_by_inverse(const Matrix& l, const Matrix& b) {
  const std::size_t n = l.rows();
  // Y = L^{-1} B, column by column.
  Matrix y = b;
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) sub_product(y(i, c), l(i, k), y(k, c));
      y(i, c) /= l(i, i);
    }
  }
  // W = L^{-1} Y^T, which equals (Y L^{-T})^T = W^T.
  Matrix w = transpose(y);
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < i; ++k) sub_product(w(i, c), l(i, k), w(k, c));
      w(i, c) /= l(i, i);
    }
  }
  return symmetrize(w);
}

Vector symmetric_eigenvalues(const Matrix& input) {
  if (!input.square()) throw std::invalid_argument("eigenvalues need a square matrix");
  const std::size_t n = input.rows();
  Matrix a = symmetrize(input);
  const Real eps = ldexp(Real(1), 4 - static_cast<int>(working_precision_bits()));
  Real scale = max_abs(a);
  if (scale == 0) return Vector(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    Real off;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (sqrt(off) <= eps * scale) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (abs(a(p, q)) <= eps * scale * eps) continue;
        const Real theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
        Real t = 1 / (abs(theta) + sqrt(theta * theta + 1));
        if (theta < 0) t = -t;
        const Real c = 1 / sqrt(t * t + 1);
        const Real s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const Real akp = a(k, p);
          const Real akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const Real apk = a(p, k);
          const Real aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

void tridiagonalize(const Matrix& input, Vector& diag, Vector& off) {
  if (!input.square()) throw std::invalid_argument("tridiagonalize needs a square matrix");
  const std::size_t n = input.rows();
  Matrix a = symmetrize(input);
  // Householder reduction: A <- H A H with H = I - 2 v v^T / (v^T v).
  for (std::size_t k = 0; k + 2 < n; ++k) {
    Real alpha;
    for (std::size_t i = k + 1; i < n; ++i) alpha += a(i, k) * a(i, k);
    alpha = sqrt(alpha);
    if (alpha == 0) continue;
    if (a(k + 1, k) > 0) alpha = -alpha;
    Vector v(n);
    v[k + 1] = a(k + 1, k) - alpha;
    for (std::size_t i = k + 2; i < n; ++i) v[i] = a(i, k);
    Real vnorm2;
    for (std::size_t i = k + 1; i < n; ++i) vnorm2 += v[i] * v[i];
    if (vnorm2 == 0) continue;
    Vector p(n);
    for (std::size_t i = k; i < n; ++i) {
      Real s;
      for (std::size_t j = k + 1; j < n; ++j) s += a(i, j) * v[j];
      p[i] = 2 * s / vnorm2;
    }
    Real kfac;
    for (std::size_t i = k + 1; i < n; ++i) kfac += v[i] * p[i];
    kfac /= vnorm2;
    Vector q(n);
    for (std::size_t i = k; i < n; ++i) q[i] = p[i] - kfac * v[i];
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j < n; ++j) a(i, j) -= v[i] * q[j] + q[i] * v[j];
  }
  diag.assign(n, Real(0));
  off.assign(n > 0 ? n - 1 : 0, Real(0));
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i);
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = a(i + 1, i);
}

Real min_eigenvalue(const Matrix& input, const Real& rel_tol) {
  if (!input.square()) throw std::invalid_argument("eigenvalues need a square matrix");
  const std::size_t n = input.rows();
  if (n == 1) return input(0, 0);
  Vector diag, off;
  tridiagonalize(input, diag, off);
  Real lo = diag[0], hi = diag[0];
  for (std::size_t i = 0; i < n; ++i) {
    Real r;
    if (i > 0) r += abs(off[i - 1]);
    if (i + 1 < n) r += abs(off[i]);
    lo = std::min(lo, Real(diag[i] - r));
    hi = std::max(hi, Real(diag[i] + r));
  }
  const Real width_target = rel_tol * std::max(Real(abs(lo)), Real(abs(hi)));
  for (int it = 0; it < 4 * static_cast<int>(working_precision_bits()); ++it) {
    if (hi - lo <= width_target) break;
    const Real mid = (lo + hi) / 2;
    if (sturm_count(diag, off, mid) >= 1) hi = mid;
    else lo = mid;
  }
  return (lo + hi) / 2;
}

Vector lu_solve(Matrix a, Vector b) {
  const std::size_t n = a.rows();
  if (!a.square() || b.size() != n) throw std::invalid_argument("lu_solve shape mismatch");
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (abs(a(i, k)) > abs(a(piv, k))) piv = i;
    if (a(piv, k) == 0) throw std::runtime_error("singular system");
    if (piv != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(piv, j));
      std::swap(b[k], b[piv]);
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      const Real f = a(i, k) / a(k, k);
      if (f == 0) continue;
      for (std::size_t j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = i + 1; j < n; ++j) b[i] -= a(i, j) * b[j];
    b[i] /= a(i, i);
  }
  return b;
}

}  // namespace zetasdp
