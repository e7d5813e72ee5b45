#pragma once

#include "zetasdp/real.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace zetasdp {

using Vector = std::vector<Real>;

// Dense row-major matrix of Reals. Sizes here are small (a few dozen), so no
// attempt is made at blocking or sparsity.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static Matrix identity(std::size_t n, const Real& scale = Real(1));

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }
  bool square() const { return rows_ == cols_; }

  Real& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const Real& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(const Real& s);

  bool operator==(const Matrix& o) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, const Real& s);
Matrix operator*(const Matrix& a, const Matrix& b);
Vector operator*(const Matrix& a, const Vector& x);

Matrix transpose(const Matrix& a);
// (A + A^T) / 2
Matrix symmetrize(const Matrix& a);
// sum_ij a_ij b_ij
Real frobenius_dot(const Matrix& a, const Matrix& b);
Real max_abs(const Matrix& a);
Real max_abs(const Vector& v);
Real trace(const Matrix& a);
Real dot(const Vector& a, const Vector& b);
// x^T A x
Real quadratic_form(const Matrix& a, const Vector& x);
// x x^T
Matrix outer(const Vector& x);

// Lower-triangular L with A = L L^T, or nullopt if a pivot is not positive.
std::optional<Matrix> cholesky(const Matrix& a);
Vector cholesky_solve(const Matrix& lower, Vector b);
Matrix cholesky_inverse(const Matrix& lower);
// L^{-1} B L^{-T} for symmetric B.
Matrix congruence_by_inverse(const Matrix& lower, const Matrix& b);

// All eigenvalues of a symmetric matrix, ascending (cyclic Jacobi).
Vector symmetric_eigenvalues(const Matrix& a);
// Householder reduction of a symmetric matrix to tridiagonal form.
void tridiagonalize(const Matrix& a, Vector& diag, Vector& off);
// Smallest eigenvalue of a symmetric matrix via Householder tridiagonalisation
// and Sturm bisection; `rel_tol` is relative to the spectral radius bound.
Real min_eigenvalue(const Matrix& a, const Real& rel_tol);

// Solves a general square system with partial pivoting; throws on singular.
Vector lu_solve(Matrix a, Vector b);

}  // namespace zetasdp
