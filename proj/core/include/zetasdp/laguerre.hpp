#pragma once

#include "zetasdp/linalg.hpp"
#include "zetasdp/real.hpp"

#include <gmpxx.h>

#include <memory>
#include <vector>

namespace zetasdp {

using RationalPoly = std::vector<mpq_class>;

// Exact tables for the generalized Laguerre family L_n^{-1/2}(t), all in the
// variable t. The recurrence is the three-term one; no factorial ratios.
class LaguerreTable {
 public:
  explicit LaguerreTable(int max_degree);

  int max_degree() const { return max_degree_; }

  // Coefficients of L_n(t) in powers of t.
  const RationalPoly& monomial(int n) const { return monomial_.at(static_cast<std::size_t>(n)); }
  // Coefficients of t^k in the Laguerre basis.
  const RationalPoly& power(int k) const { return power_.at(static_cast<std::size_t>(k)); }
  const mpq_class& value_at_zero(int n) const { return at_zero_.at(static_cast<std::size_t>(n)); }

  // Monomial -> Laguerre for a polynomial in t of degree <= max_degree.
  RationalPoly to_laguerre(const RationalPoly& monomial_coeffs) const;
  RationalPoly to_monomial(const RationalPoly& laguerre_coeffs) const;

 private:
  int max_degree_;
  std::vector<RationalPoly> monomial_;
  std::vector<RationalPoly> power_;
  std::vector<mpq_class> at_zero_;
};

// Shared, immutable table covering at least `max_degree`.
std::shared_ptr<const LaguerreTable> laguerre_table(int max_degree);

// Laguerre coefficients of t * sum_k c_k L_k(t).
RationalPoly laguerre_times_t(const RationalPoly& c);
RationalPoly poly_multiply(const RationalPoly& a, const RationalPoly& b);

// L_0(t), ..., L_n(t) by the three-term recurrence.
Vector laguerre_values(int n, const Real& t);

}  // namespace zetasdp
