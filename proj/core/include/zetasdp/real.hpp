#pragma once

#include <gmpxx.h>
#include <mpfr.h>

#include <boost/multiprecision/mpfr.hpp>

#include <string>
#include <string_view>

namespace zetasdp {

// Arbitrary-precision real. Expression templates are off so that `auto`
// never captures a lazy expression.
using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;

inline constexpr unsigned kDefaultPrecisionBits = 256;

// Boost keeps the default precision in decimal digits; requested bit counts
// are rounded up, so the effective mantissa can be a few bits wider.
void set_working_precision(unsigned bits);
unsigned working_precision_bits();

class ScopedPrecision {
 public:
  explicit ScopedPrecision(unsigned bits);
  ~ScopedPrecision();
  ScopedPrecision(const ScopedPrecision&) = delete;
  ScopedPrecision& operator=(const ScopedPrecision&) = delete;

 private:
  unsigned saved_digits10_;
};

inline mpfr_ptr raw(Real& x) { return x.backend().data(); }
inline mpfr_srcptr raw(const Real& x) { return x.backend().data(); }

Real pi();
Real from_rational(const mpq_class& q);
mpq_class to_rational(const Real& x);

// Parses a finite decimal (optionally in scientific notation). Throws
// std::invalid_argument when the whole token is not consumed.
Real parse_real(std::string_view text);

// Scientific notation with `significant_digits` significant digits.
std::string format_real(const Real& x, int significant_digits);

// Shortest fixed-size decimal that reads back to the same binary value at the
// current precision.
int round_trip_digits();

}  // namespace zetasdp
