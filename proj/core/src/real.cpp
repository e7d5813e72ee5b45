#include "zetasdp/real.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace zetasdp {

namespace {

unsigned digits10_for_bits(unsigned bits) {
  return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120));
}

// Boost's own default is 50 decimal digits; start from ours instead.
const bool kPrecisionInitialised = [] {
  Real::default_precision(digits10_for_bits(kDefaultPrecisionBits));
  return true;
}();

}  // namespace

void set_working_precision(unsigned bits) {
  if (bits < 32) throw std::invalid_argument("precision below 32 bits");
  Real::default_precision(digits10_for_bits(bits));
}

unsigned working_precision_bits() {
  Real probe;
  return static_cast<unsigned>(mpfr_get_prec(raw(probe)));
}

ScopedPrecision::ScopedPrecision(unsigned bits)
    : saved_digits10_(Real::default_precision()) {
  set_working_precision(bits);
}

ScopedPrecision::~ScopedPrecision() { Real::default_precision(saved_digits10_); }

Real pi() {
  Real r;
  mpfr_const_pi(raw(r), MPFR_RNDN);
  return r;
}

Real from_rational(const mpq_class& q) {
  Real r;
  mpfr_set_q(raw(r), q.get_mpq_t(), MPFR_RNDN);
  return r;
}

mpq_class to_rational(const Real& x) {
  if (!mpfr_number_p(raw(x))) throw std::domain_error("non-finite value has no rational form");
  mpq_class q;
  mpfr_get_q(q.get_mpq_t(), raw(x));
  return q;
}

Real parse_real(std::string_view text) {
  std::string token(text);
  if (token.empty()) throw std::invalid_argument("empty numeric token");
  Real r;
  char* end = nullptr;
  mpfr_strtofr(raw(r), token.c_str(), &end, 10, MPFR_RNDN);
  if (end == token.c_str() || *end != '\0' || !mpfr_number_p(raw(r))) {
    throw std::invalid_argument("not a finite decimal: '" + token + "'");
  }
  return r;
}

std::string format_real(const Real& x, int significant_digits) {
  if (significant_digits < 1) significant_digits = 1;
  const int n = mpfr_snprintf(nullptr, 0, "%.*Re", significant_digits - 1, raw(x));
  std::vector<char> buf(static_cast<std::size_t>(n) + 1);
  mpfr_snprintf(buf.data(), buf.size(), "%.*Re", significant_digits - 1, raw(x));
  return std::string(buf.data(), static_cast<std::size_t>(n));
}

int round_trip_digits() {
  return static_cast<int>(std::ceil(working_precision_bits() * 0.30102999566398120)) + 2;
}

}  // namespace zetasdp
