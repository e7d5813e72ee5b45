#pragma once

#include "zetasdp/functionals.hpp"
#include "zetasdp/rigor.hpp"

#include <gmpxx.h>

#include <string>
#include <string_view>
#include <vector>

namespace zetasdp {

enum class Hypothesis { RH, GRH, RHSimplicity, GRHSimplicity };

// "RH", "GRH", "RH+simplicity-conjecture", "GRH+simplicity-conjecture".
std::string to_string(Hypothesis h);
Hypothesis parse_hypothesis(std::string_view text);
// Hypothesis under which the functional's bound applies.
Hypothesis hypothesis_for(FunctionalTag tag);

// Closed interval with exact rational endpoints. Binary interval endpoints
// convert without loss.
struct ExactInterval {
  mpq_class lo, hi;

  ExactInterval() = default;
  explicit ExactInterval(const mpq_class& point) : lo(point), hi(point) {}
  ExactInterval(const mpq_class& l, const mpq_class& h);  // throws if l > h
  explicit ExactInterval(const Interval& x);

  bool operator==(const ExactInterval& o) const { return lo == o.lo && hi == o.hi; }
};

// Whether the derived constant bounds its quantity from below (printed
// rounded down) or from above (rounded up).
enum class BoundDirection { Lower, Upper };

struct DerivedConstant {
  std::string name;
  ExactInterval value;
  std::string formula;
  BoundDirection direction = BoundDirection::Lower;

  bool operator==(const DerivedConstant&) const = default;
};

struct ReportOptions {
  // Proportion of simple zeros of zeta under RH (Bui, Heath-Brown), an
  // external input to the distinct-zeros constant.
  mpq_class simple_zero_input = mpq_class(19, 27);
  int digits = 4;         // decimals for derived constants
  int bound_digits = 12;  // decimals for the bound interval
};

struct BoundReport {
  FunctionalTag kind = FunctionalTag::Z;
  Hypothesis hypothesis = Hypothesis::RH;
  ExactInterval bound;
  std::vector<DerivedConstant> derived;
  std::vector<std::string> notes;
  int digits = 4;
  int bound_digits = 12;

  bool operator==(const BoundReport&) const = default;
};

// For the minimization kinds `bound` encloses the functional value c; for
// the threshold kinds it is lambda.
BoundReport derive_constants(FunctionalTag kind, const ExactInterval& bound, const ReportOptions& opts = {});

// floor(q * 10^decimals) / 10^decimals (or ceil), as a fixed-point string.
std::string round_decimal(const mpq_class& q, int decimals, BoundDirection direction);
// Exact value of a fixed-point or scientific decimal string.
mpq_class parse_decimal(std::string_view text);

// The constant as printed: lower bounds rounded down, upper bounds up.
std::string printed_value(const DerivedConstant& c, int digits);

enum class ReportStyle { Text, Machine };

std::string format_report(const BoundReport& report, ReportStyle style);
// Inverse of the machine style. Throws std::invalid_argument on malformed
// input.
BoundReport parse_machine_report(std::string_view text);

}  // namespace zetasdp
