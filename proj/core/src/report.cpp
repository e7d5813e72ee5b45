#include "zetasdp/report.hpp"

#include <nlohmann/json.hpp>

#include <cctype>
#include <sstream>
#include <stdexcept>

namespace zetasdp {

std::string to_string(Hypothesis h) {
  switch (h) {
    case Hypothesis::RH: return "RH";
    case Hypothesis::GRH: return "GRH";
    case Hypothesis::RHSimplicity: return "RH+simplicity-conjecture";
    case Hypothesis::GRHSimplicity: return "GRH+simplicity-conjecture";
  }
  return "?";
}

Hypothesis parse_hypothesis(std::string_view text) {
  for (auto h : {Hypothesis::RH, Hypothesis::GRH, Hypothesis::RHSimplicity, Hypothesis::GRHSimplicity}) {
    if (to_string(h) == text) return h;
  }
  throw std::invalid_argument("unknown hypothesis '" + std::string(text) + "'");
}

Hypothesis hypothesis_for(FunctionalTag tag) {
  switch (tag) {
    case FunctionalTag::Z:
    case FunctionalTag::Z1: return Hypothesis::RH;
    case FunctionalTag::ZTilde:
    case FunctionalTag::L: return Hypothesis::GRH;
    case FunctionalTag::P: return Hypothesis::RHSimplicity;
    case FunctionalTag::PTilde: return Hypothesis::GRHSimplicity;
  }
  return Hypothesis::RH;
}

ExactInterval::ExactInterval(const mpq_class& l, const mpq_class& h) : lo(l), hi(h) {
  if (lo > hi) throw std::invalid_argument("interval with lo > hi");
}

ExactInterval::ExactInterval(const Interval& x) : lo(to_rational(x.lo())), hi(to_rational(x.hi())) {}

namespace {

// c -> a + b c for b of either sign.
ExactInterval affine(const ExactInterval& c, const mpq_class& a, const mpq_class& b) {
  mpq_class x = a + b * c.lo, y = a + b * c.hi;
  if (x > y) std::swap(x, y);
  return ExactInterval(x, y);
}

std::string q_text(const mpq_class& q) { return q.get_str(); }

mpq_class q_parse(const std::string& s) {
  mpq_class q;
  if (q.set_str(s, 10) != 0) throw std::invalid_argument("bad rational '" + s + "'");
  q.canonicalize();
  return q;
}

std::string bound_text(const ExactInterval& x, int digits) {
  return "[" + round_decimal(x.lo, digits, BoundDirection::Lower) + ", " +
         round_decimal(x.hi, digits, BoundDirection::Upper) + "]";
}

}  // namespace

BoundReport derive_constants(FunctionalTag kind, const ExactInterval& c, const ReportOptions& opts) {
  BoundReport r;
  r.kind = kind;
  r.hypothesis = hypothesis_for(kind);
  r.bound = c;
  r.digits = opts.digits;
  r.bound_digits = opts.bound_digits;
  auto add = [&](std::string name, ExactInterval v, std::string formula, BoundDirection dir) {
    r.derived.push_back({std::move(name), std::move(v), std::move(formula), dir});
  };
  switch (kind) {
    case FunctionalTag::Z:
    case FunctionalTag::ZTilde: {
      add("N_s", affine(c, 2, -1), "2 - c", BoundDirection::Lower);
      const mpq_class s = opts.simple_zero_input;
      add("N_d", affine(c, (2 * s + 5) / 6, mpq_class(-1, 6)), "(2*" + s.get_str() + " + 5 - c)/6",
          BoundDirection::Lower);
      break;
    }
    case FunctionalTag::Z1:
      add("N_1s", affine(c, 2, -1), "2 - c", BoundDirection::Lower);
      add("N_1d", affine(c, mpq_class(3, 2), mpq_class(-1, 2)), "3/2 - c/2", BoundDirection::Lower);
      break;
    case FunctionalTag::L:
      add("N_Phi_s", affine(c, 2, -1), "2 - c", BoundDirection::Lower);
      break;
    case FunctionalTag::P:
    case FunctionalTag::PTilde:
      add("lambda", c, "lambda with p(lambda) > 0", BoundDirection::Upper);
      r.notes.push_back("lambda need not equal the crossing of p; p(lambda) > 0 suffices");
      break;
  }
  r.notes.push_back("leading asymptotic constants; o(1) and O(delta) terms are omitted");
  return r;
}

std::string round_decimal(const mpq_class& q, int decimals, BoundDirection direction) {
  if (decimals < 0) throw std::invalid_argument("negative decimal count");
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(decimals));
  const mpq_class scaled = q * scale;
  mpz_class n;
  if (direction == BoundDirection::Lower) {
    mpz_fdiv_q(n.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  } else {
    mpz_cdiv_q(n.get_mpz_t(), scaled.get_num_mpz_t(), scaled.get_den_mpz_t());
  }
  const bool negative = n < 0;
  std::string digits = mpz_class(abs(n)).get_str();
  const auto width = static_cast<std::size_t>(decimals) + 1;
  if (digits.size() < width) digits.insert(0, width - digits.size(), '0');
  std::string out = negative ? "-" : "";
  out += digits.substr(0, digits.size() - static_cast<std::size_t>(decimals));
  if (decimals > 0) out += "." + digits.substr(digits.size() - static_cast<std::size_t>(decimals));
  return out;
}

mpq_class parse_decimal(std::string_view text) {
  std::size_t i = 0;
  auto fail = [&] { return std::invalid_argument("bad decimal '" + std::string(text) + "'"); };
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) negative = text[i++] == '-';
  std::string digits;
  long exponent = 0;
  bool any = false;
  while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++], any = true;
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits += text[i++], --exponent, any = true;
  }
  if (!any) throw fail();
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    std::size_t used = 0;
    try {
      exponent += std::stol(std::string(text.substr(i)), &used);
    } catch (const std::exception&) {
      throw fail();
    }
    i += used;
  }
  if (i != text.size()) throw fail();
  mpq_class q(mpz_class(digits, 10));
  mpz_class p;
  mpz_ui_pow_ui(p.get_mpz_t(), 10, static_cast<unsigned long>(exponent < 0 ? -exponent : exponent));
  if (exponent < 0) q /= p; else q *= p;
  q.canonicalize();
  return negative ? mpq_class(-q) : q;
}

std::string printed_value(const DerivedConstant& c, int digits) {
  return c.direction == BoundDirection::Lower ? round_decimal(c.value.lo, digits, BoundDirection::Lower)
                                              : round_decimal(c.value.hi, digits, BoundDirection::Upper);
}

std::string format_report(const BoundReport& r, ReportStyle style) {
  if (style == ReportStyle::Text) {
    std::ostringstream out;
    out << "kind        " << to_string(r.kind) << '\n';
    out << "hypothesis  " << to_string(r.hypothesis) << '\n';
    out << "bound c     " << bound_text(r.bound, r.bound_digits) << '\n';
    for (const auto& d : r.derived) {
      out << "  " << d.name << (d.direction == BoundDirection::Lower ? " >= " : " <= ") << printed_value(d, r.digits)
          << "    (" << d.formula << ")\n";
    }
    for (const auto& n : r.notes) out << "note: " << n << '\n';
    return out.str();
  }
  using nlohmann::ordered_json;
  ordered_json j;
  j["kind"] = to_string(r.kind);
  j["hypothesis"] = to_string(r.hypothesis);
  j["digits"] = r.digits;
  j["bound_digits"] = r.bound_digits;
  j["bound"] = {{"decimal", bound_text(r.bound, r.bound_digits)}, {"lo", q_text(r.bound.lo)}, {"hi", q_text(r.bound.hi)}};
  ordered_json derived = ordered_json::array();
  for (const auto& d : r.derived) {
    derived.push_back({{"name", d.name},
                       {"direction", d.direction == BoundDirection::Lower ? "lower" : "upper"},
                       {"printed", printed_value(d, r.digits)},
                       {"formula", d.formula},
                       {"lo", q_text(d.value.lo)},
                       {"hi", q_text(d.value.hi)}});
  }
  j["derived"] = std::move(derived);
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

BoundReport parse_machine_report(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    BoundReport r;
    r.kind = parse_functional_tag(j.at("kind").get<std::string>());
    r.hypothesis = parse_hypothesis(j.at("hypothesis").get<std::string>());
    r.digits = j.at("digits").get<int>();
    r.bound_digits = j.at("bound_digits").get<int>();
    r.bound = ExactInterval(q_parse(j.at("bound").at("lo")), q_parse(j.at("bound").at("hi")));
    for (const auto& d : j.at("derived")) {
      const auto dir = d.at("direction").get<std::string>();
      if (dir != "lower" && dir != "upper") throw std::invalid_argument("bad direction '" + dir + "'");
      r.derived.push_back({d.at("name").get<std::string>(), ExactInterval(q_parse(d.at("lo")), q_parse(d.at("hi"))),
                           d.at("formula").get<std::string>(),
                           dir == "lower" ? BoundDirection::Lower : BoundDirection::Upper});
    }
    r.notes = j.at("notes").get<std::vector<std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed report: ") + e.what());
  }
}

}  // namespace zetasdp
