// Acceptance run: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]... [--paper-scale] [--work-dir DIR]
//
// Exit status is 0 iff every criterion that ran passed. Criterion 8 is
// long-running and runs only with --paper-scale.

#include "cli.hpp"
#include "planted.hpp"

#include "zetasdp/certio.hpp"
#include "zetasdp/functionals.hpp"
#include "zetasdp/gausspoly.hpp"
#include "zetasdp/report.hpp"
#include "zetasdp/rigor.hpp"
#include "zetasdp/sdpcore.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace zetasdp;
namespace fs = std::filesystem;

namespace {

// Verified Z bound at d = 12 from this implementation, frozen after the first
// run of criterion 5. Later runs must reproduce it.
const char* const kGoldenZ12 = "1.32091958";
const char* const kGoldenZ12Tolerance = "1e-5";

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Cli {
  int code;
  std::string out, err;
};

Cli cli(std::vector<std::string> args) {
  args.insert(args.begin(), "zetasdp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const Real& x, int digits = 12) { return format_real(x, digits); }

std::string fmt(const mpq_class& q, int decimals, BoundDirection dir) { return round_decimal(q, decimals, dir); }

fs::path g_work;

// 1. Closed forms 4/3 and 11/12 for the hat function.
Outcome baseline_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto hat = CandidateFunction::baseline(Baseline::Hat);
  const Real z = eval_Z(hat), two_minus_l = 2 - eval_L(hat);
  const double t = seconds_since(t0);
  const Real ez = abs(z - Real(4) / 3), el = abs(two_minus_l - Real(11) / 12);
  Outcome o;
  o.passed = ez < Real("1e-12") && el < Real("1e-12") && t < 1;
  o.detail = "Z(Hat) = " + fmt(z, 16) + " (err " + fmt(ez, 3) + "), 2-L(Hat) = " + fmt(two_minus_l, 16) + " (err " +
             fmt(el, 3) + "), " + std::to_string(t) + " s";
  return o;
}

// 2. The P crossing of the hat function inside [0.67, 0.69].
Outcome montgomery_threshold() {
  const auto t0 = std::chrono::steady_clock::now();
  CrossingOptions opts;
  opts.tol = Real("1e-10");
  const Real p = last_positive_crossing(CandidateFunction::baseline(Baseline::Hat), FunctionalTag::P, opts);
  const double t = seconds_since(t0);
  Outcome o;
  o.passed = p >= Real("0.67") && p <= Real("0.69") && t < 1;
  o.detail = "P(Hat) = " + fmt(p, 10) + ", window [0.67, 0.69], " + std::to_string(t) + " s";
  return o;
}

// 3. Fourier twice is the identity on even Gaussian-weighted polynomials.
Outcome fourier_involution() {
  const auto t0 = std::chrono::steady_clock::now();
  ScopedPrecision precision(256);
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> degree(0, 20);  // in y = x^2, so degree <= 40 in x
  std::uniform_real_distribution<double> u(-1, 1);
  Real worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Vector c(static_cast<std::size_t>(degree(rng)) + 1);
    for (auto& v : c) v = Real(u(rng));
    const auto f = GaussianPoly::monomial(c);
    const Vector back = fourier(fourier(f)).monomial_coeffs();
    for (std::size_t k = 0; k < back.size(); ++k) {
      const Real want = k < c.size() ? c[k] : Real(0);
      worst = std::max(worst, Real(abs(back[k] - want)));
    }
  }
  const double t = seconds_since(t0);
  const Real limit = pow(Real(2), -100);
  Outcome o;
  o.passed = worst < limit && t < 10;
  o.detail = "max coefficient error " + fmt(worst, 3) + " (limit 2^-100 = " + fmt(limit, 3) + "), " +
             std::to_string(t) + " s";
  return o;
}

// 4. Random small SDPs with planted optima.
Outcome solver_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(4);
  int checked = 0, bad = 0;
  Real worst = 0;
  while (checked < 30) {
    const auto planted = oracle::planted_sdp(rng);
    SdpSolution s;
    try {
      s = solve(planted.problem);
    } catch (const std::invalid_argument&) {
      continue;  // dependent random rows; draw again
    }
    ++checked;
    const Real err = abs(s.primal_objective - planted.optimum);
    worst = std::max(worst, err);
    if (s.status != SdpStatus::Optimal || err >= Real("1e-6")) ++bad;
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.passed = bad == 0 && t < 30;
  o.detail = std::to_string(checked) + " problems, " + std::to_string(bad) + " off, max objective error " +
             fmt(worst, 3) + ", " + std::to_string(t) + " s";
  return o;
}

struct Solved {
  int code = 0;
  std::string err;
  std::optional<BoundReport> report;
  fs::path cert;
  double seconds = 0;
};

Solved solve_with_cli(FunctionalTag kind, int d) {
  Solved s;
  s.cert = g_work / (to_string(kind) + "-" + std::to_string(d) + ".txt");
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = cli({"solve", "--kind", to_string(kind), "--d", std::to_string(d), "--out", s.cert.string(),
                      "--style", "machine", "--quiet"});
  s.seconds = seconds_since(t0);
  s.code = r.code;
  s.err = r.err;
  if (r.code == cli::kOk) s.report = parse_machine_report(r.out);
  return s;
}

// 5. Z at d = 12 beats the hat and the frozen golden value; monotone in d.
Outcome desk_scale_z() {
  Outcome o;
  std::ostringstream detail;
  std::optional<mpq_class> previous;
  bool monotone = true;
  Solved last;
  for (int d : {6, 8, 10, 12}) {
    last = solve_with_cli(FunctionalTag::Z, d);
    if (!last.report) {
      o.detail = "d=" + std::to_string(d) + " exit " + std::to_string(last.code) + ": " + last.err;
      return o;
    }
    const mpq_class hi = last.report->bound.hi;
    detail << "d=" << d << " " << fmt(hi, 8, BoundDirection::Upper) << " (" << static_cast<int>(last.seconds) << " s); ";
    if (previous && hi > *previous) monotone = false;
    previous = hi;
  }
  const mpq_class c12 = last.report->bound.hi;
  const bool beats_hat = c12 < parse_decimal("1.3333");
  const bool target = c12 <= parse_decimal("1.3290");
  mpq_class drift = c12 - parse_decimal(kGoldenZ12);
  if (drift < 0) drift = -drift;
  const bool golden = drift <= parse_decimal(kGoldenZ12Tolerance);
  // Independent re-verification of the written file.
  const auto v = verify(read_certificate(last.cert));
  o.passed = v.verified() && beats_hat && target && golden && monotone && last.seconds < 600;
  detail << "verified=" << v.verified() << " <1.3333=" << beats_hat << " <=1.3290=" << target << " golden " << kGoldenZ12
         << "=" << golden << " monotone=" << monotone;
  o.detail = detail.str();
  return o;
}

// 6. P at d = 10 beats the hat threshold, with the normalizations proved.
Outcome desk_scale_p() {
  Outcome o;
  const Solved s = solve_with_cli(FunctionalTag::P, 10);
  if (!s.report) {
    o.detail = "exit " + std::to_string(s.code) + ": " + s.err;
    return o;
  }
  const auto v = verify(read_certificate(s.cert));
  std::set<std::string> passed;
  for (const auto& c : v.checks) {
    if (c.passed) passed.insert(c.name);
  }
  const bool checks = passed.count("p(lambda) > 0") && passed.count("f(0) <= 1") && passed.count("fhat(0) >= 1");
  const mpq_class lambda = s.report->bound.hi;
  o.passed = v.verified() && checks && lambda < parse_decimal("0.68") && s.seconds < 600;
  o.detail = "lambda = " + fmt(lambda, 8, BoundDirection::Upper) + ", verified=" + std::to_string(v.verified()) +
             ", normalization and threshold checks " + (checks ? "pass" : "missing") + ", " +
             std::to_string(static_cast<int>(s.seconds)) + " s";
  return o;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

// 7. Tampered certificates are rejected with the right named failure.
Outcome adversarial() {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  const fs::path z8 = fs::path(ZETASDP_TEST_DATA_DIR) / "Z-8.txt";
  const SosCertificate base = read_certificate(z8);
  const auto v0 = verify(base);
  if (!v0.verified()) {
    o.detail = "fixture does not verify";
    return o;
  }
  // Above the repair threshold (1+2d)(b+B) by a factor of 4.
  const Real delta = 4 * (1 + 2 * base.d) * (v0.b->hi() + v0.B.hi());

  const fs::path pcert = g_work / "P-3.txt";
  const auto p = cli({"solve", "--kind", "P", "--d", "3", "--out", pcert.string(), "--quiet"});
  if (p.code != cli::kOk) {
    o.detail = "P d=3 solve failed: " + p.err;
    return o;
  }

  struct Case {
    std::string name;
    std::function<void(const fs::path&)> make;
    int exit_code;
    std::string message;
  };
  auto edited = [&](std::function<void(SosCertificate&)> edit) {
    return [&base, edit](const fs::path& out) {
      SosCertificate c = base;
      edit(c);
      write_certificate(c, out);
    };
  };
  const std::size_t n = static_cast<std::size_t>(base.d);
  const std::vector<Case> cases = {
      {"X2 sign flip", edited([](SosCertificate& c) { c.X2(0, 0) = -c.X2(0, 0); }), cli::kVerifyFailure,
       "X2 positive definite"},
      {"X3 sign flip", edited([](SosCertificate& c) { c.X3(1, 1) = -c.X3(1, 1); }), cli::kVerifyFailure,
       "X3 positive definite"},
      {"X4 sign flip", edited([](SosCertificate& c) { c.X4(0, 0) = -c.X4(0, 0); }), cli::kVerifyFailure,
       "X4 positive definite"},
      {"X3 diagonal perturbation", edited([&](SosCertificate& c) { c.X3(2, 2) += delta; }), cli::kVerifyFailure,
       "residual absorbed"},
      {"X4 corner perturbation", edited([&](SosCertificate& c) { c.X4(n, n) += delta; }), cli::kVerifyFailure,
       "residual absorbed"},
      {"X2 diagonal perturbation", edited([&](SosCertificate& c) { c.X2(3, 3) += delta; }), cli::kVerifyFailure,
       "residual absorbed"},
      {"radius shift", edited([](SosCertificate& c) { c.R += Real("1e-3"); }), cli::kVerifyFailure,
       "residual absorbed"},
      {"truncated file",
       [&](const fs::path& out) {
         // Cut through the middle of the X4 line and drop what follows.
         const std::string text = read_text(z8);
         const auto coeffs = text.rfind('\n', text.size() - 2);
         const auto x4 = text.rfind('\n', coeffs - 1) + 1;
         const auto cut = text.find(' ', x4 + (coeffs - x4) / 2);
         write_text(out, text.substr(0, cut) + "\n");
       },
       cli::kIoFailure, "dimension mismatch"},
      {"header degree", [&](const fs::path& out) {
         std::string text = read_text(z8);
         text.replace(text.find("d=8"), 3, "d=7");
         write_text(out, text);
       },
       cli::kIoFailure, "dimension mismatch"},
      {"lambda lowered",
       [&](const fs::path& out) {
         SosCertificate c = read_certificate(pcert);
         c.lambda = *c.lambda - Real("0.05");
         c.kind = FunctionalKind(c.kind.tag(), c.lambda);
         write_certificate(c, out);
       },
       cli::kVerifyFailure, "p(lambda) > 0"},
  };
  int rejected = 0;
  std::ostringstream misses;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const fs::path file = g_work / ("tampered-" + std::to_string(i) + ".txt");
    cases[i].make(file);
    const auto r = cli({"verify", file.string()});
    if (r.code == cases[i].exit_code && r.err.find(cases[i].message) != std::string::npos) {
      ++rejected;
    } else {
      misses << " [" << cases[i].name << ": exit " << r.code << ", " << r.err.substr(0, r.err.find('\n')) << "]";
    }
  }
  const double t = seconds_since(t0);
  o.passed = rejected == static_cast<int>(cases.size()) && t < 60;
  o.detail = std::to_string(rejected) + "/" + std::to_string(cases.size()) + " rejected with the named failure" +
             misses.str() + ", " + std::to_string(t) + " s";
  return o;
}

// 8. d = 40 against the published constants (long-running, optional).
Outcome paper_scale() {
  Outcome o;
  o.passed = true;
  struct Target {
    FunctionalTag kind;
    const char* value;
    bool two_minus;  // L is compared as 2 - L >= value
  };
  std::ostringstream detail;
  for (const Target& t : {Target{FunctionalTag::Z, "1.3208", false}, Target{FunctionalTag::ZTilde, "1.3155", false},
                          Target{FunctionalTag::P, "0.6039", false}, Target{FunctionalTag::PTilde, "0.5769", false},
                          Target{FunctionalTag::Z1, "1.1175", false}, Target{FunctionalTag::L, "0.9350", true}}) {
    const fs::path cert = g_work / (to_string(t.kind) + "-40.txt");
    const auto r = cli({"solve", "--kind", to_string(t.kind), "--d", "40", "--precision", "320", "--out",
                        cert.string(), "--style", "machine", "--quiet"});
    if (r.code != cli::kOk) {
      o.passed = false;
      detail << to_string(t.kind) << " exit " << r.code << "; ";
      continue;
    }
    const auto rep = parse_machine_report(r.out);
    const mpq_class target = parse_decimal(t.value), tol = parse_decimal("5e-4");
    const bool ok = t.two_minus ? 2 - rep.bound.hi >= target - tol : rep.bound.hi <= target + tol;
    o.passed = o.passed && ok;
    detail << to_string(t.kind) << " " << fmt(rep.bound.hi, 6, BoundDirection::Upper) << (ok ? " ok" : " off") << "; ";
  }
  o.detail = detail.str();
  return o;
}

// 9. Derived constants from the published theorem constants.
Outcome corollary_arithmetic() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Expect {
    FunctionalTag kind;
    const char* bound;
    const char* name;
    const char* printed;
  };
  const std::vector<Expect> expects = {
      {FunctionalTag::Z, "1.3208", "N_s", "0.6792"},      {FunctionalTag::ZTilde, "1.3155", "N_s", "0.6845"},
      {FunctionalTag::Z, "1.3208", "N_d", "0.8477"},      {FunctionalTag::ZTilde, "1.3155", "N_d", "0.8486"},
      {FunctionalTag::Z1, "1.1175", "N_1s", "0.8825"},    {FunctionalTag::Z1, "1.1175", "N_1d", "0.9412"},
  };
  int ok = 0;
  std::ostringstream detail;
  for (const auto& e : expects) {
    const auto r = derive_constants(e.kind, ExactInterval(parse_decimal(e.bound)));
    for (const auto& c : r.derived) {
      if (c.name != e.name) continue;
      const std::string printed = printed_value(c, 4);
      // Lower bounds may only be rounded down.
      const bool valid = parse_decimal(printed) <= c.value.lo;
      if (printed == e.printed && valid) ++ok;
      detail << e.name << "(" << e.bound << ")=" << printed << " ";
    }
  }
  const double t = seconds_since(t0);
  Outcome o;
  o.passed = ok == static_cast<int>(expects.size()) && t < 1;
  o.detail = detail.str() + std::to_string(ok) + "/" + std::to_string(expects.size()) + " exact, " + std::to_string(t) + " s";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only;
  bool paper = false;
  g_work = fs::temp_directory_path() / "zetasdp_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only.insert(std::atoi(argv[++i]));
    } else if (a == "--paper-scale") {
      paper = true;
    } else if (a == "--work-dir" && i + 1 < argc) {
      g_work = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only N]... [--paper-scale] [--work-dir DIR]\n";
      return 64;
    }
  }
  fs::create_directories(g_work);
  if (only.count(8)) paper = true;

  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
    bool optional;
  };
  const std::vector<Criterion> criteria = {
      {1, "baseline exactness", baseline_exactness, false},
      {2, "Montgomery threshold", montgomery_threshold, false},
      {3, "Fourier involution", fourier_involution, false},
      {4, "SDP solver oracle", solver_oracle, false},
      {5, "desk-scale Z", desk_scale_z, false},
      {6, "desk-scale P", desk_scale_p, false},
      {7, "adversarial soundness", adversarial, false},
      {8, "paper-scale reproduction", paper_scale, true},
      {9, "corollary arithmetic", corollary_arithmetic, false},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    if (c.optional && !paper) {
      std::cout << "[SKIP] " << c.id << " " << c.name << ": optional, run with --paper-scale\n" << std::flush;
      continue;
    }
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.passed) ++failures;
    std::cout << (o.passed ? "[PASS] " : "[FAIL] ") << c.id << " " << c.name << ": " << o.detail << '\n' << std::flush;
  }
  return failures == 0 ? 0 : 1;
}
