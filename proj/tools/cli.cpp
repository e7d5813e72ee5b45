#include "cli.hpp"

#include "zetasdp/certio.hpp"
#include "zetasdp/report.hpp"
#include "zetasdp/rigor.hpp"
#include "zetasdp/sosmodel.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

namespace zetasdp::cli {

namespace {

// Every setting the tool understands, as spelled on the command line.
const std::vector<std::string> kKeys = {
    "kind",      "d",          "precision", "out",        "cert",         "R",          "lambda",
    "sweep",     "jobs",       "decimals",  "digits",     "style",        "certify",    "cap",
    "bound",     "r-lo",      "r-hi",       "brent-tol",    "lambda-lo",  "lambda-hi",
    "lambda-tol", "margin",    "lambda-bump", "series-terms", "tail-bound", "quiet",
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::invalid_argument bad(const std::string& key, const std::string& value, const std::string& why = "") {
  return std::invalid_argument("bad value for --" + key + ": '" + value + "'" + (why.empty() ? "" : " (" + why + ")"));
}

long parse_int(const std::string& key, const std::string& value) {
  std::size_t used = 0;
  long v = 0;
  try {
    v = std::stol(value, &used);
  } catch (const std::exception&) {
    throw bad(key, value);
  }
  if (used != value.size()) throw bad(key, value);
  return v;
}

Real parse_positive_real(const std::string& key, const std::string& value, bool allow_negative = false) {
  Real x;
  try {
    x = parse_real(value);
  } catch (const std::exception&) {
    throw bad(key, value);
  }
  if (!allow_negative && x <= 0) throw bad(key, value, "must be positive");
  return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = value;
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw bad(key, value);
}

}  // namespace

Settings read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config '" + path.string() + "'");
  Settings s;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(number) + ": expected key=value");
    }
    s[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return s;
}

Settings read_environment(const std::vector<std::string>& keys) {
  Settings s;
  for (const auto& key : keys) {
    std::string name = "ZETASDP_";
    for (char c : key) name += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (const char* v = std::getenv(name.c_str())) s[key] = v;
  }
  return s;
}

std::vector<int> parse_sweep(const std::string& text) {
  std::string t = trim(text);
  if (t.rfind("d=", 0) == 0) t = t.substr(2);
  std::vector<int> out;
  auto number = [&](const std::string& s) {
    const long v = parse_int("sweep", trim(s));
    if (v < 1 || v > 64) throw bad("sweep", text, "degrees must lie in 1..64");
    return static_cast<int>(v);
  };
  if (const auto dots = t.find(".."); dots != std::string::npos) {
    std::string rest = t.substr(dots + 2);
    int step = 1;
    if (const auto colon = rest.find(':'); colon != std::string::npos) {
      step = number(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const int lo = number(t.substr(0, dots)), hi = number(rest);
    if (lo > hi) throw bad("sweep", text, "empty range");
    for (int d = lo; d <= hi; d += step) out.push_back(d);
  } else {
    std::stringstream ss(t);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(number(item));
  }
  if (out.empty()) throw bad("sweep", text);
  return out;
}

RunConfig build_config(Command command, const Settings& settings) {
  RunConfig c;
  c.command = command;
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = settings.find(key);
    if (it == settings.end()) return std::nullopt;
    return it->second;
  };
  for (const auto& [key, value] : settings) {
    if (key != "config" && std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw std::invalid_argument("unknown setting '" + key + "'");
    }
  }
  if (auto v = get("kind")) {
    try {
      c.kind = parse_functional_tag(*v);
    } catch (const std::exception&) {
      throw bad("kind", *v, "one of Z, ZTilde, L, Z1, P, PTilde");
    }
  }
  c.search = SearchConfig::defaults_for(c.kind.value_or(FunctionalTag::Z));
  if (auto v = get("d")) {
    const long d = parse_int("d", *v);
    if (d < 1 || d > 64) throw bad("d", *v, "must lie in 1..64");
    c.d = static_cast<int>(d);
  }
  if (auto v = get("precision")) {
    const long p = parse_int("precision", *v);
    if (p < 64 || p > 100000) throw bad("precision", *v, "at least 64 bits");
    c.precision = static_cast<unsigned>(p);
  }
  if (auto v = get("out")) c.out = *v;
  if (auto v = get("cert")) c.cert = *v;
  if (auto v = get("sweep")) c.sweep = parse_sweep(*v);
  if (auto v = get("jobs")) {
    const long j = parse_int("jobs", *v);
    if (j < 1) throw bad("jobs", *v, "must be positive");
    c.jobs = static_cast<unsigned>(j);
  }
  if (auto v = get("decimals")) {
    c.decimals = static_cast<int>(parse_int("decimals", *v));
    if (c.decimals < 20) throw bad("decimals", *v, "at least 20");
  }
  if (auto v = get("digits")) {
    c.digits = static_cast<int>(parse_int("digits", *v));
    if (c.digits < 0 || c.digits > 60) throw bad("digits", *v);
  }
  if (auto v = get("style")) {
    if (*v != "text" && *v != "machine") throw bad("style", *v, "text or machine");
    c.machine = *v == "machine";
  }
  if (auto v = get("certify")) c.certify = parse_bool("certify", *v);
  if (auto v = get("quiet")) c.quiet = parse_bool("quiet", *v);
  if (auto v = get("bound")) {
    try {
      c.bound = parse_decimal(*v);
    } catch (const std::exception&) {
      throw bad("bound", *v);
    }
  }
  // Numbers are read once the working precision is known.
  {
    ScopedPrecision scope(c.precision);
    if (auto v = get("R")) c.R = parse_positive_real("R", *v);
    if (auto v = get("lambda")) c.lambda = parse_positive_real("lambda", *v);
    if (auto v = get("cap")) c.cap = parse_positive_real("cap", *v, true);
    auto& s = c.search;
    if (auto v = get("r-lo")) s.R_lo = parse_positive_real("r-lo", *v);
    if (auto v = get("r-hi")) s.R_hi = parse_positive_real("r-hi", *v);
    if (auto v = get("brent-tol")) s.brent_tol = parse_positive_real("brent-tol", *v);
    if (auto v = get("lambda-lo")) s.lambda_lo = parse_positive_real("lambda-lo", *v);
    if (auto v = get("lambda-hi")) s.lambda_hi = parse_positive_real("lambda-hi", *v);
    if (auto v = get("lambda-tol")) s.lambda_tol = parse_positive_real("lambda-tol", *v);
    if (auto v = get("margin")) s.resolve_margin = parse_positive_real("margin", *v);
    if (auto v = get("lambda-bump")) s.lambda_bump = parse_positive_real("lambda-bump", *v);
    if (auto v = get("series-terms")) {
      s.trunc.K = static_cast<int>(parse_int("series-terms", *v));
      if (s.trunc.K < 1) throw bad("series-terms", *v, "must be positive");
    }
    if (auto v = get("tail-bound")) s.trunc.tail_bound = parse_positive_real("tail-bound", *v, true);
    if (s.trunc.tail_bound < 0) throw bad("tail-bound", *get("tail-bound"), "must be nonnegative");
    s.inner.precision_bits = c.precision;
    s.certify.precision_bits = c.precision;
    s.validate();
  }

  auto require_kind = [&] {
    if (!c.kind) throw std::invalid_argument("--kind is required");
  };
  switch (command) {
    case Command::Solve:
      require_kind();
      if (!c.d && c.sweep.empty()) throw std::invalid_argument("--d or --sweep is required");
      if (c.d && !c.sweep.empty()) throw std::invalid_argument("--d and --sweep are exclusive");
      if (c.R && (*c.R < c.search.R_lo || *c.R > c.search.R_hi)) {
        // A fixed radius widens the bracket so validation still holds.
        c.search.R_lo = std::min(c.search.R_lo, *c.R);
        c.search.R_hi = std::max(c.search.R_hi, *c.R);
      }
      break;
    case Command::Verify:
      if (!c.cert) throw std::invalid_argument("a certificate path is required");
      break;
    case Command::Report:
      if (!c.cert && !c.bound) throw std::invalid_argument("a certificate path or --bound is required");
      if (!c.cert) require_kind();
      break;
    case Command::Baseline:
      break;
    case Command::Export:
      require_kind();
      if (!c.d) throw std::invalid_argument("--d is required");
      if (!c.R) throw std::invalid_argument("--R is required");
      if (is_threshold_kind(*c.kind) && !c.lambda) throw std::invalid_argument("--lambda is required for " + to_string(*c.kind));
      if (c.certify && !is_threshold_kind(*c.kind) && !c.cap) throw std::invalid_argument("--certify needs --cap for " + to_string(*c.kind));
      break;
  }
  return c;
}

namespace {

struct Outcome {
  int code = kOk;
  std::string out, err;
};

std::filesystem::path certificate_path(const RunConfig& c, int d, bool sweeping) {
  const std::string name = to_string(*c.kind) + "-" + std::to_string(d) + ".txt";
  if (!c.out) return name;
  if (sweeping) return *c.out / name;
  return *c.out;
}

ReportStyle style(const RunConfig& c) { return c.machine ? ReportStyle::Machine : ReportStyle::Text; }

ReportOptions report_options(const RunConfig& c) {
  ReportOptions o;
  o.digits = c.digits;
  return o;
}

// Report for a verified certificate: the functional enclosure, or lambda.
BoundReport report_for(const SosCertificate& cert, const VerificationReport& v, const RunConfig& c) {
  const ExactInterval bound = is_threshold_kind(cert.kind.tag()) ? ExactInterval(Interval(*cert.lambda))
                                                                 : ExactInterval(*v.functional_bound);
  return derive_constants(cert.kind.tag(), bound, report_options(c));
}

void describe_failure(const VerificationReport& v, std::ostream& err) {
  for (const auto& check : v.checks) {
    if (!check.passed) err << "verification failed: " << check.name << (check.detail.empty() ? "" : ": " + check.detail) << '\n';
  }
}

// Reads and verifies; I/O and parse problems map to exit 3.
Outcome verify_file(const std::filesystem::path& path, const RunConfig& c, std::optional<SosCertificate>* keep,
                    std::optional<VerificationReport>* report) {
  Outcome o;
  std::ostringstream err;
  SosCertificate cert;
  try {
    cert = read_certificate(path, ReadExpectations{c.kind, c.d});
  } catch (const std::exception& e) {
    o.code = kIoFailure;
    o.err = path.string() + ": " + e.what() + "\n";
    return o;
  }
  VerifyOptions opts;
  opts.trunc = c.search.trunc;
  const VerificationReport v = verify(cert, opts);
  if (!v.verified()) {
    describe_failure(v, err);
    o.code = kVerifyFailure;
  }
  o.err = err.str();
  if (keep) *keep = std::move(cert);
  if (report) *report = v;
  return o;
}

Outcome solve_one(const RunConfig& c, int d, bool sweeping) {
  Outcome o;
  std::ostringstream log;
  SearchConfig cfg = c.search;
  if (!c.quiet) cfg.log = &log;
  const FunctionalTag tag = *c.kind;
  std::optional<SosCertificate> cert;
  try {
    if (is_threshold_kind(tag)) {
      const ThresholdResult r = c.R ? threshold_at_radius(tag, d, *c.R, cfg) : threshold_minimize(tag, d, cfg);
      cert = resolve_for_certificate(FunctionalKind(tag, r.lambda), d, r.R, r.lambda, cfg);
    } else {
      const FunctionalKind kind(tag);
      Real R, value;
      if (c.R) {
        AssembleOptions opts;
        opts.trunc = cfg.trunc;
        const SdpSolution sol = solve(assemble(SosParameterization{d, *c.R, true}, kind, opts), cfg.inner);
        if (sol.status != SdpStatus::Optimal) throw std::runtime_error("inner solve ended " + to_string(sol.status));
        R = *c.R;
        value = sol.primal_objective;
      } else {
        const OuterResult r = outer_minimize(kind, d, cfg);
        R = r.R;
        value = r.value;
      }
      cert = resolve_for_certificate(kind, d, R, value, cfg);
    }
  } catch (const std::exception& e) {
    o.code = kSolveFailure;
    o.err = log.str() + to_string(tag) + " d=" + std::to_string(d) + ": solve failed: " + e.what() + "\n";
    return o;
  }
  const auto path = certificate_path(c, d, sweeping);
  try {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_certificate(*cert, path, c.decimals);
  } catch (const std::exception& e) {
    o.code = kIoFailure;
    o.err = log.str() + path.string() + ": " + e.what() + "\n";
    return o;
  }
  // The written file, not the in-memory solution, is what gets verified.
  std::optional<SosCertificate> reread;
  std::optional<VerificationReport> v;
  RunConfig expect = c;
  expect.d = d;
  Outcome checked = verify_file(path, expect, &reread, &v);
  o.code = checked.code;
  o.err = log.str() + checked.err;
  if (o.code != kOk) return o;
  std::ostringstream out;
  if (!c.machine) out << "certificate " << path.string() << " (d=" << d << ", R=" << format_real(reread->R, 20) << ")\n";
  out << format_report(report_for(*reread, *v, c), style(c));
  o.out = out.str();
  return o;
}

int run_solve(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const bool sweeping = !c.sweep.empty();
  const std::vector<int> degrees = sweeping ? c.sweep : std::vector<int>{*c.d};
  std::vector<Outcome> outcomes(degrees.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    ScopedPrecision scope(c.precision);
    for (std::size_t i; (i = next++) < degrees.size();) outcomes[i] = solve_one(c, degrees[i], sweeping);
  };
  const unsigned jobs = std::min<unsigned>(c.jobs, static_cast<unsigned>(degrees.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  int code = kOk;
  for (const auto& o : outcomes) {
    out << o.out;
    err << o.err;
    code = std::max(code, o.code);
  }
  return code;
}

int run_verify(const RunConfig& c, std::ostream& out, std::ostream& err) {
  std::optional<VerificationReport> v;
  const Outcome o = verify_file(*c.cert, c, nullptr, &v);
  err << o.err;
  if (!v) return o.code;
  if (c.machine) {
    out << verdict_json(*v) << '\n';
  } else {
    for (const auto& check : v->checks) out << (check.passed ? "PASS  " : "FAIL  ") << check.name << '\n';
    if (v->functional_bound) out << "functional  " << format_interval(*v->functional_bound) << '\n';
    out << (v->verified() ? "verified" : "not verified") << '\n';
  }
  return o.code;
}

int run_report(const RunConfig& c, std::ostream& out, std::ostream& err) {
  if (!c.cert) {
    out << format_report(derive_constants(*c.kind, ExactInterval(*c.bound), report_options(c)), style(c));
    return kOk;
  }
  std::optional<SosCertificate> cert;
  std::optional<VerificationReport> v;
  const Outcome o = verify_file(*c.cert, c, &cert, &v);
  err << o.err;
  if (o.code != kOk) return o.code;
  out << format_report(report_for(*cert, *v, c), style(c));
  return kOk;
}

int run_baseline(const RunConfig& c, std::ostream& out) {
  const int digits = c.digits < 8 ? 12 : c.digits;
  std::vector<BaselineRow> rows;
  for (auto b : {Baseline::Hat, Baseline::Selberg}) rows.push_back(baseline_values(b, c.search.trunc));
  const std::vector<std::string> columns = {"Z", "ZTilde", "L", "2-L", "Z1", "P", "PTilde"};
  auto values = [&](const BaselineRow& r) {
    return std::vector<Real>{r.Z, r.ZTilde, r.L, Real(2 - r.L), r.Z1, r.P, r.PTilde};
  };
  if (c.machine) {
    out << "{\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      out << "  \"" << to_string(rows[i].baseline) << "\": {";
      const auto v = values(rows[i]);
      for (std::size_t k = 0; k < v.size(); ++k) {
        out << (k ? ", " : "") << '"' << columns[k] << "\": \"" << format_real(v[k], digits) << '"';
      }
      out << '}' << (i + 1 < rows.size() ? "," : "") << '\n';
    }
    out << "}\n";
    return kOk;
  }
  out << "baseline";
  for (const auto& col : columns) out << '\t' << col;
  out << '\n';
  for (const auto& r : rows) {
    out << to_string(r.baseline);
    for (const auto& v : values(r)) out << '\t' << format_real(v, digits);
    out << '\n';
  }
  return kOk;
}

int run_export(const RunConfig& c, std::ostream& out, std::ostream& err) {
  const FunctionalKind kind = is_threshold_kind(*c.kind) ? FunctionalKind(*c.kind, *c.lambda) : FunctionalKind(*c.kind);
  AssembleOptions opts;
  opts.trunc = c.search.trunc;
  if (c.certify) {
    opts.mode = AssembleMode::Certify;
    opts.objective_cap = c.cap;
  }
  const SdpProblem problem = assemble(SosParameterization{*c.d, *c.R, true}, kind, opts);
  if (!c.out) {
    export_problem(problem, out);
    return kOk;
  }
  std::ofstream file(*c.out);
  if (!file) {
    err << c.out->string() << ": cannot write\n";
    return kIoFailure;
  }
  export_problem(problem, file);
  if (!file) {
    err << c.out->string() << ": write failed\n";
    return kIoFailure;
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certified SDP bounds for pair-correlation functionals of zeta zeros", "zetasdp"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Expand all help");
  Settings given;
  bool certify_flag = false, quiet_flag = false;
  std::string config_path;
  app.add_option("--config", config_path, "key=value file (defaults < file < ZETASDP_* env < flags)");
  app.add_option("--kind", given["kind"], "Z, ZTilde, L, Z1, P or PTilde");
  app.add_option("--d", given["d"], "Degree of the Laguerre basis");
  app.add_option("--precision", given["precision"], "Working precision in bits (default 256)");
  app.add_option("--out", given["out"], "Output file (a directory with --sweep)");
  app.add_option("--cert", given["cert"], "Certificate file");
  app.add_option("--R", given["R"], "Fixed radius instead of searching over R");
  app.add_option("--lambda", given["lambda"], "Threshold (export of P, PTilde)");
  app.add_option("--sweep", given["sweep"], "Degrees: 4..12, 4..12:2 or 6,8,10");
  app.add_option("--jobs", given["jobs"], "Parallel solves in a sweep");
  app.add_option("--decimals", given["decimals"], "Digits written per certificate entry");
  app.add_option("--digits", given["digits"], "Decimals of the derived constants");
  app.add_option("--style", given["style"], "text or machine");
  app.add_flag("--certify", certify_flag, "Export the analytic-center problem");
  app.add_option("--cap", given["cap"], "Objective cap for --certify");
  app.add_option("--bound", given["bound"], "Report from a bound instead of a certificate");
  app.add_option("--r-lo", given["r-lo"], "Radius bracket, lower end");
  app.add_option("--r-hi", given["r-hi"], "Radius bracket, upper end");
  app.add_option("--brent-tol", given["brent-tol"], "Radius tolerance");
  app.add_option("--lambda-lo", given["lambda-lo"], "Threshold bracket, lower end");
  app.add_option("--lambda-hi", given["lambda-hi"], "Threshold bracket, upper end");
  app.add_option("--lambda-tol", given["lambda-tol"], "Threshold tolerance");
  app.add_option("--margin", given["margin"], "Objective slack of the certificate solve");
  app.add_option("--lambda-bump", given["lambda-bump"], "Threshold slack of the certificate solve");
  app.add_option("--series-terms", given["series-terms"], "Terms kept of the Z1 series");
  app.add_option("--tail-bound", given["tail-bound"], "Bound on the dropped Z1 series terms");
  app.add_flag("--quiet", quiet_flag, "No progress lines");

  std::map<CLI::App*, Command> commands;
  commands[app.add_subcommand("solve", "Search and write a verified certificate")] = Command::Solve;
  auto* verify_cmd = app.add_subcommand("verify", "Check a certificate in interval arithmetic");
  commands[verify_cmd] = Command::Verify;
  auto* report_cmd = app.add_subcommand("report", "Derived constants from a certificate or a bound");
  commands[report_cmd] = Command::Report;
  commands[app.add_subcommand("baseline", "Functionals of the hat and Selberg functions")] = Command::Baseline;
  commands[app.add_subcommand("export", "Write the SDP in SDPA sparse format")] = Command::Export;
  std::string positional;
  verify_cmd->add_option("certificate", positional, "Certificate file");
  report_cmd->add_option("certificate", positional, "Certificate file");
  for (auto& [sub, _] : commands) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
      out << (dynamic_cast<const CLI::CallForAllHelp*>(&e) ? app.help("", CLI::AppFormatMode::All) : app.help());
      return kOk;
    }
    err << "usage error: " << e.what() << "\nRun with --help for usage.\n";
    return kUsage;
  }

  Command command = Command::Solve;
  for (auto& [sub, cmd] : commands) {
    if (sub->parsed()) command = cmd;
  }
  Settings flags;
  for (const auto& [key, value] : given) {
    if (app.count("--" + key) > 0) flags[key] = value;
  }
  if (certify_flag) flags["certify"] = "true";
  if (quiet_flag) flags["quiet"] = "true";
  if (!positional.empty()) flags["cert"] = positional;

  RunConfig config;
  try {
    Settings merged;
    Settings env = read_environment(kKeys);
    if (config_path.empty()) {
      if (const char* p = std::getenv("ZETASDP_CONFIG")) config_path = p;
    }
    if (!config_path.empty()) {
      try {
        merged = read_config_file(config_path);
      } catch (const std::runtime_error& e) {
        err << e.what() << '\n';
        return kIoFailure;
      }
    }
    for (const auto& [k, v] : env) merged[k] = v;
    for (const auto& [k, v] : flags) merged[k] = v;
    config = build_config(command, merged);
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  }

  ScopedPrecision scope(config.precision);
  try {
    switch (config.command) {
      case Command::Solve: return run_solve(config, out, err);
      case Command::Verify: return run_verify(config, out, err);
      case Command::Report: return run_report(config, out, err);
      case Command::Baseline: return run_baseline(config, out);
      case Command::Export: return run_export(config, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kSolveFailure;
  }
  return kOk;
}

}  // namespace zetasdp::cli
