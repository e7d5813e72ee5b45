#pragma once

#include "zetasdp/functionals.hpp"
#include "zetasdp/search.hpp"

#include <gmpxx.h>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace zetasdp::cli {

enum ExitCode {
  kOk = 0,
  kSolveFailure = 1,
  kVerifyFailure = 2,
  kIoFailure = 3,
  kUsage = 64,
};

enum class Command { Solve, Verify, Report, Baseline, Export };

struct RunConfig {
  Command command = Command::Solve;
  std::optional<FunctionalTag> kind;
  std::optional<int> d;
  unsigned precision = 256;
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> cert;
  // solve: fixed radius instead of the search over R; export: the radius.
  std::optional<Real> R;
  std::optional<Real> lambda;
  std::vector<int> sweep;
  unsigned jobs = 1;
  int decimals = 100;
  int digits = 4;
  bool machine = false;
  bool certify = false;  // export: the analytic-center problem
  std::optional<Real> cap;
  std::optional<mpq_class> bound;  // report without a certificate
  SearchConfig search;
  bool quiet = false;
};

// Settings by key, before typing. Later sources override earlier ones.
using Settings = std::map<std::string, std::string>;

// key=value lines; '#' starts a comment. Throws std::runtime_error on a
// malformed line or unreadable file.
Settings read_config_file(const std::filesystem::path& path);
// ZETASDP_<KEY> with the key upper-cased and '-' as '_'.
Settings read_environment(const std::vector<std::string>& keys);

// "4..12", "d=4..12", "4..12:2" or "6,8,10". Throws std::invalid_argument.
std::vector<int> parse_sweep(const std::string& text);

// Typed configuration from merged settings. Throws std::invalid_argument
// naming the offending key.
RunConfig build_config(Command command, const Settings& settings);

// Runs one command line; output to `out`, logs and diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace zetasdp::cli
