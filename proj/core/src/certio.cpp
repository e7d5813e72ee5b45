#include "zetasdp/certio.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace zetasdp {

namespace {

struct Token {
  std::string text;
  std::size_t column;  // 1-based
};

struct Line {
  std::size_t number;  // 1-based
  std::vector<Token> tokens;
};

std::vector<Token> split(const std::string& s) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i >= s.size()) break;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    out.push_back({s.substr(start, i - start), start + 1});
  }
  return out;
}

[[noreturn]] void dimension_error(const std::string& what) {
  throw CertioError(CertioError::Kind::DimensionMismatch, "dimension mismatch: " + what);
}

Real parse_token(const Line& line, const Token& tok) {
  try {
    return parse_real(tok.text);
  } catch (const std::invalid_argument&) {
    throw CertioError(CertioError::Kind::Parse, "parse error at line " + std::to_string(line.number) + " column " +
                                                    std::to_string(tok.column) + ": '" + tok.text + "'");
  }
}

// Significant digits written in a decimal token (mantissa only).
int significant_digits(const std::string& tok) {
  int digits = 0;
  bool leading = true;
  for (char c : tok) {
    if (c == 'e' || c == 'E') break;
    if (!std::isdigit(static_cast<unsigned char>(c))) continue;
    if (leading && c == '0') continue;
    leading = false;
    ++digits;
  }
  return std::max(digits, 1);
}

Matrix parse_matrix(const Line& line, std::size_t n, const char* name) {
  const std::size_t full = n * n, tri = n * (n + 1) / 2;
  const std::size_t count = line.tokens.size();
  if (count != full && count != tri) {
    dimension_error(std::string(name) + " on line " + std::to_string(line.number) + " has " + std::to_string(count) +
                    " entries, expected " + std::to_string(full) + " (full) or " + std::to_string(tri) + " (triangular)");
  }
  Matrix m(n, n);
  if (count == tri && tri != full) {
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j, ++k) {
        m(i, j) = parse_token(line, line.tokens[k]);
        m(j, i) = m(i, j);
      }
    }
    return m;
  }
  for (std::size_t k = 0; k < full; ++k) m(k / n, k % n) = parse_token(line, line.tokens[k]);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int digits = std::min(significant_digits(line.tokens[i * n + j].text), significant_digits(line.tokens[j * n + i].text));
      const Real scale = std::max(Real(abs(m(i, j))), Real(abs(m(j, i))));
      const Real tol = scale * pow(Real(10), 1 - digits);
      if (abs(m(i, j) - m(j, i)) > tol) {
        throw CertioError(CertioError::Kind::Parse, std::string(name) + " on line " + std::to_string(line.number) +
                                                        " is not symmetric at (" + std::to_string(i) + ", " +
                                                        std::to_string(j) + ")");
      }
      const Real mid = (m(i, j) + m(j, i)) / 2;
      m(i, j) = mid;
      m(j, i) = mid;
    }
  }
  return m;
}

Real parse_scalar(const Line& line, const char* name) {
  if (line.tokens.size() != 1) {
    dimension_error(std::string(name) + " on line " + std::to_string(line.number) + " should be a single number");
  }
  return parse_token(line, line.tokens[0]);
}

void write_matrix(std::ostream& out, const Matrix& m, int decimals) {
  bool first = true;
  for (const auto& v : m.values()) {
    if (!first) out << ' ';
    out << format_real(v, decimals);
    first = false;
  }
  out << '\n';
}

bool same(const Matrix& a, const Matrix& b) { return a.rows() == b.rows() && a.cols() == b.cols() && a == b; }

}  // namespace

void SosCertificate::validate() const {
  if (d < 1) throw std::invalid_argument("certificate degree must be at least 1");
  if (!(R > 0)) throw std::invalid_argument("certificate radius must be positive");
  if (is_threshold_kind(kind.tag()) != lambda.has_value()) {
    throw std::invalid_argument("lambda must be present exactly for the threshold kinds");
  }
  if (lambda && !(*lambda > 0)) throw std::invalid_argument("lambda must be positive");
  const auto n = static_cast<std::size_t>(d) + 1;
  for (const Matrix* m : {&X2, &X3, &X4}) {
    if (m->rows() != n || m->cols() != n) throw std::invalid_argument("Gram matrix size does not match d");
    if (!(*m == transpose(*m))) throw std::invalid_argument("Gram matrix is not symmetric");
  }
  if (!monomial_coeffs.empty() && monomial_coeffs.size() != 2 * n) {
    throw std::invalid_argument("coefficient line length does not match d");
  }
}

bool SosCertificate::operator==(const SosCertificate& o) const {
  return kind.tag() == o.kind.tag() && lambda == o.lambda && d == o.d && R == o.R && same(X2, o.X2) && same(X3, o.X3) &&
         same(X4, o.X4) && monomial_coeffs == o.monomial_coeffs;
}

void write_certificate(const SosCertificate& cert, std::ostream& out, int decimals) {
  cert.validate();
  out << "# kind=" << to_string(cert.kind.tag()) << " d=" << cert.d << '\n';
  out << format_real(cert.R, decimals) << '\n';
  write_matrix(out, cert.X2, decimals);
  write_matrix(out, cert.X3, decimals);
  write_matrix(out, cert.X4, decimals);
  if (cert.lambda) out << format_real(*cert.lambda, decimals) << '\n';
  for (std::size_t k = 0; k < cert.monomial_coeffs.size(); ++k) {
    if (k > 0) out << ' ';
    out << format_real(cert.monomial_coeffs[k], decimals);
  }
  out << '\n';
  if (!out) throw CertioError(CertioError::Kind::Io, "write failed");
}

void write_certificate(const SosCertificate& cert, const std::filesystem::path& path, int decimals) {
  std::ofstream out(path);
  if (!out) throw CertioError(CertioError::Kind::Io, "cannot open " + path.string() + " for writing");
  write_certificate(cert, out, decimals);
}

SosCertificate read_certificate(std::istream& in, const ReadExpectations& expect) {
  std::optional<FunctionalTag> header_kind;
  std::optional<int> header_d;
  std::vector<Line> lines;
  std::string text;
  std::size_t number = 0;
  while (std::getline(in, text)) {
    ++number;
    auto tokens = split(text);
    if (tokens.empty()) continue;
    if (tokens[0].text[0] == '#') {
      for (const auto& t : tokens) {
        const auto eq = t.text.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = t.text.substr(0, eq), value = t.text.substr(eq + 1);
        try {
          if (key == "kind") header_kind = parse_functional_tag(value);
          if (key == "d") header_d = std::stoi(value);
        } catch (const std::exception&) {
          throw CertioError(CertioError::Kind::Parse, "parse error at line " + std::to_string(number) + " column " +
                                                          std::to_string(t.column) + ": '" + t.text + "'");
        }
      }
      continue;
    }
    lines.push_back({number, std::move(tokens)});
  }
  if (in.bad()) throw CertioError(CertioError::Kind::Io, "read failed");

  if (header_kind && expect.kind && *header_kind != *expect.kind) {
    throw CertioError(CertioError::Kind::KindMismatch,
                      "kind mismatch: file has " + to_string(*header_kind) + ", expected " + to_string(*expect.kind));
  }
  const auto tag = header_kind ? header_kind : expect.kind;
  if (!tag) throw CertioError(CertioError::Kind::KindMismatch, "certificate has no kind header and none was given");
  if (header_d && expect.d && *header_d != *expect.d) {
    dimension_error("file has d=" + std::to_string(*header_d) + ", expected d=" + std::to_string(*expect.d));
  }

  const bool threshold = is_threshold_kind(*tag);
  const std::size_t base = threshold ? 5 : 4;
  if (lines.size() != base && lines.size() != base + 1) {
    dimension_error("expected " + std::to_string(base + 1) + " lines, found " + std::to_string(lines.size()));
  }

  std::optional<int> d = header_d ? header_d : expect.d;
  std::size_t n = 0;
  if (d) {
    if (*d < 1) dimension_error("d must be at least 1");
    n = static_cast<std::size_t>(*d) + 1;
  } else {
    // Prefer the full layout when the count is ambiguous.
    const std::size_t count = lines[1].tokens.size();
    const auto root = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(count))));
    if (root * root == count) {
      n = root;
    } else {
      const auto t = static_cast<std::size_t>(std::llround((std::sqrt(8.0 * static_cast<double>(count) + 1) - 1) / 2));
      if (t * (t + 1) / 2 != count) dimension_error("cannot infer d from " + std::to_string(count) + " entries");
      n = t;
    }
    if (n < 2) dimension_error("matrices must be at least 2x2");
  }

  SosCertificate cert;
  cert.d = static_cast<int>(n) - 1;
  cert.R = parse_scalar(lines[0], "R");
  cert.X2 = parse_matrix(lines[1], n, "X2");
  cert.X3 = parse_matrix(lines[2], n, "X3");
  cert.X4 = parse_matrix(lines[3], n, "X4");
  std::optional<Real> lambda;
  if (threshold) lambda = parse_scalar(lines[4], "lambda");
  cert.lambda = lambda;
  cert.kind = FunctionalKind(*tag, lambda);
  if (lines.size() == base + 1) {
    const Line& coeffs = lines[base];
    if (coeffs.tokens.size() != 2 * n) {
      dimension_error("coefficient line " + std::to_string(coeffs.number) + " has " + std::to_string(coeffs.tokens.size()) +
                      " entries, expected " + std::to_string(2 * n));
    }
    for (const auto& t : coeffs.tokens) cert.monomial_coeffs.push_back(parse_token(coeffs, t));
  }
  try {
    cert.validate();
  } catch (const std::invalid_argument& e) {
    throw CertioError(CertioError::Kind::Parse, e.what());
  }
  return cert;
}

SosCertificate read_certificate(const std::filesystem::path& path, const ReadExpectations& expect) {
  std::ifstream in(path);
  if (!in) throw CertioError(CertioError::Kind::Io, "cannot open " + path.string());
  return read_certificate(in, expect);
}

void export_problem(const SdpProblem& problem, std::ostream& out) {
  problem.validate();
  const int digits = round_trip_digits();
  const auto& rows = problem.constraints.rows;
  out << "* zetasdp problem\n";
  out << "* offset " << format_real(problem.objective_offset, digits) << '\n';
  out << "* mode " << (problem.mode == SdpMode::Minimize ? "minimize" : "analytic-center") << '\n';
  out << "* blocks";
  for (const auto& b : problem.blocks) out << ' ' << b.name;
  out << '\n';
  for (std::size_t j = 0; j < rows.size(); ++j) out << "* row " << (j + 1) << ' ' << rows[j].label << '\n';
  out << rows.size() << '\n' << problem.blocks.size() << '\n';
  for (std::size_t b = 0; b < problem.blocks.size(); ++b) out << (b ? " " : "") << problem.blocks[b].size;
  out << '\n';
  for (std::size_t j = 0; j < rows.size(); ++j) out << (j ? " " : "") << format_real(rows[j].rhs, digits);
  out << '\n';
  auto entries = [&](std::size_t matno, const std::vector<Matrix>& blocks, bool negate) {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Matrix& m = blocks[b];
      if (m.empty()) continue;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t k = i; k < m.cols(); ++k) {
          if (m(i, k) == 0) continue;
          out << matno << ' ' << (b + 1) << ' ' << (i + 1) << ' ' << (k + 1) << ' '
              << format_real(negate ? Real(-m(i, k)) : m(i, k), digits) << '\n';
        }
      }
    }
  };
  if (problem.mode == SdpMode::Minimize) entries(0, problem.costs, true);
  for (std::size_t j = 0; j < rows.size(); ++j) entries(j + 1, rows[j].coeffs, false);
  if (!out) throw CertioError(CertioError::Kind::Io, "write failed");
}

SdpProblem import_problem(std::istream& in) {
  SdpProblem p;
  std::vector<std::string> names, labels;
  std::vector<std::string> data;
  std::string text;
  std::size_t number = 0;
  std::vector<std::size_t> data_lines;
  while (std::getline(in, text)) {
    ++number;
    if (text.empty()) continue;
    if (text[0] == '*' || text[0] == '"') {
      std::istringstream ss(text.substr(1));
      std::string key;
      ss >> key;
      if (key == "offset") {
        std::string v;
        ss >> v;
        p.objective_offset = parse_real(v);
      } else if (key == "mode") {
        std::string v;
        ss >> v;
        p.mode = v == "analytic-center" ? SdpMode::AnalyticCenter : SdpMode::Minimize;
      } else if (key == "blocks") {
        std::string v;
        while (ss >> v) names.push_back(v);
      } else if (key == "row") {
        std::size_t idx = 0;
        ss >> idx;
        std::string rest;
        std::getline(ss, rest);
        if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
        if (idx >= 1) {
          if (labels.size() < idx) labels.resize(idx);
          labels[idx - 1] = rest;
        }
      }
      continue;
    }
    for (char& c : text) {
      if (c == ',' || c == '(' || c == ')' || c == '{' || c == '}') c = ' ';
    }
    data.push_back(text);
    data_lines.push_back(number);
  }
  auto fail = [&](std::size_t idx, const std::string& what) -> CertioError {
    const std::size_t line = idx < data_lines.size() ? data_lines[idx] : number;
    return CertioError(CertioError::Kind::Parse, "parse error at line " + std::to_string(line) + ": " + what);
  };
  if (data.size() < 4) throw fail(data.size(), "truncated header");
  auto ints = [&](std::size_t idx) {
    std::vector<long> out;
    std::istringstream ss(data[idx]);
    std::string tok;
    while (ss >> tok) {
      try {
        std::size_t used = 0;
        out.push_back(std::stol(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw fail(idx, "'" + tok + "' is not an integer");
      }
    }
    return out;
  };
  const auto m_line = ints(0), nb_line = ints(1), sizes = ints(2);
  if (m_line.size() != 1 || m_line[0] < 0) throw fail(0, "bad constraint count");
  if (nb_line.size() != 1 || nb_line[0] < 1) throw fail(1, "bad block count");
  const auto m = static_cast<std::size_t>(m_line[0]);
  const auto nb = static_cast<std::size_t>(nb_line[0]);
  if (sizes.size() != nb) throw fail(2, "block size count differs from block count");
  for (std::size_t b = 0; b < nb; ++b) {
    if (sizes[b] <= 0) throw fail(2, "diagonal or empty blocks are not supported");
    p.blocks.push_back({b < names.size() ? names[b] : "B" + std::to_string(b + 1), static_cast<std::size_t>(sizes[b])});
  }
  {
    std::istringstream ss(data[3]);
    std::string tok;
    while (ss >> tok) {
      ConstraintRow row;
      try {
        row.rhs = parse_real(tok);
      } catch (const std::invalid_argument&) {
        throw fail(3, "'" + tok + "' is not a number");
      }
      row.coeffs.resize(nb);
      row.label = p.constraints.rows.size() < labels.size() ? labels[p.constraints.rows.size()] : "";
      p.constraints.rows.push_back(std::move(row));
    }
    if (p.constraints.rows.size() != m) throw fail(3, "right-hand side count differs from constraint count");
  }
  p.costs.assign(nb, Matrix());
  for (std::size_t idx = 4; idx < data.size(); ++idx) {
    std::istringstream ss(data[idx]);
    long matno = 0, blk = 0, i = 0, j = 0;
    std::string v;
    if (!(ss >> matno >> blk >> i >> j >> v)) throw fail(idx, "expected `matno block i j value`");
    if (matno < 0 || static_cast<std::size_t>(matno) > m || blk < 1 || static_cast<std::size_t>(blk) > nb) {
      throw fail(idx, "index out of range");
    }
    const std::size_t b = static_cast<std::size_t>(blk) - 1;
    const auto n = p.blocks[b].size;
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > n || static_cast<std::size_t>(j) > n) throw fail(idx, "entry outside block");
    Real value;
    try {
      value = parse_real(v);
    } catch (const std::invalid_argument&) {
      throw fail(idx, "'" + v + "' is not a number");
    }
    Matrix& target = matno == 0 ? p.costs[b] : p.constraints.rows[static_cast<std::size_t>(matno) - 1].coeffs[b];
    if (target.empty()) target = Matrix(n, n);
    if (matno == 0) value = -value;
    const auto ii = static_cast<std::size_t>(i) - 1, jj = static_cast<std::size_t>(j) - 1;
    target(ii, jj) = value;
    target(jj, ii) = value;
  }
  p.validate();
  return p;
}

}  // namespace zetasdp
