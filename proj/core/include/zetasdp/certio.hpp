#pragma once

#include "zetasdp/functionals.hpp"
#include "zetasdp/linalg.hpp"
#include "zetasdp/sdpcore.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

namespace zetasdp {

// R, the Gram matrices X2, X3, X4 (size d+1), lambda for the threshold kinds,
// and the monomial coefficients of f in y = x^2 (informational only).
struct SosCertificate {
  FunctionalKind kind{FunctionalTag::Z};
  int d = 1;
  Real R;
  std::optional<Real> lambda;
  Matrix X2, X3, X4;
  Vector monomial_coeffs;

  // Throws std::invalid_argument on a broken invariant.
  void validate() const;
  bool operator==(const SosCertificate& o) const;
};

class CertioError : public std::runtime_error {
 public:
  enum class Kind { DimensionMismatch, Parse, KindMismatch, Io };
  CertioError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr int kCertificateDecimals = 100;

// Text layout, one item per line, numbers space-separated:
//   # kind=<kind> d=<d>        (optional header)
//   R
//   X2, X3, X4                 (full row-major, (d+1)^2 numbers each)
//   lambda                     (threshold kinds only)
//   monomial coefficients of f
void write_certificate(const SosCertificate& cert, std::ostream& out, int decimals = kCertificateDecimals);
void write_certificate(const SosCertificate& cert, const std::filesystem::path& path, int decimals = kCertificateDecimals);

struct ReadExpectations {
  std::optional<FunctionalTag> kind;
  std::optional<int> d;
};

// Accepts full or upper-triangular (row-major, i <= j) matrix lines; the
// element count tells them apart. Matrices are symmetrized; an asymmetry above
// the precision of the printed digits is an error. The kind comes from the
// header or from `expect`; a file without a header needs `expect.kind`.
SosCertificate read_certificate(std::istream& in, const ReadExpectations& expect = {});
SosCertificate read_certificate(const std::filesystem::path& path, const ReadExpectations& expect = {});

// Sparse block format used by SDPA-family solvers: m, block count, block
// sizes, right-hand sides, then `matno block i j value` for i <= j, with
// matno 0 holding -C (they maximize). Comment lines starting with `*` carry
// the objective offset, mode and block names.
void export_problem(const SdpProblem& problem, std::ostream& out);
SdpProblem import_problem(std::istream& in);

}  // namespace zetasdp
