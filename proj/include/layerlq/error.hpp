#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace layerlq {

/// Reason codes double as CLI exit statuses.
enum class ErrorCode : int {
  usage = 1,
  parse = 2,
  dimension = 3,
  check_failed = 4,
  numerical = 5,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& detail, int line = 0, const std::string& source = {})
      : Error(ErrorCode::parse, compose(detail, line, source)), detail_(detail), line_(line) {}
  int line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  static std::string compose(const std::string& detail, int line, const std::string& source) {
    std::string out = source.empty() ? std::string{} : source + ": ";
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    return out + detail;
  }

  std::string detail_;
  int line_;
};

class DimensionError : public Error {
 public:
  explicit DimensionError(const std::string& what) : Error(ErrorCode::dimension, what) {}
};

/// Cholesky pivot failure.
class NotPositiveDefinite : public Error {
 public:
  explicit NotPositiveDefinite(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

/// Hamiltonian has eigenvalues on (or numerically at) the imaginary axis, or the
/// stable invariant subspace does not have a graph representation.
class NoStabilizingSolution : public Error {
 public:
  explicit NoStabilizingSolution(const std::string& what) : Error(ErrorCode::numerical, what) {}
};

/// Outer fixed-point iteration of the guaranteed-cost ARE failed. The trace holds
/// ||P^(k)||_F for every completed iterate.
class FixedPointDivergence : public Error {
 public:
  FixedPointDivergence(const std::string& what, std::vector<double> trace)
      : Error(ErrorCode::numerical, what), trace_(std::move(trace)) {}
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

/// A semidefiniteness or certificate check failed. Carries the offending eigenvalue
/// and, for per-layer checks, the zero-based layer index (or -1).
class CheckFailed : public Error {
 public:
  CheckFailed(const std::string& what, double eigenvalue, int layer = -1)
      : Error(ErrorCode::check_failed, what), eigenvalue_(eigenvalue), layer_(layer) {}
  double eigenvalue() const noexcept { return eigenvalue_; }
  int layer() const noexcept { return layer_; }

 private:
  double eigenvalue_;
  int layer_;
};

}  // namespace layerlq
