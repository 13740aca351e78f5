// error.hpp
// Error taxonomy shared across the toolkit, mapped onto CLI exit codes.

#ifndef DRC_ERROR_HPP
#define DRC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace drc {

// Exit codes used by the command-line frontend.
enum ExitCode {
  kExitOk = 0,
  kExitUsage = 1,
  kExitData = 2,
  kExitSolver = 3,
  kExitCoverage = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a documented invariant (bad span, duplicate id, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file does not follow its declared format (syntax, version, truncation).
class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A model and a feature vector or vocabulary do not share a fingerprint.
class BindingError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Invalid configuration or command usage.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The numeric optimizer failed (non-finite loss, dead line search).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Prediction set does not cover every gold instance id.
class CoverageError : public Error {
 public:
  CoverageError(const std::string& msg, std::vector<std::string> missing_ids)
      : Error(msg), missing_ids_(std::move(missing_ids)) {}

  const std::vector<std::string>& missing_ids() const { return missing_ids_; }

 private:
  std::vector<std::string> missing_ids_;
};

}  // namespace drc

#endif  // DRC_ERROR_HPP
