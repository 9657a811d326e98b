#pragma once

#include <stdexcept>
#include <string>

namespace tgode {

// Exit-code categories used by the CLI: validation -> 2, io -> 3, numeric -> 4.
enum class ErrorCategory { Validation, Io, Numeric };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory cat, const std::string& what)
      : std::runtime_error(what), category_(cat) {}
  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

struct ShapeMismatchError : Error {
  explicit ShapeMismatchError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct IsolatedNodeError : Error {
  explicit IsolatedNodeError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct SelfLoopError : Error {
  explicit SelfLoopError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct CountTooLargeError : Error {
  explicit CountTooLargeError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct NumericOverflowError : Error {
  explicit NumericOverflowError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

struct NonScalarRootError : Error {
  explicit NonScalarRootError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct ParseError : Error {
  explicit ParseError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct UnknownKeyError : Error {
  explicit UnknownKeyError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct InvalidValueError : Error {
  explicit InvalidValueError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct NonMonotonicTimestampsError : Error {
  explicit NonMonotonicTimestampsError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct EmptySequenceError : Error {
  explicit EmptySequenceError(const std::string& what)
      : Error(ErrorCategory::Validation, what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCategory::Io, what) {}
};

struct AllTrialsDivergedError : Error {
  explicit AllTrialsDivergedError(const std::string& what)
      : Error(ErrorCategory::Numeric, what) {}
};

}  // namespace tgode
