#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nlbound {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DivisionByZeroInterval : public Error {
 public:
  DivisionByZeroInterval() : Error("interval division by a divisor containing zero") {}
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class DegenerateSplit : public Error {
 public:
  using Error::Error;
};

class UnboundVariable : public Error {
 public:
  explicit UnboundVariable(const std::string& name)
      : Error("unbound variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class NonDifferentiable : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidDimension : public Error {
 public:
  using Error::Error;
};

class PreconditionViolated : public Error {
 public:
  using Error::Error;
};

class NecessaryConditionViolated : public Error {
 public:
  using Error::Error;
};

/// Raised when an objective cannot be evaluated on some box during a search.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Problems with a model definition: malformed file, undeclared variables, bad bounds.
class ModelError : public Error {
 public:
  using Error::Error;
};

class MissingBounds : public ModelError {
 public:
  using ModelError::ModelError;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t offset, std::vector<std::string> expected, const std::string& detail = {})
      : Error(format(offset, expected, detail)), offset_(offset), expected_(std::move(expected)) {}

  /// Byte offset into the parsed text.
  std::size_t offset() const noexcept { return offset_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  static std::string format(std::size_t offset, const std::vector<std::string>& expected,
                            const std::string& detail) {
    std::string msg = "parse error at byte " + std::to_string(offset);
    if (!detail.empty()) msg += ": " + detail;
    if (!expected.empty()) {
      msg += "; expected one of:";
      for (const auto& e : expected) msg += " " + e;
    }
    return msg;
  }

  std::size_t offset_;
  std::vector<std::string> expected_;
};

}  // namespace nlbound
