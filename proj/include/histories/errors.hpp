#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace histories {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A matrix that should be Hermitian is not.
class NotHermitianError : public Error {
 public:
  NotHermitianError(const std::string& what, double max_asymmetry)
      : Error(what), max_asymmetry_(max_asymmetry) {}
  double max_asymmetry() const noexcept { return max_asymmetry_; }

 private:
  double max_asymmetry_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

/// An enumeration or evaluation would exceed its configured budget.
class BudgetExceededError : public Error {
 public:
  BudgetExceededError(const std::string& what, double requested, double budget)
      : Error(what), requested_(requested), budget_(budget) {}
  double requested() const noexcept { return requested_; }
  double budget() const noexcept { return budget_; }

 private:
  double requested_;
  double budget_;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// One finding from scenario validation: which field, which index, which rule.
struct Diagnostic {
  std::string field;
  long index = -1;
  std::string message;

  std::string to_string() const {
    std::string s = field;
    if (index >= 0) s += "[" + std::to_string(index) + "]";
    return s + ": " + message;
  }
};

class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Diagnostic> diagnostics)
      : Error(join(diagnostics)), diagnostics_(std::move(diagnostics)) {}
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  static std::string join(const std::vector<Diagnostic>& ds) {
    std::string s = "scenario validation failed";
    for (const auto& d : ds) s += "\n  " + d.to_string();
    return s;
  }
  std::vector<Diagnostic> diagnostics_;
};

/// Malformed document or schema violation while reading a scenario.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Preconditions of an operation do not hold (e.g. interacting environment).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Pre- and post-selected states are (numerically) orthogonal.
class PostSelectionError : public Error {
 public:
  PostSelectionError(const std::string& what, double overlap)
      : Error(what), overlap_(overlap) {}
  double overlap() const noexcept { return overlap_; }

 private:
  double overlap_;
};

}  // namespace histories
