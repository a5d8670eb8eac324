#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace mirrorspec {

// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a configuration violates its invariants. Collects every
// violation so a bad config file produces one complete report.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& item : v) s += "\n  - " + item;
    return s;
  }
  std::vector<std::string> violations_;
};

// Quadrature failed to reach the requested tolerance. Carries the best
// value obtained and the achieved error estimate.
class QuadratureError : public Error {
 public:
  QuadratureError(const std::string& what, std::complex<double> best_value,
                  double error_estimate)
      : Error(what), best_value_(best_value), error_estimate_(error_estimate) {}

  std::complex<double> best_value() const { return best_value_; }
  double error_estimate() const { return error_estimate_; }

 private:
  std::complex<double> best_value_;
  double error_estimate_;
};

// Series summation exceeded its term budget.
class SeriesError : public Error {
 public:
  using Error::Error;
};

// Fock-space truncation too small (or capped) for the requested state.
class TruncationError : public Error {
 public:
  TruncationError(const std::string& what, int dim, double top_population)
      : Error(what), dim_(dim), top_population_(top_population) {}

  int dim() const { return dim_; }
  double top_population() const { return top_population_; }

 private:
  int dim_;
  double top_population_;
};

}  // namespace mirrorspec
