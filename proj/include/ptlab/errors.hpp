#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace ptlab {

/// Input outside the region where a quantity is defined (N < 1, WKB below N = 2, broken 2x2 model, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Iterative method failed to reach its tolerance. Carries the last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::complex<double> last)
      : std::runtime_error(what), last_iterate_(last) {}
  std::complex<double> last_iterate() const { return last_iterate_; }

 private:
  std::complex<double> last_iterate_;
};

/// Floating-point overflow during integration; `where` is the arc position reached.
class OverflowError : public std::overflow_error {
 public:
  OverflowError(const std::string& what, double where)
      : std::overflow_error(what), where_(where) {}
  double where() const { return where_; }

 private:
  double where_;
};

}  // namespace ptlab
