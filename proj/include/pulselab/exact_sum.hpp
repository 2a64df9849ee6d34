#pragma once

#include <vector>

namespace pulselab {

/// Exact floating-point summation: keeps the running total as a
/// non-overlapping expansion of doubles (Shewchuk's grow-expansion, the
/// algorithm behind Python's math.fsum). value() is the correctly rounded
/// sum, so the result does not depend on the order in which terms or
/// partial sums are added.
class ExactSum {
 public:
  void add(double x);
  /// Adds the exact product a*b (two terms via fma).
  void add_product(double a, double b);
  void merge(const ExactSum& other);
  ExactSum& operator+=(double x) {
    add(x);
    return *this;
  }

  double value() const;
  const std::vector<double>& partials() const { return partials_; }

 private:
  std::vector<double> partials_;
};

}  // namespace pulselab
