#pragma once

#include <algorithm>
#include <vector>

#include "pulselab/pulses.hpp"

namespace pulselab {

// psi(t) of a piecewise constant pulse with O(log n) lookup.
class PhaseProfile {
 public:
  explicit PhaseProfile(const PiecewiseConstantPulse& pulse) {
    const double tau = pulse.tau_p();
    knots_.push_back(0.0);
    psi_.push_back(0.0);
    for (const auto& s : pulse.segments()) {
      knots_.push_back(s.end == 1.0 ? tau : s.end * tau);
      slopes_.push_back(2.0 * s.amplitude_taup / tau);
      psi_.push_back(psi_.back() + 2.0 * s.amplitude_taup * (s.end - s.start));
    }
  }

  // Segment boundaries in absolute time, 0 and tau_p included.
  const std::vector<double>& knots() const { return knots_; }

  std::size_t piece(double t) const {
    auto it = std::upper_bound(knots_.begin() + 1, knots_.end() - 1, t);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
  }
  double angle(double t) const {
    const std::size_t k = piece(t);
    return psi_[k] + slopes_[k] * (t - knots_[k]);
  }
  double slope_at(double t) const { return slopes_[piece(t)]; }

 private:
  std::vector<double> knots_;
  std::vector<double> psi_;
  std::vector<double> slopes_;
};

}  // namespace pulselab
