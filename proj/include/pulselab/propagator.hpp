#pragma once

#include <array>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "pulselab/noise.hpp"
#include "pulselab/pulses.hpp"

namespace pulselab {

using cplx = std::complex<double>;
using BlochVector = std::array<double, 3>;

/// 2x2 complex matrix, row-major: {u00, u01, u10, u11}.
class Unitary2 {
 public:
  constexpr Unitary2() : m_{cplx{1.0}, cplx{}, cplx{}, cplx{1.0}} {}
  constexpr Unitary2(cplx u00, cplx u01, cplx u10, cplx u11) : m_{u00, u01, u10, u11} {}

  static constexpr Unitary2 identity() { return {}; }
  static Unitary2 pauli_x() { return {0.0, 1.0, 1.0, 0.0}; }
  static Unitary2 pauli_y() { return {0.0, cplx(0, -1), cplx(0, 1), 0.0}; }
  static Unitary2 pauli_z() { return {1.0, 0.0, 0.0, -1.0}; }
  /// exp(-i theta (n . sigma)) for a unit vector n.
  static Unitary2 rotation(double theta, const BlochVector& axis);

  cplx operator()(int row, int col) const { return m_[2 * row + col]; }
  const std::array<cplx, 4>& entries() const { return m_; }

  Unitary2 adjoint() const;
  cplx trace() const { return m_[0] + m_[3]; }
  cplx det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  Unitary2 operator*(const Unitary2& rhs) const;
  Unitary2 operator-(const Unitary2& rhs) const;

  /// Max-entry norm of U^dagger U - 1.
  double unitarity_defect() const;
  double max_abs() const;

  /// Bloch vector of U rho U^dagger where rho = (1 + r.sigma)/2.
  BlochVector rotate(const BlochVector& r) const;

 private:
  std::array<cplx, 4> m_;
};

/// exp(-i dt (eta sigma_z + v sigma_x)); exact closed form with a series
/// branch for |h| dt < 1e-8.
Unitary2 step_propagator(double eta, double v, double dt);

/// The instantaneous pi pulse about x: exp(-i pi/2 sigma_x) = -i sigma_x.
Unitary2 ideal_pulse();

struct TrajectoryPoint {
  double t = 0.0;
  BlochVector bloch{};
};

struct UnitaryResult {
  Unitary2 u_total;
  Unitary2 u_correcting;  // ideal_pulse()^dagger * u_total
  /// Initial state at t = 0 followed by the state after every step.
  std::vector<TrajectoryPoint> trajectory;
};

/// Per-step drive amplitudes and widths for a pulse on an aligned grid,
/// computed once and reused for every noise realization.
/// Product convention: U_total = U_N ... U_2 U_1 (latest step leftmost).
class EvolutionPlan {
 public:
  /// Throws GridMismatch when the grid misses a switching instant or has a
  /// different duration than the pulse.
  EvolutionPlan(const PiecewiseConstantPulse& pulse, const TimeGrid& grid);

  std::size_t steps() const { return drive_.size(); }
  const std::vector<double>& drive() const { return drive_; }
  const std::vector<double>& widths() const { return widths_; }

  /// Ordered product over steps [first, last).
  Unitary2 propagate(std::span<const double> eta, std::size_t first, std::size_t last) const;
  Unitary2 propagate(std::span<const double> eta) const { return propagate(eta, 0, steps()); }

  /// Same product while recording Bloch vectors of an initial state.
  Unitary2 propagate_tracked(std::span<const double> eta, const BlochVector& initial,
                             std::vector<TrajectoryPoint>& trajectory) const;

 private:
  std::vector<double> drive_;
  std::vector<double> widths_;
  std::vector<double> boundaries_;
};

UnitaryResult evolve(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise,
                     std::optional<BlochVector> track_state = std::nullopt);

/// Grid with N steps whose boundaries include all switching instants.
TimeGrid aligned_grid(const PiecewiseConstantPulse& pulse, std::size_t steps);

}  // namespace pulselab
