#include "pulselab/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "pulselab/errors.hpp"

namespace pulselab {

Unitary2 Unitary2::rotation(double theta, const BlochVector& n) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  // cos - i sin (n_x sx + n_y sy + n_z sz)
  return {cplx(c, -s * n[2]), cplx(-s * n[1], -s * n[0]), cplx(s * n[1], -s * n[0]),
          cplx(c, s * n[2])};
}

Unitary2 Unitary2::adjoint() const {
  return {std::conj(m_[0]), std::conj(m_[2]), std::conj(m_[1]), std::conj(m_[3])};
}

namespace {
// Plain complex arithmetic; std::complex operator* goes through the
// Annex G NaN/inf recovery path, which dominates the inner loop.
inline cplx mul_add(cplx a, cplx b, cplx c, cplx d) {
  return {a.real() * b.real() - a.imag() * b.imag() + c.real() * d.real() - c.imag() * d.imag(),
          a.real() * b.imag() + a.imag() * b.real() + c.real() * d.imag() + c.imag() * d.real()};
}
}  // namespace

Unitary2 Unitary2::operator*(const Unitary2& b) const {
  const auto& a = m_;
  const auto& e = b.m_;
  return {mul_add(a[0], e[0], a[1], e[2]), mul_add(a[0], e[1], a[1], e[3]),
          mul_add(a[2], e[0], a[3], e[2]), mul_add(a[2], e[1], a[3], e[3])};
}

Unitary2 Unitary2::operator-(const Unitary2& b) const {
  return {m_[0] - b.m_[0], m_[1] - b.m_[1], m_[2] - b.m_[2], m_[3] - b.m_[3]};
}

double Unitary2::max_abs() const {
  double out = 0.0;
  for (const auto& z : m_) out = std::max(out, std::abs(z));
  return out;
}

double Unitary2::unitarity_defect() const { return (adjoint() * *this - identity()).max_abs(); }

BlochVector Unitary2::rotate(const BlochVector& r) const {
  // rho' = U rho U^dagger, read back r'_a = Tr(sigma_a rho').
  const Unitary2 rho(cplx(0.5 * (1.0 + r[2])), cplx(0.5 * r[0], -0.5 * r[1]),
                     cplx(0.5 * r[0], 0.5 * r[1]), cplx(0.5 * (1.0 - r[2])));
  const Unitary2 out = *this * rho * adjoint();
  return {2.0 * out(1, 0).real(), 2.0 * out(1, 0).imag(), (out(0, 0) - out(1, 1)).real()};
}

Unitary2 step_propagator(double eta, double v, double dt) {
  const double h = std::hypot(v, eta);
  const double x = h * dt;
  double c, s_over_h;
  if (x < 1e-8) {
    const double x2 = x * x;
    c = 1.0 - 0.5 * x2 + x2 * x2 / 24.0;
    s_over_h = dt * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
  } else {
    c = std::cos(x);
    s_over_h = std::sin(x) / h;
  }
  const double bx = s_over_h * v;
  const double bz = s_over_h * eta;
  return {cplx(c, -bz), cplx(0.0, -bx), cplx(0.0, -bx), cplx(c, bz)};
}

Unitary2 ideal_pulse() { return {0.0, cplx(0, -1), cplx(0, -1), 0.0}; }

// ---------------------------------------------------------------------------

TimeGrid aligned_grid(const PiecewiseConstantPulse& pulse, std::size_t steps) {
  const auto fractions = pulse.switching_fractions();
  return TimeGrid::aligned(pulse.tau_p(), fractions, steps);
}

EvolutionPlan::EvolutionPlan(const PiecewiseConstantPulse& pulse, const TimeGrid& grid)
    : boundaries_(grid.boundaries()) {
  if (grid.tau_p() != pulse.tau_p())
    throw GridMismatch("grid duration differs from the pulse duration");
  for (double t : pulse.switching_instants())
    if (!grid.has_boundary(t)) throw GridMismatch("grid boundaries miss a pulse switching instant");
  const std::size_t n = grid.steps();
  drive_.resize(n);
  widths_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    drive_[i] = pulse.amplitude_at(grid.midpoints()[i]);
    widths_[i] = grid.width(i);
  }
}

Unitary2 EvolutionPlan::propagate(std::span<const double> eta, std::size_t first,
                                  std::size_t last) const {
  if (eta.size() != steps()) throw GridMismatch("noise realization length differs from step count");
  Unitary2 u;
  for (std::size_t i = first; i < last; ++i) u = step_propagator(eta[i], drive_[i], widths_[i]) * u;
  return u;
}

Unitary2 EvolutionPlan::propagate_tracked(std::span<const double> eta, const BlochVector& initial,
                                          std::vector<TrajectoryPoint>& trajectory) const {
  if (eta.size() != steps()) throw GridMismatch("noise realization length differs from step count");
  trajectory.clear();
  trajectory.reserve(steps() + 1);
  trajectory.push_back({0.0, initial});
  Unitary2 u;
  BlochVector r = initial;
  for (std::size_t i = 0; i < steps(); ++i) {
    const Unitary2 step = step_propagator(eta[i], drive_[i], widths_[i]);
    u = step * u;
    r = step.rotate(r);
    trajectory.push_back({boundaries_[i + 1], r});
  }
  return u;
}

UnitaryResult evolve(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise,
                     std::optional<BlochVector> track_state) {
  if (!noise.grid) throw GridMismatch("noise realization carries no grid");
  const EvolutionPlan plan(pulse, *noise.grid);
  UnitaryResult out;
  out.u_total = track_state ? plan.propagate_tracked(noise.values, *track_state, out.trajectory)
                            : plan.propagate(noise.values);
  out.u_correcting = ideal_pulse().adjoint() * out.u_total;
  return out;
}

}  // namespace pulselab
