#include "pulselab/metrics.hpp"

#include <cmath>

#include "pulselab/errors.hpp"

namespace pulselab {

namespace {

double norm2(cplx z) { return z.real() * z.real() + z.imag() * z.imag(); }

void require_unitary(const Unitary2& u) {
  if (!(u.unitarity_defect() <= kUnitarityTolerance))
    throw NotUnitary("correcting factor is not unitary to 1e-10");
}

}  // namespace

FrobeniusSample frobenius_from_unitary(const Unitary2& u) {
  require_unitary(u);
  const cplx d = u(0, 0) - u(1, 1);
  const cplx off_minus = u(0, 1) - u(1, 0);
  const cplx off_plus = u(0, 1) + u(1, 0);
  FrobeniusSample s;
  s.partials[0] = 0.5 * (norm2(d) + norm2(off_minus));
  s.partials[1] = 0.5 * (norm2(d) + norm2(off_plus));
  s.partials[2] = norm2(u(0, 1)) + norm2(u(1, 0));
  s.delta_f_squared = (s.partials[0] + s.partials[1] + s.partials[2]) / 3.0;

  const double shortcut = frobenius_su2_shortcut(u);
  if (std::abs(shortcut - s.delta_f_squared) > 1e-12)
    throw NotUnitary("correcting factor is not in SU(2): trace shortcut disagrees");
  return s;
}

FrobeniusSample frobenius_by_density_matrices(const Unitary2& u) {
  require_unitary(u);
  const Unitary2 paulis[3] = {Unitary2::pauli_x(), Unitary2::pauli_y(), Unitary2::pauli_z()};
  FrobeniusSample s;
  for (int a = 0; a < 3; ++a) {
    const Unitary2& p = paulis[a];
    const Unitary2 rho0(0.5 * (1.0 + p(0, 0)), 0.5 * p(0, 1), 0.5 * p(1, 0), 0.5 * (1.0 + p(1, 1)));
    const Unitary2 rho1 = u * rho0 * u.adjoint();
    s.partials[a] = 2.0 * (1.0 - (rho0 * rho1).trace().real());
  }
  s.delta_f_squared = (s.partials[0] + s.partials[1] + s.partials[2]) / 3.0;
  return s;
}

double frobenius_su2_shortcut(const Unitary2& u) {
  const double half_trace = 0.5 * u.trace().real();
  return 4.0 / 3.0 * (1.0 - half_trace * half_trace);
}

double ideal_polarization(Axis axis) { return axis == Axis::X ? 1.0 : -1.0; }

PolarizationDeviation polarization_deviation(const std::vector<TrajectoryPoint>& trajectory,
                                             Axis axis) {
  if (trajectory.empty()) throw MissingTrajectory("no trajectory was recorded");
  const auto k = static_cast<std::size_t>(axis);
  if (std::abs(trajectory.front().bloch[k] - 1.0) > 1e-12)
    throw MissingTrajectory("trajectory does not start polarized along the requested axis");
  PolarizationDeviation out;
  out.path.reserve(trajectory.size());
  for (const auto& p : trajectory) out.path.emplace_back(p.t, p.bloch[k]);
  out.final_deviation = std::abs(trajectory.back().bloch[k] - ideal_polarization(axis));
  return out;
}

// ---------------------------------------------------------------------------

void MomentAccumulator::add(double x) {
  sum_.add(x);
  sum_sq_.add_product(x, x);
  ++count_;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  sum_.merge(other.sum_);
  sum_sq_.merge(other.sum_sq_);
  count_ += other.count_;
}

double MomentAccumulator::mean() const {
  return count_ == 0 ? 0.0 : sum_.value() / static_cast<double>(count_);
}

double MomentAccumulator::standard_error() const {
  if (count_ < 2) return 0.0;
  const auto m = static_cast<double>(count_);
  // M * sum(x^2) - (sum x)^2, accumulated exactly and rounded once.
  ExactSum numerator;
  for (double p : sum_sq_.partials()) numerator.add_product(m, p);
  const auto& s = sum_.partials();
  for (double a : s)
    for (double b : s) numerator.add_product(-a, b);
  const double var = std::max(0.0, numerator.value()) / (m * (m - 1.0));
  return std::sqrt(var / m);
}

void FrobeniusAccumulator::add(const FrobeniusSample& s) {
  df2_.add(s.delta_f_squared);
  df_.add(std::sqrt(s.delta_f_squared));
  for (int a = 0; a < 3; ++a) partials_[a].add(s.partials[a]);
}

void FrobeniusAccumulator::merge(const FrobeniusAccumulator& other) {
  df2_.merge(other.df2_);
  df_.merge(other.df_);
  for (int a = 0; a < 3; ++a) partials_[a].merge(other.partials_[a]);
}

MonteCarloEstimate FrobeniusAccumulator::estimate() const {
  MonteCarloEstimate e;
  e.realizations = df2_.count();
  e.mean_df2 = df2_.mean();
  e.stderr_df2 = df2_.standard_error();
  e.mean_df = std::sqrt(e.mean_df2);
  return e;
}

MonteCarloEstimate accumulate(std::span<const FrobeniusSample> samples) {
  if (samples.size() < 2) throw InsufficientPoints("accumulate needs at least two samples");
  FrobeniusAccumulator acc;
  for (const auto& s : samples) acc.add(s);
  return acc.estimate();
}

}  // namespace pulselab
