#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pulselab/noise.hpp"
#include "pulselab/pulses.hpp"

namespace pulselab {

/// Leading Magnus terms of the correcting factor for one noise path:
/// mu_y = int eta sin(psi), mu_z = int eta cos(psi).
struct MagnusFirstOrder {
  double mu_y = 0.0;
  double mu_z = 0.0;
};

/// Exact per-step integrals of sin/cos psi weighted by the step noise value.
/// Requires a grid aligned with the pulse (GridMismatch otherwise).
MagnusFirstOrder mu_first_order(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise);

struct AnomalousIntegrals {
  double i1 = 0.0;
  double i32 = 0.0;
  double a = 0.0;  // cusp coefficient of the model
};

/// g0^2 (S^2 + C^2) from the closed-form segment integrals.
double evaluate_i1(const PiecewiseConstantPulse& pulse, const AutocorrelationModel& model);

/// -a * double integral over [0,tau_p]^2 of |t1 - t2| cos(psi1 - psi2), by
/// nested adaptive Gauss-Kronrod quadrature. The square is split along the
/// diagonal and at every switching instant, so each piece is analytic.
/// Throws QuadratureNotConverged when the 1e-10 relative target is missed.
double evaluate_i32(const PiecewiseConstantPulse& pulse, const AutocorrelationModel& model);

/// Same quantity through the one-dimensional form
///   (a/2) int (C - 2 Fc(s))^2 + (S - 2 Fs(s))^2 ds - (a tau_p / 2)(C^2 + S^2),
/// Fc, Fs being running integrals of cos/sin psi. Cheap; used by the designer.
double evaluate_i32_reduced(const PiecewiseConstantPulse& pulse, const AutocorrelationModel& model);

AnomalousIntegrals evaluate_anomalous(const PiecewiseConstantPulse& pulse,
                                      const AutocorrelationModel& model);

/// Midpoint double sum of eta(t1) eta(t2) sin(psi1 - psi2) over t2 < t1.
/// Linear in the number of steps.
double evaluate_mu2x(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise);

/// Discretized operators on a uniform midpoint grid of n points:
///   A kernel |ti - tj| dt, B kernel sgn(ti - tj) dt, C kernel dt.
struct NoGoReport {
  std::size_t grid_n = 0;
  double dt = 0.0;
  double quad_a_cos = 0.0;   // <cos psi | A | cos psi>
  double quad_a_sin = 0.0;   // <sin psi | A | sin psi>
  double b_norm_cos = 0.0;   // ||B cos psi||^2
  double b_norm_sin = 0.0;   // ||B sin psi||^2
  double c_form_cos = 0.0;   // <cos psi | C | cos psi> = (sum cos psi dt)^2
  double c_form_sin = 0.0;
  /// max_ij |A_ij - (tau_p C_ij - (B^T B)_ij) / 2| over kernel values.
  double identity_residual = 0.0;
  double i32_from_a = 0.0;   // -a (quad_a_cos + quad_a_sin)
  double i32_from_b = 0.0;   // (a/2)(b_norm_cos + b_norm_sin)
  double cusp_coefficient = 0.0;
};

/// Throws NotFirstOrder if |S| or |C| exceeds 1e-9 tau_p, ConfigError if
/// grid_n < 2.
NoGoReport verify_nogo(const PiecewiseConstantPulse& pulse, std::size_t grid_n,
                       const AutocorrelationModel& model);

struct DesignOptions {
  double v_max = 1.0;
  int restarts = 10;
  /// Objective evaluations per restart of the pattern search.
  int max_evaluations = 4000;
  std::uint64_t seed = 0;
  /// Starting shape for the first restart; random when absent.
  std::optional<PiecewiseConstantPulse> initial;
  double feasibility_tolerance = 1e-8;  // on |S|, |C| in units of tau_p
};

struct DesignResult {
  PiecewiseConstantPulse pulse;
  double i32_min = 0.0;
  int evaluations = 0;
  int feasible_candidates = 0;
};

/// Restarted compass search over segment durations and amplitudes of an
/// n-segment pi pulse with |v| <= v_max, minimizing I_{3/2} under a penalty
/// on S and C whose weight grows tenfold per restart. psi(tau_p) = pi holds
/// by construction (durations are rescaled); every restart ends with a
/// Gauss-Newton projection onto S = C = 0. Needs a cusped model.
/// Throws NoFeasiblePoint if no restart reaches the constraint set.
DesignResult minimize_i32(int n_segments, const AutocorrelationModel& model,
                          const DesignOptions& options = {});

}  // namespace pulselab
