#include "pulselab/magnus.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "pulselab/errors.hpp"
#include "phase_profile.hpp"
#include "quadrature.hpp"

namespace pulselab {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr unsigned kMaxDepth = 18;

void require_aligned(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise) {
  if (!noise.grid) throw GridMismatch("noise realization carries no grid");
  const TimeGrid& grid = *noise.grid;
  if (grid.tau_p() != pulse.tau_p()) throw GridMismatch("grid duration differs from the pulse duration");
  if (noise.values.size() != grid.steps())
    throw GridMismatch("noise realization length differs from step count");
  for (double t : pulse.switching_instants())
    if (!grid.has_boundary(t)) throw GridMismatch("grid boundaries miss a pulse switching instant");
}

// (e^z - 1)/z and (e^z (z - 1) + 1)/z^2, by series near zero.
void phi01(std::complex<double> z, std::complex<double>& phi0, std::complex<double>& phi1) {
  if (std::abs(z) < 2.0) {
    std::complex<double> term = 1.0;  // z^n / n!
    phi0 = phi1 = 0.0;
    for (int n = 0; n < 40; ++n) {
      phi0 += term / double(n + 1);
      phi1 += term / double(n + 2);
      term *= z / double(n + 1);
    }
    return;
  }
  const auto ez = std::exp(z);
  phi0 = (ez - 1.0) / z;
  phi1 = (ez * (z - 1.0) + 1.0) / (z * z);
}

// Integral over u in [0, len] of (d - u) cos(alpha - k u).
double ramp_cos_integral(double alpha, double k, double len, double d) {
  std::complex<double> phi0, phi1;
  phi01({0.0, -k * len}, phi0, phi1);
  const std::complex<double> rot = std::polar(1.0, alpha);
  return (rot * (d * len * phi0 - len * len * phi1)).real();
}

}  // namespace

MagnusFirstOrder mu_first_order(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise) {
  require_aligned(pulse, noise);
  const PhaseProfile phase(pulse);
  const auto& b = noise.grid->boundaries();
  MagnusFirstOrder mu;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    const double mid = 0.5 * (b[i] + b[i + 1]);
    double sp = 0.0, cp = 0.0;
    linear_phase_integrals(phase.angle(b[i]), phase.slope_at(mid), b[i + 1] - b[i], sp, cp);
    mu.mu_y += noise.values[i] * sp;
    mu.mu_z += noise.values[i] * cp;
  }
  return mu;
}

double evaluate_i1(const PiecewiseConstantPulse& pulse, const AutocorrelationModel& model) {
  const auto sc = first_order_integrals(pulse);
  return model.g0 * model.g0 *
         (sc.sin_integral * sc.sin_integral + sc.cos_integral * sc.cos_integral);
}

double evaluate_i32(const PiecewiseConstantPulse& pulse, const AutocorrelationModel& model) {
  const double a = model.cusp_coefficient();
  if (a == 0.0) return 0.0;
  const PhaseProfile phase(pulse);
  const auto& knots = phase.knots();

  // The integrand is symmetric under t1 <-> t2, so only the lower triangle
  // t2 < t1 is integrated and doubled. The inner integral over each piece of
  // linear phase is exact, which leaves a smooth outer integrand per piece.
  auto inner = [&](double t1) {
    const double psi1 = phase.angle(t1);
    double total = 0.0;
    for (std::size_t q = 0; q + 1 < knots.size() && knots[q] < t1; ++q) {
      const double lo = knots[q];
      const double hi = std::min(knots[q + 1], t1);
      if (hi <= lo) continue;
      total += ramp_cos_integral(psi1 - phase.angle(lo), phase.slope_at(0.5 * (lo + hi)), hi - lo,
                                 t1 - lo);
    }
    return total;
  };

  double total = 0.0, err_sum = 0.0, l1_sum = 0.0;
  for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
    const auto r = integrate_adaptive(inner, knots[p], knots[p + 1], 1e-12, kMaxDepth);
    total += r.value;
    err_sum += r.error;
    l1_sum += r.l1;
  }
  if (!(err_sum <= kQuadratureTolerance * l1_sum))
    throw QuadratureNotConverged("I_3/2 quadrature missed the 1e-10 relative target");
  return -a * 2.0 * total;
}

double evaluate_i32_reduced(const PiecewiseConstantPulse& pulse, const AutocorrelationModel& model) {
  const double a = model.cusp_coefficient();
  if (a == 0.0) return 0.0;
  const PhaseProfile phase(pulse);
  const auto& knots = phase.knots();
  const auto sc = first_order_integrals(pulse);
  const double S = sc.sin_integral, C = sc.cos_integral;

  double fs0 = 0.0, fc0 = 0.0;  // running integrals at the start of the piece
  double total = 0.0;
  for (std::size_t p = 0; p + 1 < knots.size(); ++p) {
    const double t0 = knots[p];
    const double psi0 = phase.angle(t0);
    const double k = phase.slope_at(0.5 * (t0 + knots[p + 1]));
    auto f = [&](double t) {
      double sp = 0.0, cp = 0.0;
      linear_phase_integrals(psi0, k, t - t0, sp, cp);
      const double bc = C - 2.0 * (fc0 + cp);
      const double bs = S - 2.0 * (fs0 + sp);
      return bc * bc + bs * bs;
    };
    total += integrate_adaptive(f, t0, knots[p + 1], 1e-13, kMaxDepth).value;
    double sp = 0.0, cp = 0.0;
    linear_phase_integrals(psi0, k, knots[p + 1] - t0, sp, cp);
    fs0 += sp;
    fc0 += cp;
  }
  return 0.5 * a * total - 0.5 * a * pulse.tau_p() * (C * C + S * S);
}

AnomalousIntegrals evaluate_anomalous(const PiecewiseConstantPulse& pulse,
                                      const AutocorrelationModel& model) {
  return {evaluate_i1(pulse, model), evaluate_i32(pulse, model), model.cusp_coefficient()};
}

double evaluate_mu2x(const PiecewiseConstantPulse& pulse, const NoiseRealization& noise) {
  require_aligned(pulse, noise);
  const PhaseProfile phase(pulse);
  const TimeGrid& grid = *noise.grid;
  // sin(p1 - p2) = sin p1 cos p2 - cos p1 sin p2 turns the triangle sum
  // into running sums over earlier steps.
  double run_cos = 0.0, run_sin = 0.0, total = 0.0;
  for (std::size_t i = 0; i < grid.steps(); ++i) {
    const double psi = phase.angle(grid.midpoints()[i]);
    const double w = noise.values[i] * grid.width(i);
    const double s = std::sin(psi), c = std::cos(psi);
    total += w * (s * run_cos - c * run_sin);
    run_cos += w * c;
    run_sin += w * s;
  }
  return total;
}

// ---------------------------------------------------------------------------

NoGoReport verify_nogo(const PiecewiseConstantPulse& pulse, std::size_t grid_n,
                       const AutocorrelationModel& model) {
  if (grid_n < 2) throw ConfigError("no-go grid needs at least two points");
  const double tau = pulse.tau_p();
  const auto sc = first_order_integrals(pulse);
  if (std::abs(sc.sin_integral) > 1e-9 * tau || std::abs(sc.cos_integral) > 1e-9 * tau)
    throw NotFirstOrder(pulse.name() + " violates the first-order conditions");

  const std::size_t n = grid_n;
  const double dt = tau / static_cast<double>(n);
  std::vector<double> c(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = angle_at(pulse, (static_cast<double>(i) + 0.5) * dt);
    c[i] = std::cos(psi);
    s[i] = std::sin(psi);
  }

  NoGoReport r;
  r.grid_n = n;
  r.dt = dt;
  r.cusp_coefficient = model.cusp_coefficient();

  // <f|A|f> = sum_ij f_i f_j |ti - tj| dt^2
  auto quad_a = [&](const std::vector<double>& f) {
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < i; ++j) row += static_cast<double>(i - j) * f[j];
      q += 2.0 * f[i] * row;
    }
    return q * dt * dt * dt;
  };
  // (Bf)_i = dt (sum_{j<i} f_j - sum_{j>i} f_j); ||Bf||^2 = sum (Bf)_i^2 dt
  auto b_norm = [&](const std::vector<double>& f) {
    double all = 0.0;
    for (double x : f) all += x;
    double before = 0.0, out = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double bf = dt * (before - (all - before - f[i]));
      out += bf * bf * dt;
      before += f[i];
    }
    return out;
  };
  auto c_form = [&](const std::vector<double>& f) {
    double sum = 0.0;
    for (double x : f) sum += x;
    return sum * dt * sum * dt;
  };

  r.quad_a_cos = quad_a(c);
  r.quad_a_sin = quad_a(s);
  r.b_norm_cos = b_norm(c);
  r.b_norm_sin = b_norm(s);
  r.c_form_cos = c_form(c);
  r.c_form_sin = c_form(s);
  r.i32_from_a = -r.cusp_coefficient * (r.quad_a_cos + r.quad_a_sin);
  r.i32_from_b = 0.5 * r.cusp_coefficient * (r.b_norm_cos + r.b_norm_sin);

  // Kernel of B^T B in units of dt: M_ij = sum_k sgn(k-i) sgn(k-j), built
  // along each diagonal from its first entry with
  //   M_{i+1,j+1} = M_ij + 1 - sgn(n-1-i) sgn(n-1-j).
  const auto N = static_cast<long long>(n);
  auto sgn = [](long long x) { return static_cast<long long>((x > 0) - (x < 0)); };
  auto direct = [&](long long i, long long j) {
    long long m = 0;
    for (long long k = 0; k < N; ++k) m += sgn(k - i) * sgn(k - j);
    return m;
  };
  double residual = 0.0;
  auto visit = [&](long long i0, long long j0) {
    long long m = direct(i0, j0);
    for (long long i = i0, j = j0; i < N && j < N; ++i, ++j) {
      const double a_kernel = static_cast<double>(std::llabs(i - j)) * dt;
      const double rhs = 0.5 * (tau - static_cast<double>(m) * dt);
      residual = std::max(residual, std::abs(a_kernel - rhs));
      m += 1 - sgn(N - 1 - i) * sgn(N - 1 - j);
    }
  };
  for (long long j = 0; j < N; ++j) visit(0, j);
  for (long long i = 1; i < N; ++i) visit(i, 0);
  r.identity_residual = residual;
  return r;
}

}  // namespace pulselab
