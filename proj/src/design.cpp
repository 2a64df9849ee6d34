// Constrained search for pulse shapes with small I_3/2.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "pulselab/errors.hpp"
#include "pulselab/magnus.hpp"

namespace pulselab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kMinDuration = 1e-6;

// Search coordinates: n raw durations followed by n amplitudes in units of
// v_max. Durations are rescaled on decoding so that psi(tau_p) = pi.
class ShapeSpace {
 public:
  ShapeSpace(int n, double v_max) : n_(n), v_max_(v_max) {}

  int dims() const { return 2 * n_; }

  void clamp(std::vector<double>& x) const {
    for (int k = 0; k < n_; ++k) x[k] = std::max(x[k], kMinDuration);
    for (int k = n_; k < 2 * n_; ++k) x[k] = std::clamp(x[k], -1.0, 1.0);
  }

  std::optional<PiecewiseConstantPulse> decode(const std::vector<double>& x) const {
    double theta = 0.0;
    for (int k = 0; k < n_; ++k) theta += 2.0 * x[n_ + k] * v_max_ * x[k];
    if (!(theta > 1e-12)) return std::nullopt;
    const double scale = kPi / theta;
    double tau = 0.0;
    for (int k = 0; k < n_; ++k) tau += x[k] * scale;
    std::vector<Segment> segs(n_);
    double clock = 0.0;
    for (int k = 0; k < n_; ++k) {
      segs[k].start = k == 0 ? 0.0 : segs[k - 1].end;
      clock += x[k] * scale;
      segs[k].end = k + 1 == n_ ? 1.0 : clock / tau;
      segs[k].amplitude_taup = x[n_ + k] * v_max_ * tau;
    }
    return PiecewiseConstantPulse("DESIGN" + std::to_string(n_), 1, std::move(segs), tau);
  }

  std::vector<double> encode(const PiecewiseConstantPulse& p) const {
    const PiecewiseConstantPulse q =
        p.peak_amplitude() > v_max_ ? p.with_peak_amplitude(v_max_) : p;
    std::vector<double> x(2 * n_);
    for (int k = 0; k < n_; ++k) {
      const auto& s = q.segments()[k];
      x[k] = (s.end - s.start) * q.tau_p();
      x[n_ + k] = s.amplitude_taup / q.tau_p() / v_max_;
    }
    return x;
  }

 private:
  int n_;
  double v_max_;
};

double constraint_violation(const PiecewiseConstantPulse& p) {
  const auto sc = first_order_integrals(p);
  return std::max(std::abs(sc.sin_integral), std::abs(sc.cos_integral)) / p.tau_p();
}

// Gauss-Newton onto S = C = 0 with minimum-norm steps.
std::optional<std::vector<double>> project(const ShapeSpace& space, std::vector<double> x,
                                           double tol) {
  const int d = space.dims();
  auto residual = [&](const std::vector<double>& y) -> std::optional<Eigen::Vector2d> {
    const auto p = space.decode(y);
    if (!p) return std::nullopt;
    const auto sc = first_order_integrals(*p);
    return Eigen::Vector2d(sc.sin_integral, sc.cos_integral) / p->tau_p();
  };
  for (int iter = 0; iter < 60; ++iter) {
    const auto g = residual(x);
    if (!g) return std::nullopt;
    if (g->cwiseAbs().maxCoeff() <= tol) return x;
    Eigen::MatrixXd J(2, d);
    for (int k = 0; k < d; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(x[k]));
      auto xp = x, xm = x;
      xp[k] += h;
      xm[k] -= h;
      const auto gp = residual(xp), gm = residual(xm);
      if (!gp || !gm) return std::nullopt;
      J.col(k) = (*gp - *gm) / (2.0 * h);
    }
    const Eigen::Matrix2d jjt = J * J.transpose() + 1e-14 * Eigen::Matrix2d::Identity();
    const Eigen::VectorXd step = -J.transpose() * jjt.ldlt().solve(*g);
    for (int k = 0; k < d; ++k) x[k] += step[k];
    space.clamp(x);
  }
  const auto g = residual(x);
  if (g && g->cwiseAbs().maxCoeff() <= tol) return x;
  return std::nullopt;
}

}  // namespace

DesignResult minimize_i32(int n_segments, const AutocorrelationModel& model,
                          const DesignOptions& options) {
  if (n_segments < 3) throw ConfigError("pulse design needs at least three segments");
  if (!(options.v_max > 0.0)) throw ConfigError("v_max must be positive");
  if (options.restarts < 1) throw ConfigError("at least one restart is required");
  const double a = model.cusp_coefficient();
  if (!(a > 0.0)) throw ConfigError("I_3/2 design needs a cusped (exponential) model");

  const ShapeSpace space(n_segments, options.v_max);
  const int d = space.dims();
  std::mt19937_64 rng(mix_seed(options.seed, static_cast<std::uint64_t>(n_segments)));

  // Scale so that a rectangular pi pulse at v_max has unit objective size.
  const double tau_ref = kPi / (2.0 * options.v_max);
  const double i32_ref = a * tau_ref * tau_ref * tau_ref;

  // Random shapes projected onto S = C = 0; a few draws may fail to project.
  auto random_start = [&]() {
    std::uniform_real_distribution<double> dur(0.5, 1.5), amp(-1.0, 1.0);
    std::vector<double> y(d);
    for (int attempt = 0; attempt < 20; ++attempt) {
      double theta = 0.0;
      for (int k = 0; k < n_segments; ++k) {
        y[k] = dur(rng) * tau_ref;
        y[n_segments + k] = amp(rng);
        theta += y[n_segments + k] * y[k];
      }
      if (theta <= 0.0)
        for (int k = 0; k < n_segments; ++k) y[n_segments + k] = -y[n_segments + k];
      space.clamp(y);
      if (auto projected = project(space, y, options.feasibility_tolerance)) return *projected;
    }
    return y;
  };

  std::vector<double> x(d);
  if (options.initial) {
    if (static_cast<int>(options.initial->segments().size()) != n_segments)
      throw ConfigError("initial pulse has a different number of segments");
    x = space.encode(*options.initial);
    space.clamp(x);
  } else {
    x = random_start();
  }

  DesignResult best;
  best.i32_min = std::numeric_limits<double>::infinity();
  auto offer = [&](const std::vector<double>& y) {
    const auto p = space.decode(y);
    if (!p || constraint_violation(*p) > options.feasibility_tolerance) return;
    ++best.feasible_candidates;
    const double v = evaluate_i32_reduced(*p, model);
    if (v < best.i32_min) {
      best.i32_min = v;
      best.pulse = *p;
    }
  };
  offer(x);

  double weight = 10.0;
  for (int restart = 0; restart < options.restarts; ++restart) {
    auto objective = [&](const std::vector<double>& y) {
      ++best.evaluations;
      const auto p = space.decode(y);
      if (!p) return std::numeric_limits<double>::infinity();
      const auto sc = first_order_integrals(*p);
      const double pen = (sc.sin_integral * sc.sin_integral + sc.cos_integral * sc.cos_integral) /
                         (tau_ref * tau_ref);
      return evaluate_i32_reduced(*p, model) / i32_ref + weight * pen;
    };

    std::vector<double> step(d);
    for (int k = 0; k < n_segments; ++k) step[k] = 0.1 * tau_ref;
    for (int k = n_segments; k < d; ++k) step[k] = 0.1;
    std::vector<int> order(2 * d);
    std::iota(order.begin(), order.end(), 0);

    double fx = objective(x);
    int used = 0;
    while (used < options.max_evaluations &&
           *std::max_element(step.begin(), step.end()) > 1e-10) {
      std::shuffle(order.begin(), order.end(), rng);
      bool improved = false;
      for (int o : order) {
        if (used >= options.max_evaluations) break;
        const int k = o / 2;
        auto y = x;
        y[k] += (o % 2 == 0 ? 1.0 : -1.0) * step[k];
        space.clamp(y);
        if (y == x) continue;
        const double fy = objective(y);
        ++used;
        if (fy < fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
      if (!improved)
        for (double& s : step) s *= 0.5;
    }

    if (auto projected = project(space, x, options.feasibility_tolerance)) {
      offer(*projected);
      x = *projected;
    } else {
      // stuck at an infeasible penalty minimum: start the next restart afresh
      x = random_start();
      offer(x);
    }
    weight = std::min(weight * 10.0, 1e8);
  }

  if (!std::isfinite(best.i32_min))
    throw NoFeasiblePoint("no restart reached S = C = 0 within tolerance");
  best.i32_min = evaluate_i32(best.pulse, model);
  return best;
}

}  // namespace pulselab
