#pragma once

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace pulselab {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  double l1 = 0.0;
};

namespace detail {

// One 15-point Kronrod panel. The rule is always applied on [-1, 1] because
// Boost 1.74 reports the error of a rescaled interval without the scale.
template <class F>
QuadratureResult gk_panel(const F& f, double a, double b) {
  const double h = 0.5 * (b - a), m = 0.5 * (a + b);
  double err = 0.0, l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      [&](double x) { return f(m + h * x); }, -1.0, 1.0, 0, 0.0, &err, &l1);
  return {v * h, err * h, l1 * h};
}

template <class F>
QuadratureResult gk_refine(const F& f, double a, double b, const QuadratureResult& panel,
                           double abs_tol, unsigned depth) {
  if (depth == 0 || panel.error <= abs_tol) return panel;
  const double mid = 0.5 * (a + b);
  const auto left = gk_panel(f, a, mid), right = gk_panel(f, mid, b);
  const auto l = gk_refine(f, a, mid, left, 0.5 * abs_tol, depth - 1);
  const auto r = gk_refine(f, mid, b, right, 0.5 * abs_tol, depth - 1);
  return {l.value + r.value, l.error + r.error, l.l1 + r.l1};
}

}  // namespace detail

/// Adaptive bisection with 15-point Gauss-Kronrod panels until the summed
/// error estimate is below rel_tol times the L1 norm of the integrand.
/// The result carries the achieved error, so callers decide on failure.
template <class F>
QuadratureResult integrate_adaptive(const F& f, double a, double b, double rel_tol,
                                    unsigned max_depth = 20) {
  const auto first = detail::gk_panel(f, a, b);
  return detail::gk_refine(f, a, b, first, rel_tol * first.l1, max_depth);
}

}  // namespace pulselab
