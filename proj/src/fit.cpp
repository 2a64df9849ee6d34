#include <cmath>
#include <numbers>

#include "pulselab/errors.hpp"
#include "pulselab/harness.hpp"

namespace pulselab {

PowerLawFit fit_power_law(std::span<const FitPoint> points, double lo, double hi, double power,
                          double max_rel_err) {
  PowerLawFit fit;
  std::vector<double> xs, ys, sigmas;
  for (const auto& p : points) {
    if (!(p.inv_v >= lo * (1.0 - 1e-12) && p.inv_v <= hi * (1.0 + 1e-12))) {
      fit.excluded.push_back({p.inv_v, "outside fit window"});
      continue;
    }
    if (!(p.mean > 0.0) || !std::isfinite(p.mean) || !std::isfinite(p.error)) {
      fit.excluded.push_back({p.inv_v, "non-positive or non-finite mean"});
      continue;
    }
    if (p.error / p.mean > max_rel_err) {
      fit.excluded.push_back({p.inv_v, "relative standard error above cut"});
      continue;
    }
    xs.push_back(std::log10(p.inv_v));
    ys.push_back(power * std::log10(p.mean));
    sigmas.push_back(power * p.error / (p.mean * std::numbers::ln10));
  }
  const std::size_t n = xs.size();
  if (n < 3) throw InsufficientPoints("fewer than three usable points for the power-law fit");

  bool any_zero = false;
  for (double s : sigmas) any_zero = any_zero || !(s > 0.0);
  fit.weighted = !any_zero;

  double sw = 0.0, sx = 0.0, sy = 0.0;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = fit.weighted ? 1.0 / (sigmas[i] * sigmas[i]) : 1.0;
    sw += w[i];
    sx += w[i] * xs[i];
    sy += w[i] * ys[i];
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += w[i] * (xs[i] - xbar) * (xs[i] - xbar);
    sxy += w[i] * (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw InsufficientPoints("fit points share a single abscissa");
  fit.slope = sxy / sxx;
  fit.intercept = ybar - fit.slope * xbar;

  double chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    chi2 += w[i] * r * r;
  }
  const double scale = chi2 / static_cast<double>(n - 2);
  fit.slope_err = std::sqrt(scale / sxx);
  fit.intercept_err = std::sqrt(scale * (1.0 / sw + xbar * xbar / sxx));
  fit.used = n;
  return fit;
}

PowerLawFit fit_exponent(std::span<const FitPoint> points, double lo, double hi) {
  return fit_power_law(points, lo, hi, 0.5);
}

}  // namespace pulselab
