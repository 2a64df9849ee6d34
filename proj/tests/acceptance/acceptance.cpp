// Acceptance runner: one PASS/FAIL line per criterion.
//   acceptance                 every criterion
//   acceptance --criterion 3   a single one (exit status reflects it)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pulselab/errors.hpp"
#include "pulselab/harness.hpp"
#include "pulselab/magnus.hpp"
#include "pulselab/metrics.hpp"
#include "pulselab/noise.hpp"
#include "pulselab/propagator.hpp"
#include "pulselab/pulses.hpp"
#include "pulselab/run_config.hpp"

using namespace pulselab;
using std::numbers::pi;

namespace {

struct Settings {
  std::uint64_t realizations = 20000;
  std::size_t steps = 512;
  std::size_t points = 8;
  std::uint64_t seed = 1;
  unsigned workers = 0;
};

Settings g_settings;

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) passed = false;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [x]");
  }
};

std::string fmt(double x, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

const PulseCatalog& catalog() { return PulseCatalog::builtin(); }

const std::vector<std::string> kShaped{"CORPSE", "SCORPSE", "CLASS2ND", "SYM2ND", "ASYM2ND"};
const std::vector<std::string> kAll{"RECT", "CORPSE", "SCORPSE", "CLASS2ND", "SYM2ND", "ASYM2ND"};

ScalingExperimentConfig sweep(const std::vector<std::string>& pulses, const AutocorrelationModel& model,
                              double lo, double hi) {
  ScalingExperimentConfig c;
  c.pulses = pulses;
  c.model = model;
  c.inv_v_grid = log_spaced(lo, hi, g_settings.points);
  c.realizations = g_settings.realizations;
  c.steps_per_pulse = g_settings.steps;
  c.seed = g_settings.seed;
  c.fit_min = lo;
  c.fit_max = hi;
  c.track_polarization = true;
  c.polarization_axis = Axis::Y;
  c.workers = g_settings.workers;
  return c;
}

// SCORPSE sweeps are shared by the polarization and partial-norm criteria.
const ScalingResult& scorpse_sweep(bool exponential) {
  static std::map<bool, ScalingResult> cache;
  auto it = cache.find(exponential);
  if (it != cache.end()) return it->second;
  const auto cfg = exponential ? sweep({"SCORPSE"}, AutocorrelationModel::exponential(1.0, 0.01), 1e-3, 3e-2)
                               : sweep({"SCORPSE"}, AutocorrelationModel::gaussian(1.0, 0.1), 1e-3, 1e-1);
  return cache.emplace(exponential, run_scaling(cfg)).first->second;
}

void check_slopes(Outcome& out, const ScalingResult& r, const std::map<std::string, std::pair<double, double>>& want) {
  for (const auto& [name, target] : want) {
    const auto* f = r.fits_of(name);
    if (!f || !f->total) {
      out.require(false, name + " no fit (" + (f ? f->failure : std::string("missing")) + ")");
      continue;
    }
    const double s = f->total->slope;
    out.require(std::abs(s - target.first) <= target.second,
                name + " " + fmt(s) + "+-" + fmt(f->total->slope_err, 2) + " (want " + fmt(target.first) + "+-" +
                    fmt(target.second) + ")");
  }
}

// 1. Exponents under Gaussian noise.
Outcome criterion1() {
  Outcome out;
  const auto r = run_scaling(sweep(kAll, AutocorrelationModel::gaussian(1.0, 0.1), 1e-3, 1e-1));
  check_slopes(out, r,
               {{"RECT", {1.0, 0.1}},
                {"CORPSE", {2.0, 0.15}},
                {"SCORPSE", {2.0, 0.15}},
                {"CLASS2ND", {3.0, 0.2}},
                {"SYM2ND", {3.0, 0.2}},
                {"ASYM2ND", {3.0, 0.2}}});
  return out;
}

// 2. Anomalous exponents under exponential noise.
Outcome criterion2() {
  Outcome out;
  const auto r = run_scaling(sweep(kAll, AutocorrelationModel::exponential(1.0, 0.01), 1e-3, 3e-2));
  std::map<std::string, std::pair<double, double>> want{{"RECT", {1.0, 0.1}}};
  for (const auto& n : kShaped) want[n] = {1.5, 0.1};
  check_slopes(out, r, want);
  return out;
}

// 3. Small-1/v prefactors against the closed forms.
Outcome criterion3() {
  Outcome out;
  const double iv[] = {3e-3, 1e-2};
  for (const char* name : {"CORPSE", "SCORPSE"}) {
    const double coeff = std::string(name) == "CORPSE" ? 4.0 * pi : 8.0 * pi / 3.0;
    for (double gamma : {0.01, 0.1}) {
      const auto model = AutocorrelationModel::exponential(1.0, gamma);
      const auto rows = run_prefactor_check(catalog().at(name), model, iv, g_settings.realizations, g_settings.seed,
                                            g_settings.steps, g_settings.workers);
      for (const auto& row : rows) {
        const double closed = coeff * gamma * std::pow(row.inv_v, 3);
        const double z = (row.measured - closed) / row.error;
        out.require(std::abs(z) <= 3.0, std::string(name) + " g=" + fmt(gamma) + " 1/v=" + fmt(row.inv_v) +
                                            " ratio=" + fmt(row.measured / closed) + " z=" + fmt(z, 3));
      }
    }
  }
  return out;
}

// 4. Quadrature against the closed forms, with a time limit.
Outcome criterion4() {
  Outcome out;
  double worst = 0.0, slowest = 0.0;
  for (const char* name : {"CORPSE", "SCORPSE"}) {
    const double coeff = std::string(name) == "CORPSE" ? 3.0 * pi : 2.0 * pi;
    for (double gamma : {0.01, 0.1, 1.0})
      for (double v : {1.0, 10.0, 100.0, 1000.0}) {
        const auto p = catalog().at(name).with_peak_amplitude(v);
        const auto t0 = std::chrono::steady_clock::now();
        const double i32 = evaluate_i32(p, AutocorrelationModel::exponential(1.0, gamma));
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        const double closed = coeff * gamma / (v * v * v);
        worst = std::max(worst, std::abs(i32 / closed - 1.0));
      }
  }
  out.require(worst <= 1e-6, "max relative deviation " + fmt(worst, 3));
  out.require(slowest < 1.0, "slowest evaluation " + fmt(slowest, 3) + " s");
  return out;
}

// 5. No-go: positivity, operator identity convergence, and the designer.
Outcome criterion5() {
  Outcome out;
  const auto model = AutocorrelationModel::exponential(1.0, 0.01);
  for (const auto& shape : catalog().pulses()) {
    if (shape.order() < 1) continue;
    const auto p = shape.with_peak_amplitude(1.0);
    const auto r = verify_nogo(p, 2048, model);
    double worst_order = 1e9, worst_c = 0.0;
    double prev = 0.0;
    for (std::size_t n : {256, 512, 1024, 2048, 4096}) {
      const auto q = verify_nogo(p, n, model);
      worst_c = std::max(worst_c, q.identity_residual / q.dt);
      if (prev > 0.0) worst_order = std::min(worst_order, std::log2(prev / q.identity_residual));
      prev = q.identity_residual;
    }
    out.require(r.i32_from_b > 0.0 && r.b_norm_cos > 0.0 && r.b_norm_sin > 0.0,
                shape.name() + " I=" + fmt(r.i32_from_b));
    out.require(worst_order >= 0.9 && worst_c <= 1.0,
                shape.name() + " residual/dt<=" + fmt(worst_c, 3) + " order>=" + fmt(worst_order, 3));
  }
  const double floor = 1e-3 * evaluate_i32(catalog().at("SCORPSE").with_peak_amplitude(1.0), model);
  for (int n : {3, 4, 5}) {
    DesignOptions o;
    o.restarts = 10;
    o.seed = g_settings.seed;
    try {
      const auto d = minimize_i32(n, model, o);
      out.require(d.i32_min > floor, std::to_string(n) + " segments: I_min=" + fmt(d.i32_min));
    } catch (const NoFeasiblePoint&) {
      out.require(true, std::to_string(n) + " segments: no feasible pulse");
    }
  }
  return out;
}

// 6. First-order conditions in closed form.
Outcome criterion6() {
  Outcome out;
  for (double tau : {1.0, 0.01, 7.5}) {
    for (const char* name : {"CORPSE", "SCORPSE"}) {
      const auto p = catalog().at(name).with_duration(tau);
      const auto sc = first_order_integrals(p);
      const double m = std::max(std::abs(sc.sin_integral), std::abs(sc.cos_integral)) / tau;
      out.require(m <= 1e-12, std::string(name) + " tau=" + fmt(tau) + " max|S,C|/tau=" + fmt(m, 3));
    }
    const auto rect = first_order_integrals(catalog().at("RECT").with_duration(tau));
    const double dev = std::max(std::abs(rect.sin_integral - 2.0 * tau / pi), std::abs(rect.cos_integral)) / tau;
    out.require(dev <= 1e-12, "RECT tau=" + fmt(tau) + " deviation/tau=" + fmt(dev, 3));
  }
  return out;
}

// 7. Metric identities and the noiseless limit.
Outcome criterion7() {
  Outcome out;
  std::mt19937_64 rng(g_settings.seed);
  std::normal_distribution<double> n;
  double worst = 0.0;
  bool in_range = true;
  for (int k = 0; k < 100000; ++k) {
    double q[4], norm = 0.0;
    for (double& x : q) norm += (x = n(rng)) * x;
    norm = std::sqrt(norm);
    for (double& x : q) x /= norm;
    const Unitary2 u({q[0], q[3]}, {q[2], q[1]}, {-q[2], q[1]}, {q[0], -q[3]});
    const double literal = frobenius_by_density_matrices(u).delta_f_squared;
    const double shortcut = frobenius_su2_shortcut(u);
    worst = std::max(worst, std::abs(literal - shortcut));
    const double d = frobenius_from_unitary(u).delta_f_squared;
    in_range = in_range && d >= 0.0 && d <= 4.0 / 3.0;
  }
  out.require(worst <= 1e-12, "max |trace form - shortcut| " + fmt(worst, 3));
  out.require(in_range, "range [0, 4/3] respected");
  double noiseless = 0.0;
  for (const auto& shape : catalog().pulses())
    for (double v : {1.0, 100.0}) {
      const auto p = shape.with_peak_amplitude(v);
      const auto grid = aligned_grid(p, g_settings.steps);
      NoiseRealization zero{std::make_shared<const TimeGrid>(grid), std::vector<double>(grid.steps(), 0.0)};
      const auto r = evolve(p, zero);
      noiseless = std::max(noiseless, std::sqrt(frobenius_from_unitary(r.u_correcting).delta_f_squared));
    }
  out.require(noiseless < 1e-10, "noiseless max Delta_F " + fmt(noiseless, 3));
  return out;
}

// 8. Polarization scaling for SCORPSE.
Outcome criterion8() {
  Outcome out;
  for (bool exponential : {false, true}) {
    const auto& r = scorpse_sweep(exponential);
    const double target = exponential ? 3.0 : 4.0;
    const auto* f = r.fits_of("SCORPSE");
    const std::string label = exponential ? "exponential" : "gaussian";
    if (!f || !f->polarization) {
      out.require(false, label + " no polarization fit");
      continue;
    }
    out.require(std::abs(f->polarization->slope - target) <= 0.3,
                label + " slope " + fmt(f->polarization->slope) + " (want " + fmt(target) + "+-0.3)");
  }
  return out;
}

// 9. Partial norms share the total exponent.
Outcome criterion9() {
  Outcome out;
  for (bool exponential : {false, true}) {
    const auto& r = scorpse_sweep(exponential);
    const auto* f = r.fits_of("SCORPSE");
    const std::string label = exponential ? "exponential" : "gaussian";
    if (!f || !f->total) {
      out.require(false, label + " no total fit");
      continue;
    }
    std::string line = label + " total " + fmt(f->total->slope);
    bool ok = true;
    const char* axes = "xyz";
    for (int a = 0; a < 3; ++a) {
      const auto& p = f->partials[a];
      if (!p) {
        ok = false;
        line += std::string(" ") + axes[a] + "=none";
        continue;
      }
      ok = ok && std::abs(p->slope - f->total->slope) <= 0.1;
      line += std::string(" ") + axes[a] + "=" + fmt(p->slope);
    }
    out.require(ok, line);
  }
  return out;
}

// 10. Noise synthesis statistics and reproducibility.
Outcome criterion10() {
  Outcome out;
  for (const auto& model : {AutocorrelationModel::gaussian(1.0, 0.1), AutocorrelationModel::exponential(1.0, 0.01),
                            AutocorrelationModel::exponential(1.0, 0.3)}) {
    const auto grid = TimeGrid::uniform(10.0, 16);
    const NoiseSampler s(model, grid.midpoints(), g_settings.seed);
    const auto check = check_sample_covariance(s, 200000, g_settings.seed);
    const auto again = check_sample_covariance(s, 200000, g_settings.seed);
    out.require(check.passed(5.0), std::string(to_string(model.kind)) + " g=" + fmt(model.gamma) +
                                       " max|z|=" + fmt(check.max_abs_z, 3));
    out.require(check.sample == again.sample, "bit-identical repeat");
  }
  return out;
}

// 11. Plateau from a truncated catalog.
Outcome criterion11() {
  Outcome out;
  const auto truncated = truncated_catalog(catalog(), 3);
  const auto r = run_scaling(sweep({"SYM2ND"}, AutocorrelationModel::gaussian(1.0, 0.1), 1e-3, 1e-1), truncated);
  const auto plateau = estimate_plateau(r.cells_of("SYM2ND"));
  const double ratio = plateau.level / 1e-3;
  out.require(ratio >= 1.0 / 3.0 && ratio <= 3.0,
              "plateau Delta_F " + fmt(plateau.level, 3) + " local slope " + fmt(plateau.local_slope, 3));
  return out;
}

const std::map<int, std::pair<const char*, std::function<Outcome()>>> kCriteria{
    {1, {"Gaussian-noise exponents", criterion1}},
    {2, {"exponential-noise anomalous exponents", criterion2}},
    {3, {"CORPSE/SCORPSE prefactors", criterion3}},
    {4, {"I_3/2 quadrature vs closed forms", criterion4}},
    {5, {"no-go positivity, operator identity, designer floor", criterion5}},
    {6, {"first-order conditions", criterion6}},
    {7, {"metric identities", criterion7}},
    {8, {"SCORPSE polarization exponents", criterion8}},
    {9, {"partial-norm exponents", criterion9}},
    {10, {"noise covariance and reproducibility", criterion10}},
    {11, {"truncated-catalog plateau", criterion11}},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pulselab acceptance criteria"};
  std::vector<int> selected;
  app.add_option("--criterion,-c", selected, "criterion numbers to run (default: all)")->check(CLI::Range(1, 11));
  app.add_option("-M,--realizations", g_settings.realizations, "Monte-Carlo realizations per cell");
  app.add_option("--steps", g_settings.steps, "time steps per pulse");
  app.add_option("--points", g_settings.points, "1/v points per sweep");
  app.add_option("--workers", g_settings.workers, "worker threads (0: all cores)");
  g_settings.seed = seed_from_environment(1);
  app.add_option("--seed", g_settings.seed, "master seed (default PULSELAB_SEED or 1)");
  CLI11_PARSE(app, argc, argv);
  if (selected.empty())
    for (const auto& [k, v] : kCriteria) selected.push_back(k);

  int failures = 0;
  for (int k : selected) {
    const auto& [title, run] = kCriteria.at(k);
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", k, title,
                o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failures += o.passed ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
