// Command-line front end: scaling sweeps, prefactor checks, no-go reports,
// pulse design, noise and catalog validation.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pulselab/errors.hpp"
#include "pulselab/harness.hpp"
#include "pulselab/io.hpp"
#include "pulselab/magnus.hpp"
#include "pulselab/noise.hpp"
#include "pulselab/pulses.hpp"
#include "pulselab/run_config.hpp"

namespace fs = std::filesystem;
using namespace pulselab;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3 };

// Command-line values; each one that was given replaces the config value.
struct Overrides {
  std::optional<std::string> catalog, out, model, estimator, axis, pulse, seed_pulse;
  std::optional<std::uint64_t> seed, realizations;
  std::optional<unsigned> workers;
  std::optional<int> truncate, segments, restarts, max_evaluations;
  std::optional<double> g0, gamma, eta0, inv_v_min, inv_v_max, fit_min, fit_max, v_max, noise_tau;
  std::optional<std::size_t> points, steps, grid, chunk_size, noise_points;
  std::vector<std::string> pulses;
  std::vector<double> inv_v;
  std::vector<std::size_t> step_counts;
  bool record_path = false;

  void apply(RunConfig& c) const {
    if (catalog) c.catalog = *catalog;
    if (out) c.out = *out;
    if (model) c.model = *model;
    if (estimator) c.estimator = *estimator;
    if (axis) c.polarization_axis = *axis;
    if (pulse) c.pulse = *pulse;
    if (seed_pulse) c.seed_pulse = *seed_pulse;
    if (seed) c.seed = *seed;
    if (realizations) c.realizations = *realizations;
    if (workers) c.workers = *workers;
    if (truncate) c.truncate_decimals = *truncate;
    if (segments) c.segments = *segments;
    if (restarts) c.restarts = *restarts;
    if (max_evaluations) c.max_evaluations = *max_evaluations;
    if (g0) c.g0 = *g0;
    if (gamma) c.gamma = *gamma;
    if (eta0) c.eta0 = *eta0;
    if (inv_v_min) c.inv_v_min = *inv_v_min;
    if (inv_v_max) c.inv_v_max = *inv_v_max;
    if (fit_min) c.fit_min = *fit_min;
    if (fit_max) c.fit_max = *fit_max;
    if (v_max) c.v_max = *v_max;
    if (noise_tau) c.noise_tau = *noise_tau;
    if (points) c.inv_v_points = *points;
    if (steps) c.steps = *steps;
    if (grid) c.grid = *grid;
    if (chunk_size) c.chunk_size = *chunk_size;
    if (noise_points) c.noise_points = *noise_points;
    if (!pulses.empty()) c.pulses = pulses;
    if (!inv_v.empty()) c.inv_v = inv_v;
    if (!step_counts.empty()) c.step_counts = step_counts;
    if (record_path) c.record_mean_path = true;
  }
};

void add_model_options(CLI::App* sub, Overrides& o) {
  sub->add_option("--model", o.model, "gaussian or exponential");
  sub->add_option("--g0", o.g0, "noise amplitude (sets the energy unit)");
  sub->add_option("--gamma", o.gamma, "correlation decay rate");
  sub->add_option("--eta0", o.eta0, "constant noise offset");
}

std::string error_json(const char* kind, const std::string& message, int code) {
  return nlohmann::json{{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}}
      .dump();
}

fs::path prepare_out(const RunConfig& c) {
  const fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec || !fs::is_directory(out)) throw ConfigError("cannot create output directory '" + c.out + "'");
  return out;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  f << text;
}

template <class Writer>
void write_with(const fs::path& path, Writer&& w) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path.string() + "'");
  w(f);
}

std::string fit_text(const std::optional<PowerLawFit>& f) {
  if (!f) return "n/a";
  return format_double(f->slope) + " +- " + format_double(f->slope_err);
}

int cmd_scaling(const RunConfig& c, const PulseCatalog& catalog) {
  const ScalingResult result = run_scaling(c.scaling_config(), catalog);
  const fs::path out = prepare_out(c);
  bool all_fitted = true;
  for (const auto& f : result.fits) {
    const auto cells = result.cells_of(f.pulse);
    write_with(out / ("scaling_" + f.pulse + ".csv"), [&](std::ostream& s) { write_scaling_csv(s, cells); });
    write_with(out / ("scaling_" + f.pulse + ".dat"), [&](std::ostream& s) { write_scaling_dat(s, cells); });
    if (c.record_mean_path)
      for (std::size_t k = 0; k < cells.size(); ++k)
        write_with(out / ("path_" + f.pulse + "_" + std::to_string(k) + ".dat"),
                   [&](std::ostream& s) { write_mean_path_dat(s, *cells[k]); });
    std::cout << f.pulse << "  slope " << fit_text(f.total) << "  polarization "
              << fit_text(f.polarization) << '\n';
    all_fitted = all_fitted && f.total.has_value();
  }
  write_file(out / "summary.json", scaling_summary_json(result));
  if (!all_fitted) throw InsufficientPoints("some pulses had fewer than three usable fit points");
  return kOk;
}

int cmd_prefactor(const RunConfig& c, const PulseCatalog& catalog) {
  const std::vector<double> inv_v = c.inv_v.empty() ? std::vector<double>{3e-3, 1e-2} : c.inv_v;
  const auto& shape = catalog.at(c.pulse);
  const auto rows = run_prefactor_check(shape, c.noise_model(), inv_v, c.resolved_realizations(50000),
                                        c.seed, c.steps, c.workers);
  const fs::path out = prepare_out(c);
  write_with(out / ("prefactor_" + shape.name() + ".csv"), [&](std::ostream& s) { write_prefactor_csv(s, rows); });
  write_prefactor_csv(std::cout, rows);
  return kOk;
}

int cmd_nogo(const RunConfig& c, const PulseCatalog& catalog) {
  const auto& shape = catalog.at(c.pulse);
  const auto model = c.noise_model();
  const auto report = verify_nogo(shape, c.grid, model);
  const std::string text = nogo_report_json(shape.name(), report, evaluate_i32(shape, model));
  write_file(prepare_out(c) / ("nogo_" + shape.name() + ".json"), text + "\n");
  std::cout << text << '\n';
  return kOk;
}

int cmd_design(const RunConfig& c, const PulseCatalog& catalog) {
  DesignOptions o = c.design_options();
  if (!c.seed_pulse.empty()) o.initial = catalog.at(c.seed_pulse);
  const DesignResult r = minimize_i32(c.segments, c.noise_model(), o);
  const fs::path out = prepare_out(c);
  write_file(out / ("design_" + std::to_string(c.segments) + ".json"),
             PulseCatalog({r.pulse}).to_json() + "\n");
  const std::string text = design_result_json(r);
  write_file(out / ("design_" + std::to_string(c.segments) + "_report.json"), text + "\n");
  std::cout << text << '\n';
  return kOk;
}

int cmd_noise_validate(const RunConfig& c) {
  const auto model = c.noise_model();
  const TimeGrid grid = TimeGrid::uniform(c.noise_tau, c.noise_points);
  const NoiseSampler sampler(model, grid.midpoints(), c.seed);
  const std::uint64_t m = c.resolved_realizations(200000);
  const auto first = check_sample_covariance(sampler, m, c.seed);
  const auto second = check_sample_covariance(sampler, m, c.seed);
  const bool reproducible = first.sample == second.sample;
  const std::string text = covariance_check_json(first, reproducible);
  write_file(prepare_out(c) / "noise_validate.json", text + "\n");
  std::cout << text << '\n';
  if (!first.passed(5.0) || !reproducible)
    throw NumericalError("sample covariance deviates from the model or is not reproducible");
  return kOk;
}

int cmd_catalog_validate(const PulseCatalog& catalog) {
  const auto report = validate_catalog(catalog);
  std::cout << report.summary();
  return kOk;
}

int cmd_convergence(const RunConfig& c, const PulseCatalog& catalog) {
  const double inv_v = c.inv_v.empty() ? 1e-2 : c.inv_v.front();
  const auto& shape = catalog.at(c.pulse);
  const auto table = run_convergence_check(shape, inv_v, c.noise_model(),
                                           c.resolved_realizations(4000), c.seed, c.step_counts,
                                           c.workers);
  write_with(prepare_out(c) / ("convergence_" + shape.name() + ".csv"),
             [&](std::ostream& s) { write_convergence_csv(s, table); });
  write_convergence_csv(std::cout, table);
  std::cout << (table.passed ? "converged" : "not converged") << '\n';
  if (!table.passed) throw NumericalError("finest-grid drift exceeds 0.5%");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo and Magnus analysis of shaped pi pulses under dephasing noise"};
  app.require_subcommand(1);
  app.fallthrough();

  Overrides o;
  std::string config_path;
  bool dump_config = false;
  app.add_option("--config", config_path, "JSON config file; flags override its values");
  app.add_flag("--dump-config", dump_config, "print the resolved config and exit");
  app.add_option("--catalog", o.catalog, "pulse catalog JSON (default: shipped catalog)");
  app.add_option("--out", o.out, "output directory");
  app.add_option("--seed", o.seed, "master seed (default: $PULSELAB_SEED or 0)");
  app.add_option("--workers", o.workers, "worker threads (0: all cores)");
  app.add_option("--truncate", o.truncate, "chop catalog numbers to this many decimals");

  auto* scaling = app.add_subcommand("scaling", "Delta_F versus 1/v sweep with power-law fits");
  add_model_options(scaling, o);
  scaling->add_option("--pulses", o.pulses, "comma-separated pulse names")->delimiter(',');
  scaling->add_option("--inv-v", o.inv_v, "explicit 1/v values")->delimiter(',');
  scaling->add_option("--inv-v-min", o.inv_v_min);
  scaling->add_option("--inv-v-max", o.inv_v_max);
  scaling->add_option("--points", o.points, "number of log-spaced 1/v values");
  scaling->add_option("-M,--realizations", o.realizations);
  scaling->add_option("--steps", o.steps, "time steps per pulse");
  scaling->add_option("--fit-min", o.fit_min);
  scaling->add_option("--fit-max", o.fit_max);
  scaling->add_option("--estimator", o.estimator, "mean_df2 or mean_df");
  scaling->add_option("--axis", o.axis, "polarization axis x, y or z");
  scaling->add_option("--chunk-size", o.chunk_size);
  scaling->add_flag("--record-path", o.record_path, "write ensemble-mean polarization paths");

  auto* prefactor = app.add_subcommand("prefactor", "Monte-Carlo Delta_F^2 against (4/3) I_3/2");
  add_model_options(prefactor, o);
  prefactor->add_option("--pulse", o.pulse);
  prefactor->add_option("--inv-v", o.inv_v)->delimiter(',');
  prefactor->add_option("-M,--realizations", o.realizations);
  prefactor->add_option("--steps", o.steps);

  auto* nogo = app.add_subcommand("nogo", "discretized operator check of I_3/2 > 0");
  add_model_options(nogo, o);
  nogo->add_option("--pulse", o.pulse);
  nogo->add_option("--grid", o.grid, "number of grid points");

  auto* design = app.add_subcommand("design", "search for pulse shapes minimizing I_3/2");
  add_model_options(design, o);
  design->add_option("--segments", o.segments);
  design->add_option("--v-max", o.v_max);
  design->add_option("--restarts", o.restarts);
  design->add_option("--max-evaluations", o.max_evaluations, "per restart");
  design->add_option("--seed-pulse", o.seed_pulse, "catalog pulse used as the first start");

  auto* noise = app.add_subcommand("noise-validate", "sample covariance against the model");
  add_model_options(noise, o);
  noise->add_option("--points", o.noise_points);
  noise->add_option("--tau", o.noise_tau, "grid duration");
  noise->add_option("-M,--realizations", o.realizations);

  auto* catalog_cmd = app.add_subcommand("catalog-validate", "check pi angle and first-order conditions");

  auto* convergence = app.add_subcommand("convergence", "step-count self-convergence of one cell");
  add_model_options(convergence, o);
  convergence->add_option("--pulse", o.pulse);
  convergence->add_option("--inv-v", o.inv_v)->delimiter(',');
  convergence->add_option("-M,--realizations", o.realizations);
  convergence->add_option("--step-counts", o.step_counts)->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << error_json("UsageError", e.what(), kUsage) << '\n';
    return kUsage;
  }

  try {
    RunConfig base;
    base.seed = seed_from_environment(0);
    RunConfig cfg = config_path.empty() ? base : RunConfig::load(config_path, base);
    o.apply(cfg);
    if (dump_config) {
      std::cout << cfg.to_json() << '\n';
      return kOk;
    }
    const PulseCatalog catalog = cfg.load_catalog();
    cfg.validate(catalog);

    if (scaling->parsed()) return cmd_scaling(cfg, catalog);
    if (prefactor->parsed()) return cmd_prefactor(cfg, catalog);
    if (nogo->parsed()) return cmd_nogo(cfg, catalog);
    if (design->parsed()) return cmd_design(cfg, catalog);
    if (noise->parsed()) return cmd_noise_validate(cfg);
    if (catalog_cmd->parsed()) return cmd_catalog_validate(catalog);
    if (convergence->parsed()) return cmd_convergence(cfg, catalog);
    return kUsage;
  } catch (const CatalogInvalid& e) {
    std::cerr << error_json(e.kind(), e.report().summary(), kConfig) << '\n';
    return kConfig;
  } catch (const ConfigError& e) {
    std::cerr << error_json(e.kind(), e.what(), kConfig) << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << error_json(e.kind(), e.what(), kNumerical) << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << error_json("IOError", e.what(), kConfig) << '\n';
    return kConfig;
  }
}
