#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pulselab/harness.hpp"
#include "pulselab/magnus.hpp"
#include "pulselab/noise.hpp"

namespace pulselab {

/// Flat, JSON-serializable settings for every CLI subcommand. Optional
/// fields fall back to subcommand- or model-dependent defaults.
struct RunConfig {
  // io and execution
  std::string catalog;  // empty: the shipped catalog
  std::string out = "results";
  std::uint64_t seed = 0;
  unsigned workers = 0;
  int truncate_decimals = -1;  // < 0: use the catalog as is

  // noise model (g0 = 1 sets the units)
  std::string model = "gaussian";
  double g0 = 1.0;
  double gamma = 0.1;
  double eta0 = 0.0;

  // scaling sweep
  std::vector<std::string> pulses{"RECT", "CORPSE", "SCORPSE", "CLASS2ND", "SYM2ND", "ASYM2ND"};
  std::vector<double> inv_v;  // explicit 1/v list; empty: log-spaced over the window
  std::optional<double> inv_v_min;
  std::optional<double> inv_v_max;
  std::size_t inv_v_points = 8;
  std::optional<std::uint64_t> realizations;
  std::size_t steps = 512;
  std::optional<double> fit_min;
  std::optional<double> fit_max;
  std::string estimator = "mean_df2";
  bool record_mean_path = false;
  std::string polarization_axis = "y";
  std::size_t chunk_size = 1024;

  // single-pulse subcommands (prefactor, nogo, convergence)
  std::string pulse = "SCORPSE";
  std::size_t grid = 2048;
  std::vector<std::size_t> step_counts{256, 512, 1024};

  // design
  int segments = 3;
  double v_max = 1.0;
  int restarts = 10;
  int max_evaluations = 4000;
  std::string seed_pulse;  // catalog name used as the first starting point

  // noise-validate
  std::size_t noise_points = 16;
  double noise_tau = 10.0;

  AutocorrelationModel noise_model() const;
  Axis axis() const;
  /// Window defaults: [1e-3, 1e-1] for Gaussian noise, [1e-3, 3e-2] for
  /// exponential noise.
  double resolved_fit_min() const;
  double resolved_fit_max() const;
  std::uint64_t resolved_realizations(std::uint64_t fallback) const;
  std::vector<double> resolved_inv_v() const;
  ScalingExperimentConfig scaling_config() const;
  DesignOptions design_options() const;

  /// Loads the configured catalog (truncated if requested).
  PulseCatalog load_catalog() const;

  /// Every referenced pulse must resolve; throws ConfigError otherwise.
  void validate(const PulseCatalog& catalog) const;

  /// Keys present in `text` replace the corresponding fields of `base`.
  /// Throws ConfigError on unknown keys or mistyped values.
  static RunConfig from_json(const std::string& text, RunConfig base);
  static RunConfig from_json(const std::string& text) { return from_json(text, RunConfig{}); }
  static RunConfig load(const std::string& path, RunConfig base);
  static RunConfig load(const std::string& path) { return load(path, RunConfig{}); }
  std::string to_json() const;
};

/// Seed from PULSELAB_SEED when set and parseable, else `fallback`.
std::uint64_t seed_from_environment(std::uint64_t fallback = 0);

}  // namespace pulselab
