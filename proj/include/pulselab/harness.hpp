#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulselab/metrics.hpp"
#include "pulselab/noise.hpp"
#include "pulselab/pulses.hpp"

namespace pulselab {

enum class Estimator { MeanDf2, MeanDf };

const char* to_string(Estimator e);
Estimator estimator_from_string(const std::string& name);

/// Units: g0 = 1 fixes the energy scale, so 1/v and tau_p are in 1/g0.
struct ScalingExperimentConfig {
  std::vector<std::string> pulses;
  AutocorrelationModel model;
  std::vector<double> inv_v_grid;
  std::uint64_t realizations = 20000;
  std::size_t steps_per_pulse = 512;
  std::uint64_t seed = 0;
  double fit_min = 1e-3;
  double fit_max = 1e-1;
  Estimator estimator = Estimator::MeanDf2;
  bool track_polarization = false;
  /// Also record the ensemble-mean trajectory <sigma^axis>(t) per cell.
  bool record_mean_path = false;
  Axis polarization_axis = Axis::Y;
  /// 0 picks std::thread::hardware_concurrency().
  unsigned workers = 0;
  std::size_t chunk_size = 1024;

  /// Throws ConfigError on an empty or non-increasing grid, a fit window
  /// outside the grid range, or fewer than two realizations.
  void validate() const;
};

/// n log-spaced values from lo to hi inclusive.
std::vector<double> log_spaced(double lo, double hi, std::size_t n);

struct MeanWithError {
  double mean = 0.0;
  double error = 0.0;
};

struct CellResult {
  std::string pulse;
  double inv_v = 0.0;
  double tau_p = 0.0;
  MonteCarloEstimate total;
  MeanWithError df;                      // mean of Delta_F itself
  std::array<MeanWithError, 3> partials; // (Delta_F^(alpha))^2, alpha = x, y, z
  std::optional<MeanWithError> polarization;
  std::vector<std::pair<double, double>> mean_path;
};

/// Input of the log-log fit: a positive quantity and its standard error.
struct FitPoint {
  double inv_v = 0.0;
  double mean = 0.0;
  double error = 0.0;
};

struct ExcludedPoint {
  double inv_v = 0.0;
  std::string reason;
};

struct PowerLawFit {
  double slope = 0.0;
  double slope_err = 0.0;
  double intercept = 0.0;  // log10 prefactor
  double intercept_err = 0.0;
  std::size_t used = 0;
  bool weighted = true;
  std::vector<ExcludedPoint> excluded;
};

constexpr double kMaxRelativeError = 0.05;

/// Weighted least squares of log10(mean^power) against log10(inv_v) over
/// [lo, hi]. Weights are 1/sigma^2 with sigma = power * stderr/(mean ln 10);
/// when any sigma is zero all weights are one. Points with relative error
/// above max_rel_err are dropped. Parameter errors are scaled by the
/// residuals, so points exactly on a power law give zero error.
/// Throws InsufficientPoints when fewer than three points remain.
PowerLawFit fit_power_law(std::span<const FitPoint> points, double lo, double hi, double power,
                          double max_rel_err = kMaxRelativeError);

/// Exponent of Delta_F from points carrying mean Delta_F^2 and its error.
PowerLawFit fit_exponent(std::span<const FitPoint> points, double lo, double hi);

struct PulseFits {
  std::string pulse;
  std::optional<PowerLawFit> total;
  std::array<std::optional<PowerLawFit>, 3> partials;
  std::optional<PowerLawFit> polarization;
  std::string failure;  // why the total fit is missing, if it is
};

struct ScalingResult {
  ScalingExperimentConfig config;
  std::vector<CellResult> cells;
  std::vector<PulseFits> fits;

  std::vector<const CellResult*> cells_of(const std::string& pulse) const;
  const PulseFits* fits_of(const std::string& pulse) const;
};

/// Identity of a Monte-Carlo cell for seeding: stable across platforms.
std::uint64_t cell_seed(std::uint64_t seed, const std::string& pulse, double inv_v);

/// Runs one cell: M realizations of the pulse with peak amplitude 1/inv_v.
CellResult run_cell(const PiecewiseConstantPulse& shape, double inv_v,
                    const ScalingExperimentConfig& config);

/// Sweeps every (pulse, 1/v) cell and fits exponents. Deterministic for a
/// given config; the worker count does not change any output bit.
ScalingResult run_scaling(const ScalingExperimentConfig& config,
                          const PulseCatalog& catalog = PulseCatalog::builtin());

/// Fits for one pulse's cells (total, partials, polarization).
PulseFits fit_cells(const std::string& pulse, const std::vector<const CellResult*>& cells,
                    const ScalingExperimentConfig& config);

struct PrefactorRow {
  double inv_v = 0.0;
  double measured = 0.0;  // mean Delta_F^2
  double error = 0.0;
  double predicted = 0.0; // (4/3) I_3/2
  double ratio = 0.0;
  double ratio_err = 0.0;
  double z = 0.0;         // (measured - predicted) / stderr
  bool within_3_sigma = false;
};

/// Compares Monte-Carlo Delta_F^2 with the anomalous-term prediction
/// (4/3) I_3/2, which is 4 pi g0^2 gamma / v^3 for CORPSE and
/// (8/3) pi g0^2 gamma / v^3 for SCORPSE. Throws ConfigError unless the
/// model is exponential.
std::vector<PrefactorRow> run_prefactor_check(const PiecewiseConstantPulse& shape,
                                              const AutocorrelationModel& model,
                                              std::span<const double> inv_v,
                                              std::uint64_t realizations, std::uint64_t seed,
                                              std::size_t steps = 512, unsigned workers = 0);

struct ConvergenceRow {
  std::size_t steps = 0;
  double mean_df2 = 0.0;
  double error = 0.0;
  double drift = 0.0;  // relative change against the previous row
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  bool monotone = false;
  bool passed = false;  // |drift| of the finest pair below the threshold
};

constexpr double kConvergenceThreshold = 0.005;

/// Repeats one cell for several step counts. Every realization is drawn
/// once on the union of all grids' midpoints, so all step counts see the
/// same noise path and the drift measures discretization alone.
ConvergenceTable run_convergence_check(const PiecewiseConstantPulse& shape, double inv_v,
                                       const AutocorrelationModel& model,
                                       std::uint64_t realizations, std::uint64_t seed,
                                       std::span<const std::size_t> step_counts,
                                       unsigned workers = 0);

/// Every pulse chopped to `decimals` places, emulating a finite accuracy of
/// the pulse realization.
PulseCatalog truncated_catalog(const PulseCatalog& catalog, int decimals);

struct Plateau {
  double level = 0.0;       // mean Delta_F at the smallest 1/v values
  double local_slope = 0.0; // log-log slope between those points
};

/// Reads the floor of a pulse's Delta_F curve from its two smallest-1/v cells.
Plateau estimate_plateau(const std::vector<const CellResult*>& cells);

}  // namespace pulselab
