#include "pulselab/harness.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <memory>

#include "pulselab/errors.hpp"
#include "pulselab/magnus.hpp"
#include "pulselab/propagator.hpp"
#include "parallel.hpp"

namespace pulselab {

const char* to_string(Estimator e) { return e == Estimator::MeanDf ? "mean_df" : "mean_df2"; }

Estimator estimator_from_string(const std::string& name) {
  if (name == "mean_df2") return Estimator::MeanDf2;
  if (name == "mean_df") return Estimator::MeanDf;
  throw ConfigError("unknown estimator '" + name + "' (expected mean_df2 or mean_df)");
}

void ScalingExperimentConfig::validate() const {
  model.validate();
  if (pulses.empty()) throw ConfigError("no pulses selected");
  if (inv_v_grid.empty()) throw ConfigError("empty 1/v grid");
  for (std::size_t i = 0; i < inv_v_grid.size(); ++i) {
    if (!(inv_v_grid[i] > 0.0) || !std::isfinite(inv_v_grid[i]))
      throw ConfigError("1/v values must be positive and finite");
    if (i > 0 && !(inv_v_grid[i] > inv_v_grid[i - 1]))
      throw ConfigError("1/v grid must be strictly increasing");
  }
  if (!(fit_min < fit_max)) throw ConfigError("fit window is empty");
  const double slack = 1e-12;
  if (fit_min < inv_v_grid.front() * (1.0 - slack) || fit_max > inv_v_grid.back() * (1.0 + slack))
    throw ConfigError("fit window reaches outside the 1/v grid");
  if (realizations < 2) throw ConfigError("at least two realizations per point are required");
  if (steps_per_pulse < 1) throw ConfigError("steps_per_pulse must be positive");
  if (chunk_size < 1) throw ConfigError("chunk_size must be positive");
}

std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0 && hi > lo) || n < 2) throw ConfigError("log_spaced needs 0 < lo < hi and n >= 2");
  std::vector<double> out(n);
  const double a = std::log10(lo), b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::vector<const CellResult*> ScalingResult::cells_of(const std::string& pulse) const {
  std::vector<const CellResult*> out;
  for (const auto& c : cells)
    if (c.pulse == pulse) out.push_back(&c);
  return out;
}

const PulseFits* ScalingResult::fits_of(const std::string& pulse) const {
  for (const auto& f : fits)
    if (f.pulse == pulse) return &f;
  return nullptr;
}

std::uint64_t cell_seed(std::uint64_t seed, const std::string& pulse, double inv_v) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char ch : pulse) {
    h ^= static_cast<unsigned char>(std::toupper(ch));
    h *= 0x100000001b3ULL;
  }
  return mix_seed(mix_seed(seed, h), std::bit_cast<std::uint64_t>(inv_v));
}

namespace {

MeanWithError summarize(const MomentAccumulator& m) { return {m.mean(), m.standard_error()}; }

BlochVector unit_vector(Axis axis) {
  BlochVector r{0.0, 0.0, 0.0};
  r[static_cast<std::size_t>(axis)] = 1.0;
  return r;
}

struct ChunkTally {
  FrobeniusAccumulator frobenius;
  MomentAccumulator polarization;
  std::vector<double> path_sum;
};

std::size_t chunk_count(std::uint64_t m, std::size_t chunk) {
  return static_cast<std::size_t>((m + chunk - 1) / chunk);
}

}  // namespace

CellResult run_cell(const PiecewiseConstantPulse& shape, double inv_v,
                    const ScalingExperimentConfig& config) {
  if (!(inv_v > 0.0)) throw ConfigError("1/v must be positive");
  const PiecewiseConstantPulse pulse = shape.with_peak_amplitude(1.0 / inv_v);
  const auto grid = std::make_shared<const TimeGrid>(aligned_grid(pulse, config.steps_per_pulse));
  const std::uint64_t seed = cell_seed(config.seed, shape.name(), inv_v);
  const NoiseSampler sampler(config.model, grid->midpoints(), seed);
  const EvolutionPlan plan(pulse, *grid);
  const Unitary2 ideal_dagger = ideal_pulse().adjoint();
  const std::size_t axis = static_cast<std::size_t>(config.polarization_axis);
  const BlochVector initial = unit_vector(config.polarization_axis);
  const double target = ideal_polarization(config.polarization_axis);
  const bool track = config.track_polarization || config.record_mean_path;

  const std::size_t n_chunks = chunk_count(config.realizations, config.chunk_size);
  std::vector<ChunkTally> tallies(n_chunks);
  parallel_for(n_chunks, config.workers, [&](std::size_t c) {
    const std::uint64_t first = static_cast<std::uint64_t>(c) * config.chunk_size;
    const auto count = static_cast<Eigen::Index>(
        std::min<std::uint64_t>(config.chunk_size, config.realizations - first));
    std::mt19937_64 rng(mix_seed(seed, c));
    Eigen::MatrixXd block(static_cast<Eigen::Index>(grid->steps()), count);
    sampler.sample_block(rng, block);

    ChunkTally& tally = tallies[c];
    std::vector<TrajectoryPoint> trajectory;
    if (config.record_mean_path) tally.path_sum.assign(grid->steps() + 1, 0.0);
    for (Eigen::Index j = 0; j < count; ++j) {
      const std::span<const double> eta(block.col(j).data(), grid->steps());
      Unitary2 u;
      if (config.record_mean_path) {
        u = plan.propagate_tracked(eta, initial, trajectory);
        for (std::size_t k = 0; k < trajectory.size(); ++k)
          tally.path_sum[k] += trajectory[k].bloch[axis];
      } else {
        u = plan.propagate(eta);
      }
      tally.frobenius.add(frobenius_from_unitary(ideal_dagger * u));
      if (track) tally.polarization.add(std::abs(u.rotate(initial)[axis] - target));
    }
  });

  ChunkTally total;
  if (config.record_mean_path) total.path_sum.assign(grid->steps() + 1, 0.0);
  for (const auto& t : tallies) {
    total.frobenius.merge(t.frobenius);
    total.polarization.merge(t.polarization);
    for (std::size_t k = 0; k < t.path_sum.size(); ++k) total.path_sum[k] += t.path_sum[k];
  }

  CellResult cell;
  cell.pulse = shape.name();
  cell.inv_v = inv_v;
  cell.tau_p = pulse.tau_p();
  cell.total = total.frobenius.estimate();
  cell.df = {total.frobenius.mean_of_df(), total.frobenius.stderr_of_df()};
  for (int a = 0; a < 3; ++a) cell.partials[a] = summarize(total.frobenius.partial(Axis(a)));
  if (track) cell.polarization = summarize(total.polarization);
  if (config.record_mean_path) {
    const auto m = static_cast<double>(config.realizations);
    const auto& b = grid->boundaries();
    cell.mean_path.reserve(b.size());
    for (std::size_t k = 0; k < b.size(); ++k) cell.mean_path.emplace_back(b[k], total.path_sum[k] / m);
  }
  return cell;
}

PulseFits fit_cells(const std::string& pulse, const std::vector<const CellResult*>& cells,
                    const ScalingExperimentConfig& config) {
  PulseFits fits;
  fits.pulse = pulse;
  auto attempt = [&](auto make_point, double power) -> std::optional<PowerLawFit> {
    std::vector<FitPoint> pts;
    for (const CellResult* c : cells) pts.push_back(make_point(*c));
    try {
      return fit_power_law(pts, config.fit_min, config.fit_max, power);
    } catch (const InsufficientPoints&) {
      return std::nullopt;
    }
  };

  if (config.estimator == Estimator::MeanDf2)
    fits.total = attempt(
        [](const CellResult& c) { return FitPoint{c.inv_v, c.total.mean_df2, c.total.stderr_df2}; },
        0.5);
  else
    fits.total = attempt(
        [](const CellResult& c) { return FitPoint{c.inv_v, c.df.mean, c.df.error}; }, 1.0);
  if (!fits.total) fits.failure = "fewer than three usable points in the fit window";

  for (int a = 0; a < 3; ++a)
    fits.partials[a] = attempt(
        [a](const CellResult& c) {
          return FitPoint{c.inv_v, c.partials[a].mean, c.partials[a].error};
        },
        0.5);
  if (config.track_polarization)
    fits.polarization = attempt(
        [](const CellResult& c) {
          return FitPoint{c.inv_v, c.polarization->mean, c.polarization->error};
        },
        1.0);
  return fits;
}

ScalingResult run_scaling(const ScalingExperimentConfig& config, const PulseCatalog& catalog) {
  config.validate();
  ScalingResult result;
  result.config = config;
  for (const auto& name : config.pulses) {
    const PiecewiseConstantPulse& shape = catalog.at(name);
    std::vector<const CellResult*> mine;
    const std::size_t first = result.cells.size();
    for (double inv_v : config.inv_v_grid) result.cells.push_back(run_cell(shape, inv_v, config));
    for (std::size_t i = first; i < result.cells.size(); ++i) mine.push_back(&result.cells[i]);
    result.fits.push_back(fit_cells(shape.name(), mine, config));
  }
  return result;
}

// ---------------------------------------------------------------------------

std::vector<PrefactorRow> run_prefactor_check(const PiecewiseConstantPulse& shape,
                                              const AutocorrelationModel& model,
                                              std::span<const double> inv_v,
                                              std::uint64_t realizations, std::uint64_t seed,
                                              std::size_t steps, unsigned workers) {
  if (model.kind != CorrelationKind::Exponential)
    throw ConfigError("the prefactor check applies to the exponential model only");
  ScalingExperimentConfig cfg;
  cfg.model = model;
  cfg.realizations = realizations;
  cfg.steps_per_pulse = steps;
  cfg.seed = seed;
  cfg.workers = workers;
  std::vector<PrefactorRow> rows;
  for (double x : inv_v) {
    const CellResult cell = run_cell(shape, x, cfg);
    PrefactorRow row;
    row.inv_v = x;
    row.measured = cell.total.mean_df2;
    row.error = cell.total.stderr_df2;
    row.predicted = 4.0 / 3.0 * evaluate_i32(shape.with_peak_amplitude(1.0 / x), model);
    row.ratio = row.measured / row.predicted;
    row.ratio_err = row.error / row.predicted;
    row.z = (row.measured - row.predicted) / row.error;
    row.within_3_sigma = std::abs(row.z) <= 3.0;
    rows.push_back(row);
  }
  return rows;
}

ConvergenceTable run_convergence_check(const PiecewiseConstantPulse& shape, double inv_v,
                                       const AutocorrelationModel& model,
                                       std::uint64_t realizations, std::uint64_t seed,
                                       std::span<const std::size_t> step_counts,
                                       unsigned workers) {
  if (step_counts.size() < 2) throw ConfigError("convergence check needs at least two step counts");
  if (realizations < 2) throw ConfigError("at least two realizations are required");
  model.validate();
  const PiecewiseConstantPulse pulse = shape.with_peak_amplitude(1.0 / inv_v);

  std::vector<TimeGrid> grids;
  std::vector<EvolutionPlan> plans;
  std::vector<std::size_t> offsets;
  std::vector<double> times;
  for (std::size_t n : step_counts) {
    grids.push_back(aligned_grid(pulse, n));
    offsets.push_back(times.size());
    times.insert(times.end(), grids.back().midpoints().begin(), grids.back().midpoints().end());
  }
  for (const auto& g : grids) plans.emplace_back(pulse, g);

  const std::uint64_t base = cell_seed(seed, shape.name(), inv_v);
  const NoiseSampler sampler(model, times, base);
  const Unitary2 ideal_dagger = ideal_pulse().adjoint();
  constexpr std::size_t kChunk = 256;
  const std::size_t n_chunks = chunk_count(realizations, kChunk);
  std::vector<std::vector<FrobeniusAccumulator>> tallies(
      n_chunks, std::vector<FrobeniusAccumulator>(grids.size()));
  parallel_for(n_chunks, workers, [&](std::size_t c) {
    const std::uint64_t first = static_cast<std::uint64_t>(c) * kChunk;
    const auto count =
        static_cast<Eigen::Index>(std::min<std::uint64_t>(kChunk, realizations - first));
    std::mt19937_64 rng(mix_seed(base, c));
    Eigen::MatrixXd block(static_cast<Eigen::Index>(times.size()), count);
    sampler.sample_block(rng, block);
    for (Eigen::Index j = 0; j < count; ++j)
      for (std::size_t g = 0; g < grids.size(); ++g) {
        const std::span<const double> eta(block.col(j).data() + offsets[g], grids[g].steps());
        tallies[c][g].add(frobenius_from_unitary(ideal_dagger * plans[g].propagate(eta)));
      }
  });

  ConvergenceTable table;
  for (std::size_t g = 0; g < grids.size(); ++g) {
    FrobeniusAccumulator acc;
    for (const auto& t : tallies) acc.merge(t[g]);
    const auto e = acc.estimate();
    ConvergenceRow row{step_counts[g], e.mean_df2, e.stderr_df2, 0.0};
    if (g > 0) {
      const double prev = table.rows.back().mean_df2;
      row.drift = prev != 0.0 ? (row.mean_df2 - prev) / prev : row.mean_df2 - prev;
    }
    table.rows.push_back(row);
  }
  table.monotone = true;
  for (std::size_t g = 2; g < table.rows.size(); ++g)
    if (std::abs(table.rows[g].drift) > std::abs(table.rows[g - 1].drift)) table.monotone = false;
  table.passed = std::abs(table.rows.back().drift) < kConvergenceThreshold;
  return table;
}

PulseCatalog truncated_catalog(const PulseCatalog& catalog, int decimals) {
  std::vector<PiecewiseConstantPulse> out;
  for (const auto& p : catalog.pulses()) {
    const auto t = p.truncated(decimals);
    out.emplace_back(p.name(), p.order(), t.segments(), p.tau_p());
  }
  return PulseCatalog(std::move(out));
}

Plateau estimate_plateau(const std::vector<const CellResult*>& cells) {
  if (cells.size() < 2) throw InsufficientPoints("plateau estimate needs two cells");
  auto sorted = cells;
  std::sort(sorted.begin(), sorted.end(),
            [](const CellResult* a, const CellResult* b) { return a->inv_v < b->inv_v; });
  const CellResult& a = *sorted[0];
  const CellResult& b = *sorted[1];
  Plateau p;
  p.level = std::sqrt(a.total.mean_df * b.total.mean_df);
  p.local_slope = std::log(b.total.mean_df / a.total.mean_df) / std::log(b.inv_v / a.inv_v);
  return p;
}

}  // namespace pulselab
