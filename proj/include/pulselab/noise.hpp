#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pulselab {

enum class CorrelationKind { Gaussian, Exponential };

/// Two-point function g(t) of stationary Gaussian dephasing noise.
///
/// Gaussian:    g(t) = g0^2 exp(-gamma^2 t^2)   (analytic at t = 0)
/// Exponential: g(t) = g0^2 exp(-gamma |t|)     (Ornstein-Uhlenbeck, cusp at t = 0)
///
/// eta0 is a constant mean offset added to every sample.
struct AutocorrelationModel {
  CorrelationKind kind = CorrelationKind::Gaussian;
  double g0 = 1.0;
  double gamma = 0.0;
  double eta0 = 0.0;

  static AutocorrelationModel gaussian(double g0, double gamma, double eta0 = 0.0);
  static AutocorrelationModel exponential(double g0, double gamma, double eta0 = 0.0);

  /// Throws ConfigError on g0 <= 0, gamma < 0 or non-finite values.
  void validate() const;

  double operator()(double t) const;

  /// Coefficient a of -a|t| in the small-t expansion of g: 0 for the
  /// Gaussian model, g0^2 * gamma for the exponential one.
  double cusp_coefficient() const;
};

double evaluate_autocorrelation(const AutocorrelationModel& model, double t);

const char* to_string(CorrelationKind kind);
CorrelationKind correlation_kind_from_string(const std::string& name);

/// Discretization of [0, tau_p] into N steps. Boundaries are strictly
/// increasing from exactly 0 to exactly tau_p.
class TimeGrid {
 public:
  TimeGrid() = default;
  explicit TimeGrid(std::vector<double> boundaries);

  static TimeGrid uniform(double tau_p, std::size_t steps);

  /// Splits [0, tau_p] so that every fraction in `breakpoints` (strictly
  /// inside (0,1), increasing) lands exactly on a boundary computed as
  /// fraction * tau_p. Steps are shared among the pieces in proportion to
  /// their length (largest remainder), at least one per piece.
  static TimeGrid aligned(double tau_p, std::span<const double> breakpoints, std::size_t steps);

  std::size_t steps() const { return boundaries_.size() - 1; }
  double tau_p() const { return boundaries_.back(); }
  const std::vector<double>& boundaries() const { return boundaries_; }
  const std::vector<double>& midpoints() const { return midpoints_; }
  double width(std::size_t i) const { return boundaries_[i + 1] - boundaries_[i]; }
  bool has_boundary(double t) const;

 private:
  std::vector<double> boundaries_{0.0};
  std::vector<double> midpoints_;
};

/// One discretized sample path; values[i] is eta on step i.
struct NoiseRealization {
  std::shared_ptr<const TimeGrid> grid;
  std::vector<double> values;
};

/// 64-bit mixing used to derive independent RNG streams from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

/// Correlated Gaussian noise by eigendecomposition of the covariance
/// G_ij = g(s_i - s_j) at the sample instants s_i. Immutable once built.
class NoiseSampler {
 public:
  static constexpr double default_clip = 1e-10;

  NoiseSampler(const AutocorrelationModel& model, std::vector<double> sample_times,
               std::uint64_t seed, double clip = default_clip);

  const AutocorrelationModel& model() const { return model_; }
  const std::vector<double>& sample_times() const { return times_; }
  std::size_t size() const { return times_.size(); }
  std::uint64_t seed() const { return seed_; }

  /// O * sqrt(D); transform * transform^T reproduces the covariance.
  const Eigen::MatrixXd& transform() const { return transform_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }

  /// Fills `out` (size() x out.cols()) with independent realizations,
  /// drawing standard normals column by column from `rng`.
  void sample_block(std::mt19937_64& rng, Eigen::MatrixXd& out) const;

 private:
  AutocorrelationModel model_;
  std::vector<double> times_;
  std::uint64_t seed_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd transform_;
  Eigen::VectorXd eigenvalues_;
};

/// Sampler over the midpoints of a grid. Throws EigenvalueTooNegative when
/// an eigenvalue falls below -clip * lambda_max.
class GridNoiseSampler : public NoiseSampler {
 public:
  GridNoiseSampler(const AutocorrelationModel& model, std::shared_ptr<const TimeGrid> grid,
                   std::uint64_t seed, double clip = default_clip);
  const std::shared_ptr<const TimeGrid>& grid() const { return grid_; }

 private:
  std::shared_ptr<const TimeGrid> grid_;
};

GridNoiseSampler build_sampler(const AutocorrelationModel& model, const TimeGrid& grid,
                               std::uint64_t seed);

/// Deterministic stream of realizations; stream k of a sampler is derived
/// from (sampler seed, k), so workers can sample independently.
class NoiseStream {
 public:
  NoiseStream(const GridNoiseSampler& sampler, std::uint64_t stream_id = 0);

  NoiseRealization sample();

 private:
  const GridNoiseSampler* sampler_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_;
};

struct CovarianceCheck {
  std::uint64_t realizations = 0;
  Eigen::MatrixXd sample;    // mean of (eta_i - eta0)(eta_j - eta0)
  Eigen::MatrixXd expected;  // g(s_i - s_j)
  Eigen::MatrixXd z;         // (sample - expected) / standard error
  double max_abs_z = 0.0;
  bool passed(double threshold) const { return max_abs_z <= threshold; }
};

/// Draws M realizations from `sampler` (in blocks, from streams derived
/// from `seed`) and compares the sample covariance with the model. The
/// standard error of each entry is sqrt((G_ii G_jj + G_ij^2) / M).
CovarianceCheck check_sample_covariance(const NoiseSampler& sampler, std::uint64_t realizations,
                                        std::uint64_t seed);

}  // namespace pulselab
