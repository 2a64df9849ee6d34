#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pulselab/exact_sum.hpp"
#include "pulselab/propagator.hpp"

namespace pulselab {

enum class Axis { X = 0, Y = 1, Z = 2 };

/// Frobenius distance between ideally and really flipped polarized states,
/// averaged over the three polarization directions.
struct FrobeniusSample {
  double delta_f_squared = 0.0;
  std::array<double, 3> partials{};  // (Delta_F^(alpha))^2 for alpha = x, y, z
};

constexpr double kUnitarityTolerance = 1e-10;

/// Partial and total squared Frobenius norms of a correcting factor U_c.
/// Throws NotUnitary if U_c deviates from unitarity by more than 1e-10.
/// The trace expressions are evaluated after substituting the unitarity
/// normalization, which removes the 1 - (1 - x) cancellation, e.g.
///   (Delta^(z))^2 = |u01|^2 + |u10|^2.
FrobeniusSample frobenius_from_unitary(const Unitary2& u_correcting);

/// Same quantities from literal density matrices, 2[1 - Tr(rho_id rho_1)].
/// Loses relative accuracy once Delta_F^2 approaches 1e-16; test oracle.
FrobeniusSample frobenius_by_density_matrices(const Unitary2& u_correcting);

/// (4/3)(1 - (Re Tr U_c / 2)^2), valid for SU(2) correcting factors.
double frobenius_su2_shortcut(const Unitary2& u_correcting);

struct PolarizationDeviation {
  double final_deviation = 0.0;
  std::vector<std::pair<double, double>> path;  // (t, <sigma^axis>(t))
};

/// Ideal value of <sigma^axis> after a pi flip about x: +1 for x, -1 otherwise.
double ideal_polarization(Axis axis);

/// |<sigma^axis>(tau_p) - ideal|. Throws MissingTrajectory on an empty
/// trajectory or one not starting polarized along `axis`.
PolarizationDeviation polarization_deviation(const std::vector<TrajectoryPoint>& trajectory,
                                             Axis axis);

struct MonteCarloEstimate {
  double mean_df2 = 0.0;
  double stderr_df2 = 0.0;
  double mean_df = 0.0;  // sqrt(mean_df2)
  std::uint64_t realizations = 0;
};

/// Mean and standard error of a stream of values using exact sums; the
/// result is independent of how the stream was chunked or merged.
class MomentAccumulator {
 public:
  void add(double x);
  void merge(const MomentAccumulator& other);
  std::uint64_t count() const { return count_; }
  double mean() const;
  /// Sample standard deviation / sqrt(M); 0 when M < 2.
  double standard_error() const;

 private:
  ExactSum sum_;
  ExactSum sum_sq_;
  std::uint64_t count_ = 0;
};

/// Aggregates FrobeniusSamples: the squared norm (primary estimator), the
/// norm itself, and the three partials.
class FrobeniusAccumulator {
 public:
  void add(const FrobeniusSample& s);
  void merge(const FrobeniusAccumulator& other);

  MonteCarloEstimate estimate() const;
  /// Mean of Delta_F (rather than of Delta_F^2) with its standard error.
  double mean_of_df() const { return df_.mean(); }
  double stderr_of_df() const { return df_.standard_error(); }
  const MomentAccumulator& partial(Axis a) const { return partials_[static_cast<int>(a)]; }
  const MomentAccumulator& squared() const { return df2_; }

 private:
  MomentAccumulator df2_;
  MomentAccumulator df_;
  std::array<MomentAccumulator, 3> partials_;
};

/// Requires at least two samples.
MonteCarloEstimate accumulate(std::span<const FrobeniusSample> samples);

}  // namespace pulselab
