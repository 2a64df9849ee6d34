#include "pulselab/noise.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "pulselab/errors.hpp"

namespace pulselab {

AutocorrelationModel AutocorrelationModel::gaussian(double g0, double gamma, double eta0) {
  AutocorrelationModel m{CorrelationKind::Gaussian, g0, gamma, eta0};
  m.validate();
  return m;
}

AutocorrelationModel AutocorrelationModel::exponential(double g0, double gamma, double eta0) {
  AutocorrelationModel m{CorrelationKind::Exponential, g0, gamma, eta0};
  m.validate();
  return m;
}

void AutocorrelationModel::validate() const {
  if (!(std::isfinite(g0) && g0 > 0.0)) throw ConfigError("noise amplitude g0 must be positive");
  if (!(std::isfinite(gamma) && gamma >= 0.0)) throw ConfigError("decay rate gamma must be >= 0");
  if (!std::isfinite(eta0)) throw ConfigError("eta0 must be finite");
}

double AutocorrelationModel::operator()(double t) const {
  const double g00 = g0 * g0;
  switch (kind) {
    case CorrelationKind::Gaussian:
      return g00 * std::exp(-(gamma * t) * (gamma * t));
    case CorrelationKind::Exponential:
      return g00 * std::exp(-gamma * std::abs(t));
  }
  return 0.0;
}

double AutocorrelationModel::cusp_coefficient() const {
  return kind == CorrelationKind::Exponential ? g0 * g0 * gamma : 0.0;
}

double evaluate_autocorrelation(const AutocorrelationModel& model, double t) { return model(t); }

const char* to_string(CorrelationKind kind) {
  return kind == CorrelationKind::Gaussian ? "gaussian" : "exponential";
}

CorrelationKind correlation_kind_from_string(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "gaussian" || lower == "gauss") return CorrelationKind::Gaussian;
  if (lower == "exponential" || lower == "exp") return CorrelationKind::Exponential;
  throw ConfigError("unknown autocorrelation model '" + name + "'");
}

// ---------------------------------------------------------------------------
// TimeGrid
// ---------------------------------------------------------------------------

TimeGrid::TimeGrid(std::vector<double> boundaries) : boundaries_(std::move(boundaries)) {
  if (boundaries_.size() < 2) throw ConfigError("time grid needs at least one step");
  if (boundaries_.front() != 0.0) throw ConfigError("time grid must start at 0");
  for (std::size_t i = 1; i < boundaries_.size(); ++i) {
    if (!(boundaries_[i] > boundaries_[i - 1]))
      throw ConfigError("time grid boundaries must be strictly increasing");
  }
  midpoints_.resize(steps());
  for (std::size_t i = 0; i < steps(); ++i)
    midpoints_[i] = 0.5 * (boundaries_[i] + boundaries_[i + 1]);
}

TimeGrid TimeGrid::uniform(double tau_p, std::size_t steps) {
  const double breaks[1] = {};
  return aligned(tau_p, std::span<const double>(breaks, 0), steps);
}

TimeGrid TimeGrid::aligned(double tau_p, std::span<const double> breakpoints, std::size_t steps) {
  if (!(tau_p > 0.0) || !std::isfinite(tau_p)) throw ConfigError("tau_p must be positive");
  std::vector<double> fractions{0.0};
  for (double f : breakpoints) {
    if (!(f > fractions.back() && f < 1.0))
      throw ConfigError("grid breakpoints must be increasing and inside (0, 1)");
    fractions.push_back(f);
  }
  fractions.push_back(1.0);
  const std::size_t pieces = fractions.size() - 1;
  if (steps < pieces) throw ConfigError("fewer steps than pulse segments");

  // Largest-remainder apportionment with a floor of one step per piece.
  std::vector<std::size_t> count(pieces, 1);
  std::vector<double> remainder(pieces);
  std::size_t assigned = pieces;
  const std::size_t spare = steps - pieces;
  for (std::size_t k = 0; k < pieces; ++k) {
    const double share = static_cast<double>(spare) * (fractions[k + 1] - fractions[k]);
    const auto whole = static_cast<std::size_t>(std::floor(share));
    count[k] += whole;
    assigned += whole;
    remainder[k] = share - static_cast<double>(whole);
  }
  std::vector<std::size_t> order(pieces);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < steps; ++i, ++assigned) ++count[order[i % pieces]];

  std::vector<double> b;
  b.reserve(steps + 1);
  b.push_back(0.0);
  for (std::size_t k = 0; k < pieces; ++k) {
    const double lo = fractions[k] * tau_p;
    const double hi = k + 1 == pieces ? tau_p : fractions[k + 1] * tau_p;
    const double h = (hi - lo) / static_cast<double>(count[k]);
    for (std::size_t j = 1; j < count[k]; ++j) b.push_back(lo + static_cast<double>(j) * h);
    b.push_back(hi);
  }
  return TimeGrid(std::move(b));
}

bool TimeGrid::has_boundary(double t) const {
  return std::binary_search(boundaries_.begin(), boundaries_.end(), t);
}

// ---------------------------------------------------------------------------
// Sampling
// ---------------------------------------------------------------------------

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  // SplitMix64 finalizer applied to the combined words.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

NoiseSampler::NoiseSampler(const AutocorrelationModel& model, std::vector<double> sample_times,
                           std::uint64_t seed, double clip)
    : model_(model), times_(std::move(sample_times)), seed_(seed) {
  model_.validate();
  const auto n = static_cast<Eigen::Index>(times_.size());
  if (n < 1) throw ConfigError("noise sampler needs at least one sample time");

  covariance_.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    covariance_(i, i) = model_(0.0);
    for (Eigen::Index j = 0; j < i; ++j) {
      const double g = model_(times_[i] - times_[j]);
      covariance_(i, j) = g;
      covariance_(j, i) = g;
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance_);
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  eigenvalues_ = solver.eigenvalues();
  const double lambda_max = eigenvalues_.maxCoeff();
  Eigen::VectorXd root(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double lambda = eigenvalues_[k];
    if (lambda < -clip * lambda_max) {
      std::ostringstream msg;
      msg << "covariance eigenvalue " << lambda << " below -" << clip << " * lambda_max ("
          << lambda_max << ")";
      throw EigenvalueTooNegative(msg.str());
    }
    root[k] = lambda > 0.0 ? std::sqrt(lambda) : 0.0;
  }
  transform_ = solver.eigenvectors() * root.asDiagonal();
}

void NoiseSampler::sample_block(std::mt19937_64& rng, Eigen::MatrixXd& out) const {
  const auto n = static_cast<Eigen::Index>(times_.size());
  Eigen::MatrixXd r(n, out.cols());
  std::normal_distribution<double> normal;
  for (Eigen::Index c = 0; c < r.cols(); ++c)
    for (Eigen::Index i = 0; i < n; ++i) r(i, c) = normal(rng);
  out.resize(n, r.cols());
  out.noalias() = transform_ * r;
  if (model_.eta0 != 0.0) out.array() += model_.eta0;
}

GridNoiseSampler::GridNoiseSampler(const AutocorrelationModel& model,
                                   std::shared_ptr<const TimeGrid> grid, std::uint64_t seed,
                                   double clip)
    : NoiseSampler(model, grid ? grid->midpoints() : std::vector<double>{}, seed, clip),
      grid_(std::move(grid)) {}

GridNoiseSampler build_sampler(const AutocorrelationModel& model, const TimeGrid& grid,
                               std::uint64_t seed) {
  return GridNoiseSampler(model, std::make_shared<const TimeGrid>(grid), seed);
}

NoiseStream::NoiseStream(const GridNoiseSampler& sampler, std::uint64_t stream_id)
    : sampler_(&sampler), rng_(mix_seed(sampler.seed(), stream_id)) {}

NoiseRealization NoiseStream::sample() {
  const auto n = static_cast<Eigen::Index>(sampler_->size());
  Eigen::VectorXd r(n);
  for (Eigen::Index i = 0; i < n; ++i) r[i] = normal_(rng_);
  Eigen::VectorXd eta = sampler_->transform() * r;
  NoiseRealization out{sampler_->grid(), std::vector<double>(eta.data(), eta.data() + n)};
  if (sampler_->model().eta0 != 0.0)
    for (double& x : out.values) x += sampler_->model().eta0;
  return out;
}

CovarianceCheck check_sample_covariance(const NoiseSampler& sampler, std::uint64_t realizations,
                                        std::uint64_t seed) {
  if (realizations < 2) throw ConfigError("covariance check needs at least two realizations");
  const auto n = static_cast<Eigen::Index>(sampler.size());
  constexpr std::uint64_t kBlock = 4096;
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd block;
  for (std::uint64_t first = 0, b = 0; first < realizations; first += kBlock, ++b) {
    std::mt19937_64 rng(mix_seed(seed, b));
    block.resize(n, static_cast<Eigen::Index>(std::min(kBlock, realizations - first)));
    sampler.sample_block(rng, block);
    block.array() -= sampler.model().eta0;
    sum.noalias() += block * block.transpose();
  }
  CovarianceCheck out;
  const auto m = static_cast<double>(realizations);
  out.realizations = realizations;
  out.sample = sum / m;
  out.expected = sampler.covariance();
  out.z.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      const double g = out.expected(i, j);
      const double se = std::sqrt((out.expected(i, i) * out.expected(j, j) + g * g) / m);
      out.z(i, j) = (out.sample(i, j) - g) / se;
      out.max_abs_z = std::max(out.max_abs_z, std::abs(out.z(i, j)));
    }
  return out;
}

}  // namespace pulselab
