#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "pulselab/errors.hpp"
#include "pulselab/metrics.hpp"

using namespace pulselab;
using std::numbers::pi;

TEST_CASE("identity gives zero everywhere") {
  const auto s = frobenius_from_unitary(Unitary2::identity());
  CHECK(s.delta_f_squared == 0.0);
  for (double p : s.partials) CHECK(p == 0.0);
}

TEST_CASE("small z rotation") {
  const double eps = 1e-3;
  const auto u = Unitary2::rotation(eps, {0, 0, 1});
  const auto s = frobenius_from_unitary(u);
  // x and y turn by 2 eps; z is untouched
  CHECK(s.partials[2] == doctest::Approx(0.0).epsilon(1e-30));
  CHECK(s.partials[0] == doctest::Approx(2 * std::pow(std::sin(eps), 2)).epsilon(1e-12));
  CHECK(s.delta_f_squared == doctest::Approx((4.0 / 3.0) * std::pow(std::sin(eps), 2)).epsilon(1e-12));
}

TEST_CASE("tiny errors keep relative accuracy") {
  const double eps = 1e-10;
  const auto s = frobenius_from_unitary(Unitary2::rotation(eps, {1, 0, 0}));
  CHECK(s.delta_f_squared == doctest::Approx((4.0 / 3.0) * eps * eps).epsilon(1e-8));
  CHECK(s.partials[1] == doctest::Approx(2 * std::pow(std::sin(eps), 2)).epsilon(1e-8));
}

TEST_CASE("sigma_z maps to its extreme value") {
  const auto s = frobenius_from_unitary(Unitary2::pauli_z());
  CHECK(s.delta_f_squared == doctest::Approx(4.0 / 3.0));
  CHECK(s.partials[0] == doctest::Approx(4.0 / 3.0 * 1.5).epsilon(1e-14));
  CHECK(s.partials[2] == doctest::Approx(0.0));
}

TEST_CASE("random SU(2) against the literal trace formulas") {
  std::mt19937_64 rng(99);
  double worst_total = 0.0, worst_partial = 0.0, worst_shortcut = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const auto m = oracle::random_su2(rng);
    const auto u = oracle::from_eigen(m);
    const auto s = frobenius_from_unitary(u);
    worst_total = std::max(worst_total, std::abs(s.delta_f_squared - oracle::frobenius_total(m)));
    worst_shortcut = std::max(worst_shortcut, std::abs(frobenius_su2_shortcut(u) - s.delta_f_squared));
    for (int a = 0; a < 3; ++a)
      worst_partial = std::max(worst_partial, std::abs(s.partials[a] - oracle::frobenius_partial(m, a)));
    CHECK(s.delta_f_squared >= 0.0);
    CHECK(s.delta_f_squared <= 4.0 / 3.0 + 1e-12);
  }
  CHECK(worst_total < 1e-13);
  CHECK(worst_partial < 1e-13);
  CHECK(worst_shortcut < 1e-13);
}

TEST_CASE("partials average to the total") {
  std::mt19937_64 rng(4);
  for (int k = 0; k < 1000; ++k) {
    const auto s = frobenius_from_unitary(oracle::from_eigen(oracle::random_su2(rng)));
    const double avg = (s.partials[0] + s.partials[1] + s.partials[2]) / 3.0;
    CHECK(avg == doctest::Approx(s.delta_f_squared).epsilon(1e-12));
  }
}

TEST_CASE("density-matrix route agrees") {
  std::mt19937_64 rng(12);
  for (int k = 0; k < 1000; ++k) {
    const auto u = oracle::from_eigen(oracle::random_su2(rng));
    const auto a = frobenius_from_unitary(u);
    const auto b = frobenius_by_density_matrices(u);
    CHECK(std::abs(a.delta_f_squared - b.delta_f_squared) < 1e-13);
  }
}

TEST_CASE("global phase: density route ignores it, the SU(2) route rejects it") {
  std::mt19937_64 rng(21);
  const auto m = oracle::random_su2(rng);
  const auto a = frobenius_by_density_matrices(oracle::from_eigen(m));
  const auto b = frobenius_by_density_matrices(oracle::from_eigen(std::exp(cplx(0, 0.7)) * m));
  CHECK(a.delta_f_squared == doctest::Approx(b.delta_f_squared).epsilon(1e-13));
  CHECK_THROWS_AS(frobenius_from_unitary(oracle::from_eigen(std::exp(cplx(0, 0.7)) * m)), NotUnitary);
}

TEST_CASE("non-unitary input is rejected") {
  CHECK_THROWS_AS(frobenius_from_unitary(Unitary2(1.0, 0.0, 0.0, 1.001)), NotUnitary);
}

TEST_CASE("polarization deviation") {
  CHECK(ideal_polarization(Axis::X) == 1.0);
  CHECK(ideal_polarization(Axis::Y) == -1.0);
  CHECK(ideal_polarization(Axis::Z) == -1.0);
  std::vector<TrajectoryPoint> traj{{0.0, {0, 1, 0}}, {1.0, {0, 0.2, 0.98}}, {2.0, {0, -0.99, 0.14}}};
  const auto d = polarization_deviation(traj, Axis::Y);
  CHECK(d.final_deviation == doctest::Approx(0.01));
  REQUIRE(d.path.size() == 3);
  CHECK(d.path[1].second == doctest::Approx(0.2));
  CHECK_THROWS_AS(polarization_deviation({}, Axis::Y), MissingTrajectory);
  CHECK_THROWS_AS(polarization_deviation(traj, Axis::Z), MissingTrajectory);
}

TEST_CASE("accumulate examples") {
  const std::vector<FrobeniusSample> two{{1.0, {}}, {3.0, {}}};
  const auto e = accumulate(two);
  CHECK(e.mean_df2 == 2.0);
  CHECK(e.stderr_df2 == doctest::Approx(1.0));
  CHECK(e.mean_df == doctest::Approx(std::sqrt(2.0)));
  CHECK(e.realizations == 2);
  const std::vector<FrobeniusSample> same(10, FrobeniusSample{0.25, {}});
  CHECK(accumulate(same).stderr_df2 == 0.0);
  CHECK_THROWS_AS(accumulate(std::vector<FrobeniusSample>(1)), InsufficientPoints);
}

TEST_CASE("chunked merges are bit-identical to a single pass") {
  std::mt19937_64 rng(31);
  std::lognormal_distribution<double> ln(-10.0, 3.0);
  std::vector<double> xs(5000);
  for (double& x : xs) x = ln(rng);
  MomentAccumulator whole;
  for (double x : xs) whole.add(x);
  for (std::size_t chunk : {1, 7, 100, 1024}) {
    MomentAccumulator merged;
    for (std::size_t i = 0; i < xs.size(); i += chunk) {
      MomentAccumulator part;
      for (std::size_t j = i; j < std::min(xs.size(), i + chunk); ++j) part.add(xs[j]);
      merged.merge(part);
    }
    CHECK(merged.mean() == whole.mean());
    CHECK(merged.standard_error() == whole.standard_error());
  }
  // reversed order too
  MomentAccumulator rev;
  for (auto it = xs.rbegin(); it != xs.rend(); ++it) rev.add(*it);
  CHECK(rev.mean() == whole.mean());
  CHECK(rev.standard_error() == whole.standard_error());
}
