#include <doctest.h>

#include <cmath>
#include <memory>

#include "pulselab/errors.hpp"
#include "pulselab/noise.hpp"

using namespace pulselab;

TEST_CASE("autocorrelation values") {
  CHECK(evaluate_autocorrelation(AutocorrelationModel::gaussian(1.0, 0.1), 0.0) == 1.0);
  const double gamma = 0.37;
  CHECK(evaluate_autocorrelation(AutocorrelationModel::exponential(1.0, gamma), 1.0 / gamma) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
  CHECK(evaluate_autocorrelation(AutocorrelationModel::gaussian(2.0, 0.5), 2.0) ==
        doctest::Approx(4.0 * std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("autocorrelation is even") {
  for (auto m : {AutocorrelationModel::gaussian(1.3, 0.4), AutocorrelationModel::exponential(0.7, 2.0)})
    for (double t : {0.01, 0.5, 3.0}) CHECK(m(t) == m(-t));
}

TEST_CASE("cusp coefficient matches the small-time slope") {
  const auto e = AutocorrelationModel::exponential(1.5, 0.2);
  const double d = 1e-4 / e.gamma;
  const double slope = (e(0.0) - e(d)) / (e.g0 * e.g0 * e.gamma * d);
  CHECK(slope == doctest::Approx(1.0).epsilon(0.01));
  CHECK(e.cusp_coefficient() == doctest::Approx(1.5 * 1.5 * 0.2));

  const auto g = AutocorrelationModel::gaussian(1.5, 0.2);
  CHECK(std::abs((g(0.0) - g(d)) / (g.g0 * g.g0 * g.gamma * d)) < 1e-3);
  CHECK(g.cusp_coefficient() == 0.0);
}

TEST_CASE("model validation rejects bad parameters") {
  CHECK_THROWS_AS(AutocorrelationModel::gaussian(0.0, 0.1).validate(), ConfigError);
  CHECK_THROWS_AS(AutocorrelationModel::exponential(1.0, -1.0).validate(), ConfigError);
  CHECK_THROWS_AS(correlation_kind_from_string("lorentzian"), ConfigError);
  CHECK(correlation_kind_from_string("Exponential") == CorrelationKind::Exponential);
}

TEST_CASE("time grids") {
  SUBCASE("uniform") {
    const auto g = TimeGrid::uniform(2.0, 4);
    CHECK(g.steps() == 4);
    CHECK(g.boundaries().front() == 0.0);
    CHECK(g.boundaries().back() == 2.0);
    CHECK(g.midpoints()[0] == doctest::Approx(0.25));
  }
  SUBCASE("aligned grids contain every breakpoint exactly") {
    const double tau = 3.7;
    const double fr[] = {1.0 / 7.0, 6.0 / 7.0};
    const auto g = TimeGrid::aligned(tau, fr, 100);
    CHECK(g.steps() == 100);
    CHECK(g.has_boundary(fr[0] * tau));
    CHECK(g.has_boundary(fr[1] * tau));
    for (std::size_t i = 0; i < g.steps(); ++i) CHECK(g.width(i) > 0.0);
  }
  SUBCASE("invalid boundaries") {
    CHECK_THROWS_AS(TimeGrid({0.0, 1.0, 1.0}), ConfigError);
    CHECK_THROWS_AS(TimeGrid({0.1, 1.0}), ConfigError);
  }
}

TEST_CASE("sampler construction") {
  SUBCASE("single point") {
    const NoiseSampler s(AutocorrelationModel::gaussian(1.0, 0.3), {0.5}, 1);
    CHECK(s.transform().rows() == 1);
    CHECK(std::abs(s.transform()(0, 0)) == doctest::Approx(1.0));
  }
  SUBCASE("hand-built 2x2 covariance") {
    const NoiseSampler s(AutocorrelationModel::exponential(1.0, 1.0), {0.0, std::log(2.0)}, 1);
    const Eigen::MatrixXd g = s.transform() * s.transform().transpose();
    CHECK(g(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g(1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("constant noise has rank one") {
    const auto grid = TimeGrid::uniform(1.0, 12);
    const NoiseSampler s(AutocorrelationModel::gaussian(1.5, 0.0), grid.midpoints(), 1);
    const auto& ev = s.eigenvalues();
    int nonzero = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (std::abs(ev[i]) > 1e-9) {
        ++nonzero;
        CHECK(ev[i] == doctest::Approx(12 * 1.5 * 1.5));
      }
    CHECK(nonzero == 1);
  }
}

TEST_CASE("covariance reconstruction and symmetry") {
  for (std::size_t n : {8, 64, 512}) {
    for (auto m : {AutocorrelationModel::gaussian(1.0, 0.1), AutocorrelationModel::exponential(1.0, 0.5)}) {
      const auto grid = TimeGrid::uniform(5.0, n);
      const NoiseSampler s(m, grid.midpoints(), 3);
      const auto& g = s.covariance();
      CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
      const double lmax = s.eigenvalues().cwiseAbs().maxCoeff();
      const double err = (s.transform() * s.transform().transpose() - g).cwiseAbs().maxCoeff();
      CHECK(err <= 10 * NoiseSampler::default_clip * lmax);
    }
  }
}

TEST_CASE("strongly negative eigenvalues are rejected") {
  // A negative clip turns every eigenvalue below lambda_max into a failure.
  const auto grid = TimeGrid::uniform(0.01, 64);
  CHECK_NOTHROW(NoiseSampler(AutocorrelationModel::gaussian(1.0, 0.1), grid.midpoints(), 1));
  CHECK_THROWS_AS(NoiseSampler(AutocorrelationModel::gaussian(1.0, 0.1), grid.midpoints(), 1, -1.0),
                  EigenvalueTooNegative);
}

TEST_CASE("sample statistics") {
  const auto grid = std::make_shared<const TimeGrid>(TimeGrid::uniform(4.0, 6));
  const auto model = AutocorrelationModel::exponential(1.0, 0.5);
  const GridNoiseSampler sampler(model, grid, 11);
  NoiseStream stream(sampler, 0);
  const int m = 100000;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(6);
  Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(6, 6);
  for (int k = 0; k < m; ++k) {
    const auto r = stream.sample();
    const Eigen::Map<const Eigen::VectorXd> x(r.values.data(), 6);
    sum += x;
    outer += x * x.transpose();
  }
  const Eigen::VectorXd mean = sum / m;
  for (int i = 0; i < 6; ++i) CHECK(std::abs(mean[i]) < 4.0 * std::sqrt(1.0 / m));
  const Eigen::MatrixXd cov = outer / m;
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j) {
      const double g = model(grid->midpoints()[i] - grid->midpoints()[j]);
      const double se = std::sqrt((1.0 + g * g) / m);
      CHECK(std::abs(cov(i, j) - g) < 4.0 * se);
    }
}

TEST_CASE("sample covariance check over 16 points") {
  for (auto m : {AutocorrelationModel::gaussian(1.0, 0.1), AutocorrelationModel::exponential(1.0, 0.3)}) {
    const auto grid = TimeGrid::uniform(10.0, 16);
    const NoiseSampler s(m, grid.midpoints(), 5);
    const auto check = check_sample_covariance(s, 200000, 5);
    CHECK(check.passed(5.0));
  }
}

TEST_CASE("eta0 shifts every sample") {
  const auto grid = std::make_shared<const TimeGrid>(TimeGrid::uniform(1.0, 4));
  const GridNoiseSampler a(AutocorrelationModel::gaussian(1.0, 0.2, 0.0), grid, 9);
  const GridNoiseSampler b(AutocorrelationModel::gaussian(1.0, 0.2, 0.75), grid, 9);
  NoiseStream sa(a), sb(b);
  const auto ra = sa.sample(), rb = sb.sample();
  for (int i = 0; i < 4; ++i) CHECK(rb.values[i] - ra.values[i] == doctest::Approx(0.75));
}

TEST_CASE("same seed gives a bit-identical stream") {
  const auto grid = TimeGrid::uniform(2.0, 32);
  const auto model = AutocorrelationModel::exponential(1.0, 0.1);
  const auto s1 = build_sampler(model, grid, 77);
  const auto s2 = build_sampler(model, grid, 77);
  NoiseStream a(s1, 4), b(s2, 4), c(s1, 5);
  for (int k = 0; k < 10; ++k) {
    const auto x = a.sample(), y = b.sample(), z = c.sample();
    CHECK(x.values == y.values);
    CHECK(x.values != z.values);
  }
}

TEST_CASE("seed mixing separates nearby salts") {
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(mix_seed(1, 0) != mix_seed(2, 0));
  CHECK(mix_seed(42, 7) == mix_seed(42, 7));
}
