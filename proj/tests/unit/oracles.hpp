#pragma once

// Independent reference computations shared by the unit tests.

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "pulselab/propagator.hpp"

namespace oracle {

using M2 = Eigen::Matrix2cd;
using pulselab::cplx;

inline M2 sx() { return (M2() << 0, 1, 1, 0).finished(); }
inline M2 sy() { return (M2() << 0, cplx(0, -1), cplx(0, 1), 0).finished(); }
inline M2 sz() { return (M2() << 1, 0, 0, -1).finished(); }

inline M2 to_eigen(const pulselab::Unitary2& u) {
  return (M2() << u(0, 0), u(0, 1), u(1, 0), u(1, 1)).finished();
}

inline pulselab::Unitary2 from_eigen(const M2& m) {
  return {m(0, 0), m(0, 1), m(1, 0), m(1, 1)};
}

// exp(-i dt (eta sz + v sx)) by the general matrix exponential.
inline M2 expm_step(double eta, double v, double dt) {
  const M2 h = eta * sz() + v * sx();
  return (cplx(0, -dt) * h).exp();
}

// Literal 1 - (1/6) sum_a Tr(s_a U s_a U^dagger) and the partials
// 2[1 - Tr(rho_a U rho_a U^dagger)] with rho_a = (1 + s_a)/2.
inline double frobenius_total(const M2& u) {
  const M2 s[3] = {sx(), sy(), sz()};
  double acc = 0.0;
  for (const auto& p : s) acc += (p * u * p * u.adjoint()).trace().real();
  return 1.0 - acc / 6.0;
}

inline double frobenius_partial(const M2& u, int axis) {
  const M2 s[3] = {sx(), sy(), sz()};
  const M2 rho = 0.5 * (M2::Identity() + s[axis]);
  return 2.0 * (1.0 - (rho * u * rho * u.adjoint()).trace().real());
}

// Haar-random SU(2) element from a uniformly random unit quaternion.
inline M2 random_su2(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  double q[4];
  double norm = 0.0;
  for (double& x : q) {
    x = n(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  for (double& x : q) x /= norm;
  return (M2() << cplx(q[0], q[3]), cplx(q[2], q[1]), cplx(-q[2], q[1]), cplx(q[0], -q[3]))
      .finished();
}

}  // namespace oracle
