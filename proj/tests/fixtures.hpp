#pragma once

#include <cmath>
#include <numbers>
#include <random>

#include "lqioc/lqr.hpp"
#include "lqioc/trajectory.hpp"

namespace fixtures {

using namespace lqioc;

inline Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

inline SystemDynamics example_system() {
  Matrix a(2, 2);
  a << 1, 0, 1, 1;
  Matrix b(2, 1);
  b << 1, 0;
  return SystemDynamics(a, b);
}

inline SymMatrix example_q() { return SymMatrix::diagonal(vec2(0.0, 1.0)); }

inline SymMatrix example_p_bar() {
  Matrix p(2, 2);
  p << 3.3306, 2.0810, 2.0810, 2.6005;
  return SymMatrix(p);
}

inline ContinuousDynamics crank_continuous() {
  Matrix a(2, 2);
  a << 0, 1, 0, -4;
  Matrix b(2, 1);
  b << 0, 3;
  return {a, b};
}

inline SystemDynamics crank_system() { return discretize(crank_continuous(), 0.05); }

inline SymMatrix crank_sigma_w() {
  Matrix s(2, 2);
  s << 0.1039, 0.0677, 0.0677, 0.0997;
  return SymMatrix(Matrix(1e-4 * s));
}

inline SymMatrix crank_sigma_v() {
  Matrix s(2, 2);
  s << 0.2328, -0.2253, -0.2253, 0.2180;
  return SymMatrix(Matrix(1e-4 * s));
}

inline UniformBox crank_init() {
  return {vec2(-2.0 * std::numbers::pi / 3.0, -0.1), vec2(0.0, 0.1)};
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

inline SymMatrix random_symmetric(Eigen::Index n, std::mt19937_64& rng) {
  const Matrix g = random_matrix(n, n, rng);
  return SymMatrix(Matrix(0.5 * (g + g.transpose())));
}

inline SymMatrix random_psd(Eigen::Index n, std::mt19937_64& rng, Eigen::Index rank = -1) {
  const Matrix g = random_matrix(n, rank < 0 ? n : rank, rng);
  return SymMatrix(Matrix(g * g.transpose()));
}

}  // namespace fixtures
