#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "lqioc/lqr.hpp"

using namespace lqioc;
using fixtures::vec2;

namespace {

SystemDynamics scalar(double a, double b) {
  return SystemDynamics(Matrix::Constant(1, 1, a), Matrix::Constant(1, 1, b));
}

}  // namespace

TEST(Discretize, ZeroDrift) {
  Matrix b(2, 1);
  b << 0, 3;
  const auto sd = discretize({Matrix::Zero(2, 2), b}, 0.05);
  EXPECT_NEAR((sd.a() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(sd.b()(0, 0), 0.0, 1e-15);
  EXPECT_NEAR(sd.b()(1, 0), 0.15, 1e-15);
}

TEST(Discretize, CrankClosedForm) {
  const auto sd = fixtures::crank_system();
  const double e = std::exp(-0.2);
  EXPECT_NEAR(sd.a()(0, 1), (1.0 - e) / 4.0, 1e-15);
  EXPECT_NEAR(sd.a()(1, 1), e, 1e-15);
  // B = ∫₀^dt e^{Âs} ds B̂ for the triangular Â.
  EXPECT_NEAR(sd.b()(1, 0), 3.0 * (1.0 - e) / 4.0, 1e-15);
  EXPECT_NEAR(sd.b()(0, 0), 3.0 * (0.05 / 4.0 - (1.0 - e) / 16.0), 1e-15);
}

TEST(Discretize, Scalar) {
  const auto sd = discretize({Matrix::Constant(1, 1, -1.0), Matrix::Constant(1, 1, 1.0)}, 1.0);
  EXPECT_NEAR(sd.a()(0, 0), std::exp(-1.0), 1e-15);
  EXPECT_NEAR(sd.b()(0, 0), 1.0 - std::exp(-1.0), 1e-15);
  EXPECT_THROW(discretize({Matrix::Zero(2, 2), Matrix::Zero(3, 1)}, 0.1), InputError);
}

TEST(Assumptions, Cases) {
  const auto ex = check_assumptions(fixtures::example_system(), fixtures::example_q());
  EXPECT_TRUE(ex.all());

  Matrix b0(2, 1);
  b0.setZero();
  EXPECT_FALSE(check_assumptions(SystemDynamics(Matrix::Identity(2, 2), b0), SymMatrix::identity(2)).controllable);

  Matrix b(2, 1);
  b << 1, 0;
  const auto r = check_assumptions(SystemDynamics(Matrix::Identity(2, 2), b),
                                   SymMatrix::diagonal(vec2(1.0, 0.0)));
  EXPECT_FALSE(r.observable);
  EXPECT_THROW(check_assumptions(fixtures::example_system(), SymMatrix::diagonal(vec2(1.0, -1.0))),
               DefinitenessError);
}

TEST(ObservationFactor, ReproducesQ) {
  const SymMatrix q = fixtures::example_q();
  const Matrix c = observation_factor(q);
  EXPECT_EQ(c.rows(), 1);
  EXPECT_NEAR((c.transpose() * c - q.matrix()).norm(), 0.0, 1e-15);
}

TEST(SolveDare, ExampleGolden) {
  const auto sol = solve_dare(fixtures::example_system(), fixtures::example_q());
  const SymMatrix ref = fixtures::example_p_bar();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(sol.p(i, j), ref(i, j), 1e-3);
  EXPECT_NEAR(sol.k(0, 0), -1.2496, 1e-4);
  EXPECT_NEAR(sol.k(0, 1), -0.4805, 1e-4);
  EXPECT_LE(sol.residual, 1e-8 * (1.0 + sol.p.norm()));
  EXPECT_LT(sol.spectral_radius, 1.0);
  EXPECT_GT(min_eigenvalue(sol.p), 0.0);
}

TEST(SolveDare, ScalarGoldenRatioFamily) {
  const auto sol = solve_dare(scalar(2.0, 1.0), SymMatrix::identity(1));
  EXPECT_NEAR(sol.p(0, 0), 2.0 + std::sqrt(5.0), 1e-12);
  EXPECT_NEAR(sol.k(0, 0), -2.0 * (2.0 + std::sqrt(5.0)) / (3.0 + std::sqrt(5.0)), 1e-12);
  EXPECT_NEAR(sol.k(0, 0), -1.6180339887, 1e-9);

  int iterations = 0;
  const SymMatrix fp = solve_dare_fixed_point(scalar(2.0, 1.0), SymMatrix::identity(1), {}, &iterations);
  EXPECT_NEAR(fp(0, 0), sol.p(0, 0), 1e-10);
  EXPECT_GT(iterations, 0);
}

TEST(SolveDare, ZeroDynamicsMatrix) {
  const SystemDynamics sd(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  const auto sol = solve_dare(sd, SymMatrix::identity(2));
  EXPECT_NEAR((sol.p.matrix() - Matrix::Identity(2, 2)).norm(), 0.0, 1e-14);
  EXPECT_NEAR(sol.k.norm(), 0.0, 1e-14);
  EXPECT_FALSE(sol.warnings.empty());
}

TEST(SolveDare, AgreesWithFixedPointOnRandomSystems) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const Eigen::Index n = 2 + trial % 4;
    const Eigen::Index m = 1 + trial % 2;
    const SystemDynamics sd(fixtures::random_matrix(n, n, rng), fixtures::random_matrix(n, m, rng));
    const SymMatrix q = fixtures::random_psd(n, rng);
    const auto sol = solve_dare(sd, q);
    const SymMatrix fp = solve_dare_fixed_point(sd, q, {1e-13, 100000});
    EXPECT_LE((sol.p - fp).norm(), 1e-7 * (1.0 + sol.p.norm()));
    EXPECT_LE(sol.residual, 1e-8 * (1.0 + sol.p.norm()));
    EXPECT_LT(sol.spectral_radius, 1.0);
    // Fixed point of the Riccati map.
    EXPECT_LE((riccati_map(sd, q, sol.p) - sol.p).norm(), 1e-8 * (1.0 + sol.p.norm()));
    EXPECT_GT(std::abs(closed_loop(sd, sol.k).determinant), 0.0);
  }
}

TEST(SolveDare, RejectsUncontrollable) {
  Matrix b(2, 1);
  b.setZero();
  EXPECT_THROW(solve_dare(SystemDynamics(Matrix::Identity(2, 2), b), SymMatrix::identity(2)), ModelError);
}

TEST(ControlGain, Cases) {
  const SystemDynamics zero_a(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  EXPECT_EQ(control_gain(fixtures::example_p_bar(), zero_a).norm(), 0.0);
  const Matrix k = control_gain(fixtures::example_p_bar(), fixtures::example_system());
  EXPECT_NEAR(k(0, 0), -1.2496, 1e-4);
  EXPECT_NEAR(k(0, 1), -0.4805, 1e-4);
  EXPECT_THROW(control_gain(SymMatrix::identity(3), fixtures::example_system()), InputError);
}

TEST(ClosedLoop, Cases) {
  const auto sd = fixtures::example_system();
  EXPECT_EQ(closed_loop(sd, Matrix::Zero(1, 2)).a_cl, sd.a());
  const auto sol = solve_dare(sd, fixtures::example_q());
  const auto cl = closed_loop(sd, sol.k);
  EXPECT_LT(cl.spectral_radius, 1.0);
  EXPECT_TRUE(cl.invertible);

  const auto crank = fixtures::crank_system();
  const auto csol = solve_dare(crank, SymMatrix::identity(2));
  const auto ccl = closed_loop(crank, csol.k);
  EXPECT_LT(ccl.spectral_radius, 1.0);
  EXPECT_TRUE(ccl.invertible);
  EXPECT_NEAR(csol.k(0, 0), -0.96168, 1e-4);
  EXPECT_NEAR(csol.k(0, 1), -0.47593, 1e-4);
}

TEST(ControlGain, InvariantUnderKernelPerturbation) {
  const auto sd = fixtures::example_system();
  const auto sol = solve_dare(sd, fixtures::example_q());
  for (double alpha : {0.1, 0.5, 1.0, -0.3}) {
    const SymMatrix dp = SymMatrix::diagonal(vec2(0.0, -alpha));
    EXPECT_EQ((sd.b().transpose() * dp.matrix()).norm(), 0.0);
    EXPECT_LE((control_gain(sol.p + dp, sd) - sol.k).norm(), 1e-12);
  }
}
