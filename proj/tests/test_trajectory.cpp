#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "lqioc/trajectory.hpp"

using namespace lqioc;
using fixtures::vec2;

namespace {

struct Crank {
  SystemDynamics sd = fixtures::crank_system();
  Matrix k = solve_dare(sd, SymMatrix::identity(2)).k;
  NoiseModel noise{fixtures::crank_sigma_w(), fixtures::crank_sigma_v()};
};

}  // namespace

TEST(NoiseModel, ClipsRoundingLevelIndefiniteness) {
  const NoiseModel nm(fixtures::crank_sigma_w(), fixtures::crank_sigma_v());
  EXPECT_GE(min_eigenvalue(nm.sigma_v()), 0.0);
  EXPECT_LE((nm.sigma_v() - fixtures::crank_sigma_v()).norm(), 1e-8);
  EXPECT_THROW(NoiseModel(SymMatrix::diagonal(vec2(1.0, -0.1)), SymMatrix::zero(2)), DefinitenessError);
  EXPECT_THROW(NoiseModel(SymMatrix::zero(2), SymMatrix::zero(3)), InputError);
}

TEST(Simulate, NoiselessMatchesAnalyticRollout) {
  const Crank c;
  const Vector x1 = vec2(-1.0, 0.05);
  Rng rng(1);
  const auto t = simulate_from(c.sd, c.k, NoiseModel::zero(2), x1, 120, rng);
  const Matrix a_cl = c.sd.a() + c.sd.b() * c.k;
  Vector x = x1;
  for (Eigen::Index i = 0; i < 120; ++i) {
    EXPECT_LE((t.y.col(i) - x).norm(), 1e-12);
    x = a_cl * x;
  }
}

TEST(Simulate, TwoStepZeroDynamics) {
  const SystemDynamics sd(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  Rng rng(1);
  const auto t = simulate_from(sd, Matrix::Zero(2, 2), NoiseModel::zero(2), vec2(1.0, 0.0), 2, rng);
  EXPECT_EQ(t.y.col(0), vec2(1.0, 0.0));
  EXPECT_EQ(t.y.col(1), vec2(0.0, 0.0));
}

TEST(Simulate, SeedReproducibleAndOrderIndependent) {
  const Crank c;
  const auto init = fixtures::crank_init();
  auto draw = [&](std::uint64_t idx) {
    Rng rng = trajectory_rng(99, 3, idx);
    return sample_trajectory(c.sd, c.k, c.noise, init, 50, rng);
  };
  const auto a5 = draw(5);
  const auto a2 = draw(2);
  EXPECT_EQ(draw(2), a2);
  EXPECT_EQ(draw(5), a5);
  EXPECT_FALSE(a2 == a5);
  Rng other = trajectory_rng(99, 4, 5);
  EXPECT_FALSE(sample_trajectory(c.sd, c.k, c.noise, init, 50, other) == a5);
}

TEST(Simulate, MomentsAtLargeSampleSize) {
  const Crank c;
  const auto init = fixtures::crank_init();
  const int samples = 100000;
  const Eigen::Index horizon = 6;
  const Eigen::Index t_check = 5;  // 1-based time index
  Vector sum = Vector::Zero(2);
  Vector sum_sq = Vector::Zero(2);
  Matrix inc_cov = Matrix::Zero(2, 2);
  const Matrix a_cl = c.sd.a() + c.sd.b() * c.k;
  // Increments with the noiseless propagation removed isolate w_t.
  const NoiseModel process_only(fixtures::crank_sigma_w(), SymMatrix::zero(2));
  for (int i = 0; i < samples; ++i) {
    Rng rng = trajectory_rng(7, 0, static_cast<std::uint64_t>(i));
    const auto t = sample_trajectory(c.sd, c.k, c.noise, init, horizon, rng);
    const Vector y = t.y.col(t_check - 1);
    sum += y;
    sum_sq += y.cwiseProduct(y);
    Rng rng2 = trajectory_rng(8, 0, static_cast<std::uint64_t>(i));
    const auto p = sample_trajectory(c.sd, c.k, process_only, init, 2, rng2);
    const Vector w = p.y.col(1) - a_cl * p.y.col(0);
    inc_cov += w * w.transpose();
  }
  const Vector mean = sum / samples;
  Matrix power = Matrix::Identity(2, 2);
  for (Eigen::Index s = 1; s < t_check; ++s) power = a_cl * power;
  const Vector expected = power * initial_mean(init);
  for (int d = 0; d < 2; ++d) {
    const double var = sum_sq(d) / samples - mean(d) * mean(d);
    const double se = std::sqrt(var / samples);
    EXPECT_LE(std::abs(mean(d) - expected(d)), 4.0 * se) << "coordinate " << d;
  }
  inc_cov /= samples;
  EXPECT_LE((inc_cov - fixtures::crank_sigma_w().matrix()).norm(), 0.05 * fixtures::crank_sigma_w().norm());
}

TEST(Simulate, UniformLawHasTheRequestedCovariance) {
  const SymMatrix sw = fixtures::crank_sigma_w();
  const NoiseModel nm(sw, SymMatrix::zero(2), NoiseLaw::Uniform);
  const SystemDynamics sd(Matrix::Zero(2, 2), Matrix::Identity(2, 2));
  Matrix cov = Matrix::Zero(2, 2);
  const int samples = 100000;
  for (int i = 0; i < samples; ++i) {
    Rng rng = trajectory_rng(3, 0, static_cast<std::uint64_t>(i));
    const auto t = simulate_from(sd, Matrix::Zero(2, 2), nm, Vector::Zero(2), 2, rng);
    cov += t.y.col(1) * t.y.col(1).transpose();
  }
  cov /= samples;
  EXPECT_LE((cov - sw.matrix()).norm(), 0.05 * sw.norm());
}

TEST(GramStatistics, DirectOuterProducts) {
  GramStatistics g(2, 3);
  Trajectory t{Matrix(2, 3)};
  t.y << 1, 1, 1, 0, 0, 0;
  g.add(t);
  const Matrix e11 = vec2(1.0, 0.0) * vec2(1.0, 0.0).transpose();
  EXPECT_EQ(g.s_first().matrix(), e11);
  EXPECT_EQ(g.s_last().matrix(), e11);
  EXPECT_EQ(g.s_all().matrix(), Matrix(2.0 * e11));
  EXPECT_EQ(g.m_count(), 1);
  EXPECT_THROW(g.add(Trajectory{Matrix::Zero(2, 4)}), InputError);
}

TEST(GramStatistics, StreamingMatchesBatchAndMerge) {
  const Crank c;
  const auto init = fixtures::crank_init();
  const Eigen::Index horizon = 120;
  GramStatistics stream(2, horizon);
  GramStatistics half_a(2, horizon);
  GramStatistics half_b(2, horizon);
  Matrix y1(2, 1000), yn(2, 1000), all(2, 1000 * (horizon - 1));
  for (int i = 0; i < 1000; ++i) {
    Rng rng = trajectory_rng(5, 0, static_cast<std::uint64_t>(i));
    const auto t = sample_trajectory(c.sd, c.k, c.noise, init, horizon, rng);
    stream = accumulate(stream, t);
    (i < 500 ? half_a : half_b).add(t);
    y1.col(i) = t.y.col(0);
    yn.col(i) = t.y.col(horizon - 1);
    all.middleCols(i * (horizon - 1), horizon - 1) = t.y.leftCols(horizon - 1);
    if (i % 100 == 0) {
      EXPECT_GE(min_eigenvalue(stream.s_all()), -1e-12 * stream.s_all().norm());
      EXPECT_GE(min_eigenvalue(stream.s_first()), -1e-12 * stream.s_first().norm());
    }
  }
  const Matrix b_first = y1 * y1.transpose();
  const Matrix b_last = yn * yn.transpose();
  const Matrix b_all = all * all.transpose();
  EXPECT_LE((stream.s_first().matrix() - b_first).norm(), 1e-9 * b_first.norm());
  EXPECT_LE((stream.s_last().matrix() - b_last).norm(), 1e-9 * b_last.norm());
  EXPECT_LE((stream.s_all().matrix() - b_all).norm(), 1e-9 * b_all.norm());
  half_a.merge(half_b);
  EXPECT_EQ(half_a.m_count(), 1000);
  EXPECT_LE((half_a.s_all() - stream.s_all()).norm(), 1e-12 * b_all.norm());
}

TEST(TrajectoryCsv, RoundTrip) {
  Trajectory small{Matrix(2, 2)};
  small.y << 0.1, -3.5e-17, 1.0 / 3.0, 2.0;
  std::stringstream ss;
  write_trajectories(ss, std::vector<Trajectory>{small});
  EXPECT_EQ(read_trajectories(ss).front(), small);

  const Crank c;
  std::vector<Trajectory> many;
  for (int i = 0; i < 100; ++i) {
    Rng rng = trajectory_rng(1, 0, static_cast<std::uint64_t>(i));
    many.push_back(sample_trajectory(c.sd, c.k, c.noise, fixtures::crank_init(), 30, rng));
  }
  std::stringstream ms;
  write_trajectories(ms, many);
  const auto back = read_trajectories(ms);
  ASSERT_EQ(back.size(), many.size());
  double dev = 0.0;
  for (std::size_t i = 0; i < many.size(); ++i) dev = std::max(dev, (back[i].y - many[i].y).cwiseAbs().maxCoeff());
  EXPECT_LE(dev, 1e-15);
}

TEST(TrajectoryCsv, ParseErrorsNameTheLine) {
  auto line_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      read_trajectories(is);
    } catch (const ParseError& e) {
      return e.line();
    }
    return std::size_t{0};
  };
  EXPECT_EQ(line_of("traj_id,t,y_1,y_2\n0,1,1.0,2.0\n0,2,1.0\n"), 3u);
  EXPECT_EQ(line_of("traj_id,t,y_1,y_2\n0,1,1.0,2.0\n0,2,abc,1\n"), 3u);
  EXPECT_EQ(line_of("traj_id,t,y_1,y_2\n0,1,1.0,2.0\n0,3,1.0,1.0\n"), 3u);
  EXPECT_EQ(line_of("id,t,y_1\n"), 1u);
  EXPECT_EQ(line_of("traj_id,t,y_1\n0,1,1.0\n1,1,2.0\n1,2,3.0\n"), 3u);
}
