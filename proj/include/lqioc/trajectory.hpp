#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <variant>
#include <vector>

#include "lqioc/lqr.hpp"

namespace lqioc {

enum class NoiseLaw {
  Gaussian,  // N(0, Σ)
  Uniform,   // F·u with u uniform on [−√3, √3]ⁿ, so the covariance is still Σ
};

/// Process and measurement noise covariances, both PSD.
///
/// Covariances given to four or so decimals can be indefinite at the rounding
/// level; eigenvalues down to −1e-4·λ_max are clipped to zero on
/// construction, anything more negative is rejected.
class NoiseModel {
 public:
  NoiseModel() = default;
  NoiseModel(const SymMatrix& sigma_w, const SymMatrix& sigma_v, NoiseLaw law = NoiseLaw::Gaussian);

  static NoiseModel zero(Eigen::Index n);

  const SymMatrix& sigma_w() const { return sigma_w_; }
  const SymMatrix& sigma_v() const { return sigma_v_; }
  const Matrix& factor_w() const { return factor_w_; }
  const Matrix& factor_v() const { return factor_v_; }
  NoiseLaw law() const { return law_; }
  Eigen::Index dim() const { return sigma_w_.dim(); }

 private:
  SymMatrix sigma_w_;
  SymMatrix sigma_v_;
  Matrix factor_w_;
  Matrix factor_v_;
  NoiseLaw law_ = NoiseLaw::Gaussian;
};

struct UniformBox {
  Vector lower;
  Vector upper;
};

struct GaussianState {
  Vector mean;
  SymMatrix covariance;
};

using InitialStateDistribution = std::variant<UniformBox, GaussianState>;

void validate(const InitialStateDistribution& init, Eigen::Index n);
Vector initial_mean(const InitialStateDistribution& init);

using Rng = std::mt19937_64;

/// Independent stream for trajectory `index` of batch `batch`; streams do not
/// depend on the order in which trajectories are generated.
Rng trajectory_rng(std::uint64_t seed, std::uint64_t batch, std::uint64_t index);

/// Observations y_1..y_N stored as the columns of an n×N matrix.
struct Trajectory {
  Matrix y;

  Eigen::Index dim() const { return y.rows(); }
  Eigen::Index horizon() const { return y.cols(); }
  bool operator==(const Trajectory& o) const { return y == o.y; }
};

/// Closed-loop rollout x_{t+1} = (A + BK)x_t + w_t, y_t = x_t + v_t from a
/// given initial state.
Trajectory simulate_from(const SystemDynamics& sd, const Matrix& k, const NoiseModel& noise,
                         const Vector& x1, Eigen::Index horizon, Rng& rng);

/// Same as simulate_from with x₁ drawn from `init`.
Trajectory sample_trajectory(const SystemDynamics& sd, const Matrix& k, const NoiseModel& noise,
                             const InitialStateDistribution& init, Eigen::Index horizon, Rng& rng);

/// Running sums of observation outer products:
///   s_first = Σᵢ y₁ⁱy₁ⁱᵀ, s_last = Σᵢ y_Nⁱy_Nⁱᵀ, s_all = Σᵢ Σ_{t<N} y_tⁱy_tⁱᵀ.
class GramStatistics {
 public:
  GramStatistics() = default;
  GramStatistics(Eigen::Index n, Eigen::Index horizon);
  GramStatistics(const SymMatrix& s_first, const SymMatrix& s_last, const SymMatrix& s_all,
                 std::int64_t m_count, Eigen::Index horizon);

  void add(const Trajectory& traj);
  void merge(const GramStatistics& other);

  Eigen::Index dim() const { return s_first_.rows(); }
  Eigen::Index horizon() const { return horizon_; }
  std::int64_t m_count() const { return m_count_; }
  SymMatrix s_first() const { return SymMatrix(s_first_); }
  SymMatrix s_last() const { return SymMatrix(s_last_); }
  SymMatrix s_all() const { return SymMatrix(s_all_); }

  bool operator==(const GramStatistics& o) const;

 private:
  Matrix s_first_;
  Matrix s_last_;
  Matrix s_all_;
  std::int64_t m_count_ = 0;
  Eigen::Index horizon_ = 0;
};

GramStatistics accumulate(GramStatistics stats, const Trajectory& traj);

void write_trajectories(std::ostream& os, std::span<const Trajectory> trajectories);
std::vector<Trajectory> read_trajectories(std::istream& is);
void write_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajectories);
std::vector<Trajectory> read_trajectories(const std::filesystem::path& path);

}  // namespace lqioc
