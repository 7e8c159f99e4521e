#include "lqioc/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

namespace lqioc {

namespace {

SymMatrix clip_rounding_negatives(const SymMatrix& s, const char* what) {
  const auto ed = symmetric_eigen(s);
  const double lmax = ed.values(0);
  const double lmin = ed.values(s.dim() - 1);
  if (lmin >= 0.0) return s;
  if (lmin < -1e-10 - 1e-4 * std::max(lmax, 0.0)) {
    throw DefinitenessError(std::string(what) + " is not positive semidefinite (smallest eigenvalue " +
                            std::to_string(lmin) + ")");
  }
  return psd_project(s);
}

void draw_standard(NoiseLaw law, Rng& rng, Vector& z) {
  if (law == NoiseLaw::Gaussian) {
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
  } else {
    std::uniform_real_distribution<double> uni(-std::sqrt(3.0), std::sqrt(3.0));
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = uni(rng);
  }
}

}  // namespace

NoiseModel::NoiseModel(const SymMatrix& sigma_w, const SymMatrix& sigma_v, NoiseLaw law)
    : sigma_w_(clip_rounding_negatives(sigma_w, "Sigma_w")),
      sigma_v_(clip_rounding_negatives(sigma_v, "Sigma_v")),
      law_(law) {
  if (sigma_w_.dim() != sigma_v_.dim()) {
    throw InputError("NoiseModel: Sigma_w and Sigma_v differ in dimension");
  }
  factor_w_ = psd_factor(sigma_w_);
  factor_v_ = psd_factor(sigma_v_);
}

NoiseModel NoiseModel::zero(Eigen::Index n) {
  return NoiseModel(SymMatrix::zero(n), SymMatrix::zero(n));
}

void validate(const InitialStateDistribution& init, Eigen::Index n) {
  if (const auto* box = std::get_if<UniformBox>(&init)) {
    if (box->lower.size() != n || box->upper.size() != n) {
      throw InputError("UniformBox: bounds must have length " + std::to_string(n));
    }
    if (!box->lower.allFinite() || !box->upper.allFinite() ||
        !(box->lower.array() < box->upper.array()).all()) {
      throw InputError("UniformBox: need finite lower < upper in every coordinate");
    }
  } else {
    const auto& g = std::get<GaussianState>(init);
    if (g.mean.size() != n || g.covariance.dim() != n || !g.mean.allFinite()) {
      throw InputError("GaussianState: mean/covariance must have dimension " + std::to_string(n));
    }
    const auto ed = symmetric_eigen(g.covariance);
    if (!(ed.values(n - 1) > 0.0)) {
      throw InputError("GaussianState: covariance must be positive definite");
    }
  }
}

Vector initial_mean(const InitialStateDistribution& init) {
  if (const auto* box = std::get_if<UniformBox>(&init)) {
    return 0.5 * (box->lower + box->upper);
  }
  return std::get<GaussianState>(init).mean;
}

Rng trajectory_rng(std::uint64_t seed, std::uint64_t batch, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch), static_cast<std::uint32_t>(batch >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

Trajectory simulate_from(const SystemDynamics& sd, const Matrix& k, const NoiseModel& noise,
                         const Vector& x1, Eigen::Index horizon, Rng& rng) {
  const Eigen::Index n = sd.n();
  if (horizon < 2) {
    throw InputError("sample_trajectory: horizon must be at least 2");
  }
  if (x1.size() != n || noise.dim() != n) {
    throw InputError("sample_trajectory: dimension mismatch");
  }
  if (k.rows() != sd.m() || k.cols() != n) {
    throw InputError("sample_trajectory: gain has wrong shape");
  }
  const Matrix a_cl = sd.a() + sd.b() * k;

  Trajectory traj;
  traj.y.resize(n, horizon);
  Vector x = x1;
  Vector z(n);
  for (Eigen::Index t = 0; t < horizon; ++t) {
    draw_standard(noise.law(), rng, z);
    traj.y.col(t) = x + noise.factor_v() * z;
    if (t + 1 < horizon) {
      draw_standard(noise.law(), rng, z);
      x = a_cl * x + noise.factor_w() * z;
    }
  }
  return traj;
}

Trajectory sample_trajectory(const SystemDynamics& sd, const Matrix& k, const NoiseModel& noise,
                             const InitialStateDistribution& init, Eigen::Index horizon, Rng& rng) {
  validate(init, sd.n());
  Vector x1(sd.n());
  if (const auto* box = std::get_if<UniformBox>(&init)) {
    for (Eigen::Index i = 0; i < x1.size(); ++i) {
      std::uniform_real_distribution<double> uni(box->lower(i), box->upper(i));
      x1(i) = uni(rng);
    }
  } else {
    const auto& g = std::get<GaussianState>(init);
    Vector z(sd.n());
    draw_standard(NoiseLaw::Gaussian, rng, z);
    x1 = g.mean + psd_factor(g.covariance) * z;
  }
  return simulate_from(sd, k, noise, x1, horizon, rng);
}

GramStatistics::GramStatistics(Eigen::Index n, Eigen::Index horizon)
    : s_first_(Matrix::Zero(n, n)),
      s_last_(Matrix::Zero(n, n)),
      s_all_(Matrix::Zero(n, n)),
      horizon_(horizon) {
  if (horizon < 2) throw InputError("GramStatistics: horizon must be at least 2");
}

GramStatistics::GramStatistics(const SymMatrix& s_first, const SymMatrix& s_last,
                               const SymMatrix& s_all, std::int64_t m_count, Eigen::Index horizon)
    : s_first_(s_first.matrix()),
      s_last_(s_last.matrix()),
      s_all_(s_all.matrix()),
      m_count_(m_count),
      horizon_(horizon) {
  if (s_last.dim() != s_first.dim() || s_all.dim() != s_first.dim()) {
    throw InputError("GramStatistics: inconsistent dimensions");
  }
  if (m_count < 0 || horizon < 2) {
    throw InputError("GramStatistics: need m_count >= 0 and horizon >= 2");
  }
}

void GramStatistics::add(const Trajectory& traj) {
  if (traj.horizon() != horizon_) {
    throw InputError("accumulate: trajectory horizon " + std::to_string(traj.horizon()) +
                     " does not match " + std::to_string(horizon_));
  }
  if (traj.dim() != dim()) {
    throw InputError("accumulate: trajectory dimension mismatch");
  }
  const auto& y = traj.y;
  s_first_.noalias() += y.col(0) * y.col(0).transpose();
  s_last_.noalias() += y.col(horizon_ - 1) * y.col(horizon_ - 1).transpose();
  // Rank-one updates keep s_all exactly symmetric (a GEMM would not).
  for (Eigen::Index t = 0; t + 1 < horizon_; ++t) {
    s_all_.noalias() += y.col(t) * y.col(t).transpose();
  }
  ++m_count_;
}

void GramStatistics::merge(const GramStatistics& other) {
  if (other.horizon_ != horizon_ || other.dim() != dim()) {
    throw InputError("GramStatistics::merge: horizon or dimension mismatch");
  }
  s_first_ += other.s_first_;
  s_last_ += other.s_last_;
  s_all_ += other.s_all_;
  m_count_ += other.m_count_;
}

bool GramStatistics::operator==(const GramStatistics& o) const {
  return dim() == o.dim() && horizon_ == o.horizon_ && m_count_ == o.m_count_ &&
         s_first_ == o.s_first_ && s_last_ == o.s_last_ && s_all_ == o.s_all_;
}

GramStatistics accumulate(GramStatistics stats, const Trajectory& traj) {
  stats.add(traj);
  return stats;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  out.append(buf, res.ptr);
}

double parse_number(std::string_view field, std::size_t line) {
  double v = 0.0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || !std::isfinite(v)) {
    throw ParseError("invalid number '" + std::string(field) + "'", line);
  }
  return v;
}

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(',', start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

void write_trajectories(std::ostream& os, std::span<const Trajectory> trajectories) {
  if (trajectories.empty()) {
    throw InputError("write_trajectories: nothing to write");
  }
  const Eigen::Index n = trajectories.front().dim();
  std::string line = "traj_id,t";
  for (Eigen::Index i = 1; i <= n; ++i) line += ",y_" + std::to_string(i);
  os << line << '\n';
  for (std::size_t id = 0; id < trajectories.size(); ++id) {
    const auto& tr = trajectories[id];
    if (tr.dim() != n) throw InputError("write_trajectories: mixed state dimensions");
    for (Eigen::Index t = 0; t < tr.horizon(); ++t) {
      line = std::to_string(id) + "," + std::to_string(t + 1);
      for (Eigen::Index i = 0; i < n; ++i) {
        line += ',';
        append_number(line, tr.y(i, t));
      }
      os << line << '\n';
    }
  }
  if (!os) throw Error("write_trajectories: write failed");
}

std::vector<Trajectory> read_trajectories(std::istream& is) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(is, line)) throw ParseError("empty trajectory file", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 3 || header[0] != "traj_id" || header[1] != "t") {
    throw ParseError("expected header 'traj_id,t,y_1,...,y_n'", line_no);
  }
  const auto n = static_cast<Eigen::Index>(header.size() - 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (header[static_cast<std::size_t>(i) + 2] != "y_" + std::to_string(i + 1)) {
      throw ParseError("unexpected column name '" + std::string(header[i + 2]) + "'", line_no);
    }
  }

  std::vector<Trajectory> out;
  std::vector<Vector> current;
  long current_id = -1;
  auto flush = [&](std::size_t at_line) {
    if (current.empty()) return;
    if (current.size() < 2) throw ParseError("trajectory with fewer than 2 steps", at_line);
    Trajectory tr;
    tr.y.resize(n, static_cast<Eigen::Index>(current.size()));
    for (std::size_t t = 0; t < current.size(); ++t) tr.y.col(static_cast<Eigen::Index>(t)) = current[t];
    out.push_back(std::move(tr));
    current.clear();
  };

  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) + " columns, found " +
                           std::to_string(fields.size()),
                       line_no);
    }
    long id = 0;
    long t = 0;
    if (std::from_chars(fields[0].data(), fields[0].data() + fields[0].size(), id).ec != std::errc() ||
        std::from_chars(fields[1].data(), fields[1].data() + fields[1].size(), t).ec != std::errc()) {
      throw ParseError("invalid traj_id or t", line_no);
    }
    if (id != current_id) {
      flush(line_no);
      current_id = id;
    }
    if (t != static_cast<long>(current.size()) + 1) {
      throw ParseError("time index " + std::to_string(t) + " out of sequence", line_no);
    }
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = parse_number(fields[static_cast<std::size_t>(i) + 2], line_no);
    current.push_back(std::move(y));
  }
  flush(line_no);
  if (out.empty()) throw ParseError("no trajectories in file", line_no);
  return out;
}

void write_trajectories(const std::filesystem::path& path, std::span<const Trajectory> trajectories) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  write_trajectories(os, trajectories);
}

std::vector<Trajectory> read_trajectories(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open " + path.string());
  return read_trajectories(is);
}

}  // namespace lqioc
