#include "lqioc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numbers>
#include <thread>

namespace lqioc {

namespace {

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  return j.contains(key) ? j[key].get<T>() : fallback;
}

const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw InputError(std::string("experiment config: missing field ") + key);
  return j[key];
}

}  // namespace

ExperimentConfig parse_experiment_config(const Json& j) {
  if (!j.is_object()) throw InputError("experiment config: expected a JSON object");
  ExperimentConfig cfg;
  cfg.echo = j;
  try {
    const ModelFile mf = parse_model(require(j, "model"));
    cfg.dynamics = mf.dynamics;
    const Eigen::Index n = cfg.dynamics.n();

    cfg.q_bar = sym_from_json(require(j, "Q_bar"), "Q_bar");
    const NoiseLaw law =
        get_or<std::string>(j, "noise_law", "gaussian") == "uniform" ? NoiseLaw::Uniform
                                                                      : NoiseLaw::Gaussian;
    cfg.noise = NoiseModel(sym_from_json(require(j, "Sigma_w"), "Sigma_w"),
                           sym_from_json(require(j, "Sigma_v"), "Sigma_v"), law);

    cfg.init = init_from_json(require(j, "init"));
    validate(cfg.init, n);

    cfg.horizon = require(j, "N").get<Eigen::Index>();
    cfg.m_schedule = require(j, "m_schedule").get<std::vector<std::int64_t>>();
    cfg.batches = require(j, "batches").get<int>();
    cfg.phi = require(j, "phi").get<double>();
    cfg.seed = get_or<std::uint64_t>(j, "seed", 0);
    cfg.output_dir = get_or<std::string>(j, "output_dir", "results");
    cfg.threads = get_or<unsigned>(j, "threads", 0);
    cfg.degenerate_error_level = get_or<double>(j, "degenerate_error_level", 1e-4);
    if (j.contains("solver")) {
      const Json& s = j["solver"];
      cfg.solver.tol = get_or<double>(s, "tol", cfg.solver.tol);
      cfg.solver.max_iter = get_or<int>(s, "max_iter", cfg.solver.max_iter);
      cfg.solver.rho = get_or<double>(s, "rho", cfg.solver.rho);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("experiment config: ") + e.what());
  }

  if (cfg.q_bar.dim() != cfg.dynamics.n() || cfg.noise.dim() != cfg.dynamics.n()) {
    throw InputError("experiment config: Q_bar and covariances must match the state dimension");
  }
  if (cfg.horizon < 2) throw InputError("experiment config: N must be at least 2");
  if (cfg.batches < 1) throw InputError("experiment config: batches must be at least 1");
  if (cfg.m_schedule.empty() || cfg.m_schedule.front() < 1) {
    throw InputError("experiment config: m_schedule must be non-empty and positive");
  }
  for (std::size_t i = 1; i < cfg.m_schedule.size(); ++i) {
    if (cfg.m_schedule[i] <= cfg.m_schedule[i - 1]) {
      throw InputError("experiment config: m_schedule must be strictly increasing");
    }
  }
  if (!(cfg.phi > 0.0)) throw InputError("experiment config: phi must be positive");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_json(path));
}

Json default_experiment_json() {
  Json j;
  j["model"] = {{"A_hat", {{0.0, 1.0}, {0.0, -4.0}}}, {"B_hat", {{0.0}, {3.0}}}, {"dt", 0.05}};
  j["Q_bar"] = {{1.0, 0.0}, {0.0, 1.0}};
  j["Sigma_w"] = {{0.1039e-4, 0.0677e-4}, {0.0677e-4, 0.0997e-4}};
  j["Sigma_v"] = {{0.2328e-4, -0.2253e-4}, {-0.2253e-4, 0.2180e-4}};
  j["init"] = {{"kind", "uniform_box"},
               {"lower", {-2.0 / 3.0 * std::numbers::pi, -0.1}},
               {"upper", {0.0, 0.1}}};
  j["N"] = 120;
  j["m_schedule"] = {100, 400, 1600, 6400};
  j["batches"] = 10;
  j["phi"] = 1e4;
  j["seed"] = 2024;
  j["solver"] = {{"tol", 1e-8}, {"max_iter", 200000}, {"rho", 1.0}};
  j["output_dir"] = "results";
  return j;
}

LogLogFit fit_loglog(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) {
    throw InputError("fit_loglog: need at least 3 points");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [m, v] : points) {
    if (!(m > 0.0) || !(v > 0.0) || !std::isfinite(v)) {
      throw InputError("fit_loglog: M and values must be positive");
    }
    xs.push_back(std::log(m));
    ys.push_back(std::log(v));
  }
  const auto count = static_cast<double>(xs.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= count;
  my /= count;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0) throw InputError("fit_loglog: all M are equal");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

void summarize(ConsistencyResult& result, double degenerate_error_level) {
  std::vector<std::int64_t> schedule;
  for (const auto& c : result.cells) {
    if (std::find(schedule.begin(), schedule.end(), c.m) == schedule.end()) schedule.push_back(c.m);
  }
  std::sort(schedule.begin(), schedule.end());

  result.summaries.clear();
  result.fit_mean.reset();
  result.fit_std.reset();
  result.fit_note.clear();
  for (const auto m : schedule) {
    ConsistencySummary s;
    s.m = m;
    double sum = 0.0;
    for (const auto& c : result.cells) {
      if (c.m == m && !c.failed) {
        sum += c.rel_error;
        ++s.count;
      }
    }
    if (s.count == 0) {
      s.mean = std::nan("");
      s.std = std::nan("");
    } else {
      s.mean = sum / s.count;
      double ss = 0.0;
      for (const auto& c : result.cells) {
        if (c.m == m && !c.failed) ss += (c.rel_error - s.mean) * (c.rel_error - s.mean);
      }
      s.std = s.count > 1 ? std::sqrt(ss / (s.count - 1)) : 0.0;
    }
    result.summaries.push_back(s);
  }

  if (result.summaries.size() < 3) {
    result.fit_note = "fewer than 3 schedule entries; no fit";
    return;
  }
  const bool degenerate = std::all_of(result.summaries.begin(), result.summaries.end(), [&](const auto& s) {
    return !(s.mean > degenerate_error_level);
  });
  if (degenerate) {
    result.fit_note = "degenerate: all mean errors are at or below the solver noise floor; no fit";
    return;
  }
  std::vector<std::pair<double, double>> mean_pts;
  std::vector<std::pair<double, double>> std_pts;
  for (const auto& s : result.summaries) {
    mean_pts.emplace_back(static_cast<double>(s.m), s.mean);
    std_pts.emplace_back(static_cast<double>(s.m), s.std);
  }
  try {
    result.fit_mean = fit_loglog(mean_pts);
  } catch (const InputError& e) {
    result.fit_note += std::string("mean fit skipped: ") + e.what() + "; ";
  }
  try {
    result.fit_std = fit_loglog(std_pts);
  } catch (const InputError& e) {
    result.fit_note += std::string("std fit skipped: ") + e.what() + "; ";
  }
}

namespace {

std::vector<ConsistencyCell> run_batch(const ExperimentConfig& cfg, const Matrix& k_bar, int batch) {
  const Eigen::Index n = cfg.dynamics.n();
  const double k_norm = k_bar.norm();
  std::vector<ConsistencyCell> cells;
  GramStatistics stats(n, cfg.horizon);
  std::size_t next = 0;
  const std::int64_t total = cfg.m_schedule.back();
  for (std::int64_t i = 0; i < total; ++i) {
    Rng rng = trajectory_rng(cfg.seed, static_cast<std::uint64_t>(batch), static_cast<std::uint64_t>(i));
    stats.add(sample_trajectory(cfg.dynamics, k_bar, cfg.noise, cfg.init, cfg.horizon, rng));
    if (i + 1 != cfg.m_schedule[next]) continue;

    ConsistencyCell cell;
    cell.batch = batch;
    cell.m = i + 1;
    try {
      const IocInstance inst{cfg.dynamics, cfg.noise, stats, cfg.phi};
      const IocEstimate est = estimate(inst, cfg.solver);
      cell.rel_error = (est.k_star - k_bar).norm() / k_norm;
    } catch (const Error& e) {
      cell.failed = true;
      cell.rel_error = std::nan("");
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
    ++next;
  }
  return cells;
}

}  // namespace

ConsistencyResult run_experiment(const ExperimentConfig& cfg) {
  const LqrSolution forward = solve_dare(cfg.dynamics, cfg.q_bar);
  ConsistencyResult result;
  result.k_bar = forward.k;
  result.config_echo = cfg.echo;
  result.warnings = forward.warnings;
  if (forward.k.norm() == 0.0) {
    throw InputError("run_experiment: true gain is zero; relative errors are undefined");
  }

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const unsigned workers = std::min<unsigned>(cfg.threads ? cfg.threads : hw,
                                              static_cast<unsigned>(cfg.batches));
  std::vector<std::vector<ConsistencyCell>> per_batch(static_cast<std::size_t>(cfg.batches));
  // Batches are handed out in waves of `workers`; each batch writes only its slot.
  for (int start = 0; start < cfg.batches; start += static_cast<int>(workers)) {
    std::vector<std::future<std::vector<ConsistencyCell>>> wave;
    const int stop = std::min(cfg.batches, start + static_cast<int>(workers));
    for (int b = start; b < stop; ++b) {
      wave.push_back(std::async(std::launch::async, run_batch, std::cref(cfg), std::cref(forward.k), b));
    }
    for (int b = start; b < stop; ++b) {
      per_batch[static_cast<std::size_t>(b)] = wave[static_cast<std::size_t>(b - start)].get();
    }
  }

  for (auto& cells : per_batch) {
    for (auto& c : cells) {
      if (c.failed) {
        ++result.failures;
        result.warnings.push_back("batch " + std::to_string(c.batch) + ", M = " + std::to_string(c.m) +
                                  " failed: " + c.error);
      }
      result.cells.push_back(std::move(c));
    }
  }
  if (result.failures * 10 > static_cast<int>(result.cells.size())) {
    throw NumericalError("run_experiment: " + std::to_string(result.failures) + " of " +
                         std::to_string(result.cells.size()) + " estimations failed (more than 10%)");
  }
  summarize(result, cfg.degenerate_error_level);
  return result;
}

}  // namespace lqioc
