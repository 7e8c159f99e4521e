#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "lqioc/ioc.hpp"
#include "lqioc/json_io.hpp"

namespace lqioc {

inline constexpr const char* kArtifactVersion = "lqioc 1.0.0";

struct ExperimentConfig {
  SystemDynamics dynamics;
  SymMatrix q_bar;
  NoiseModel noise;
  InitialStateDistribution init;
  Eigen::Index horizon = 0;
  std::vector<std::int64_t> m_schedule;  // strictly increasing
  int batches = 1;
  double phi = 1e4;
  std::uint64_t seed = 0;
  SolverSettings solver;
  std::filesystem::path output_dir = "results";
  // Worker threads for batches; 0 means hardware concurrency.
  unsigned threads = 0;
  // When every per-M mean error is at or below this level the log-log fits
  // are skipped as degenerate.
  double degenerate_error_level = 1e-4;
  Json echo;
};

/// Reads the JSON config. Model is either {"A_hat","B_hat","dt"} or {"A","B"};
/// "init" is {"kind":"uniform_box","lower","upper"} or
/// {"kind":"gaussian","mean","covariance"}.
ExperimentConfig parse_experiment_config(const Json& j);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// The configuration used for the desk-scale study of the crank system.
Json default_experiment_json();

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Ordinary least squares of log(value) on log(M). Needs at least 3 points,
/// positive values, and at least two distinct M.
LogLogFit fit_loglog(const std::vector<std::pair<double, double>>& points);

struct ConsistencyCell {
  int batch = 0;
  std::int64_t m = 0;
  double rel_error = 0.0;
  bool failed = false;
  std::string error;
};

struct ConsistencySummary {
  std::int64_t m = 0;
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single batch
  int count = 0;
};

struct ConsistencyResult {
  Matrix k_bar;
  std::vector<ConsistencyCell> cells;  // batch-major, schedule order
  std::vector<ConsistencySummary> summaries;
  std::optional<LogLogFit> fit_mean;
  std::optional<LogLogFit> fit_std;
  std::string fit_note;
  int failures = 0;
  std::vector<std::string> warnings;
  Json config_echo;
};

/// Per-M mean/std over successful cells, and the log-log fits when the
/// schedule has at least three entries and the errors are not degenerate.
void summarize(ConsistencyResult& result, double degenerate_error_level = 1e-4);

/// For each batch, simulate max(m_schedule) trajectories, reduce them to Gram
/// statistics in order, and estimate the gain at every schedule entry (the
/// sets are nested prefixes). Batches run on worker threads; results do not
/// depend on the thread count. Throws NumericalError if more than 10% of the
/// cells fail.
ConsistencyResult run_experiment(const ExperimentConfig& cfg);

/// results.csv, consistency.svg and report.json in `dir`.
void emit_results(const ConsistencyResult& result, const std::filesystem::path& dir);

void write_results_csv(std::ostream& os, const ConsistencyResult& result);
/// Reads cells and summaries back from a results CSV.
ConsistencyResult read_results_csv(std::istream& is);
void write_svg(std::ostream& os, const ConsistencyResult& result);
Json report_json(const ConsistencyResult& result);

}  // namespace lqioc
