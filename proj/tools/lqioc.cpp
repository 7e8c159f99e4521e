// lqioc: forward LQR, identifiability checks, trajectory simulation, inverse
// optimal control estimation and the consistency study.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lqioc/experiment.hpp"
#include "lqioc/identifiability.hpp"

using namespace lqioc;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

SymMatrix model_q(const ModelFile& mf) {
  if (!mf.q) throw InputError("model file: Q is required");
  return *mf.q;
}

NoiseModel model_noise(const ModelFile& mf, bool required) {
  const Eigen::Index n = mf.dynamics.n();
  if (!mf.sigma_w || !mf.sigma_v) {
    if (required) throw InputError("model file: Sigma_w and Sigma_v are required");
    return NoiseModel::zero(n);
  }
  return NoiseModel(*mf.sigma_w, *mf.sigma_v);
}

Json solution_json(const LqrSolution& sol, const SystemDynamics& sd) {
  Json j;
  j["A"] = to_json(sd.a());
  j["B"] = to_json(sd.b());
  j["Q"] = to_json(sol.q);
  j["P"] = to_json(sol.p);
  j["K"] = to_json(sol.k);
  j["spectral_radius"] = sol.spectral_radius;
  j["dare_residual"] = sol.residual;
  j["method"] = sol.method;
  j["iterations"] = sol.iterations;
  j["warnings"] = sol.warnings;
  return j;
}

int cmd_forward(const std::string& model_path) {
  const ModelFile mf = parse_model(read_json(model_path));
  const LqrSolution sol = solve_dare(mf.dynamics, model_q(mf));
  print(solution_json(sol, mf.dynamics));
  return 0;
}

int cmd_identifiability(const std::string& model_path) {
  const ModelFile mf = parse_model(read_json(model_path));
  const SymMatrix q = model_q(mf);
  const IdentifiabilityVerdict v = check_identifiability(mf.dynamics, q);
  Json j;
  j["verdict"] = to_string(v.status);
  j["diagnostics"] = v.diagnostics;
  j["P_bar"] = to_json(v.forward.p);
  j["K_bar"] = to_json(v.forward.k);
  if (v.certificate) {
    const auto& c = *v.certificate;
    const auto r = certificate_residuals(c, mf.dynamics, v.forward.p, q);
    j["certificate"] = {{"alpha", c.alpha}, {"delta_P", to_json(c.delta_p)}, {"delta_Q", to_json(c.delta_q)}};
    j["residuals"] = {{"B_T_delta_P", r.b_delta_p},          {"lyapunov", r.lyapunov},
                      {"P_plus_delta_P_min_eig", r.p_min_eig}, {"Q_plus_delta_Q_min_eig", r.q_min_eig},
                      {"delta_P_norm", r.delta_p_norm},       {"delta_Q_norm", r.delta_q_norm}};
  } else {
    j["certificate"] = nullptr;
  }
  print(j);
  return 0;
}

struct SimulateArgs {
  std::string model;
  Eigen::Index horizon = 120;
  std::int64_t count = 100;
  std::uint64_t seed = 0;
  std::uint64_t batch = 0;
  std::string out;
  bool gram_only = false;
};

int cmd_simulate(const SimulateArgs& a) {
  const Json mj = read_json(a.model);
  const ModelFile mf = parse_model(mj);
  const Eigen::Index n = mf.dynamics.n();
  const LqrSolution sol = solve_dare(mf.dynamics, model_q(mf));
  const NoiseModel noise = model_noise(mf, false);
  InitialStateDistribution init = UniformBox{Vector::Constant(n, -1.0), Vector::Constant(n, 1.0)};
  if (mj.contains("init")) init = init_from_json(mj["init"]);
  validate(init, n);
  if (a.horizon < 2) throw InputError("simulate: N must be at least 2");
  if (a.count < 1) throw InputError("simulate: M must be at least 1");

  GramStatistics stats(n, a.horizon);
  std::vector<Trajectory> trajs;
  for (std::int64_t i = 0; i < a.count; ++i) {
    Rng rng = trajectory_rng(a.seed, a.batch, static_cast<std::uint64_t>(i));
    Trajectory t = sample_trajectory(mf.dynamics, sol.k, noise, init, a.horizon, rng);
    stats.add(t);
    if (!a.gram_only) trajs.push_back(std::move(t));
  }

  if (a.gram_only) {
    const Json g = gram_to_json(stats);
    if (a.out.empty()) {
      print(g);
    } else {
      write_json(a.out, g);
      print(Json{{"gram", a.out}, {"M", a.count}, {"N", a.horizon}});
    }
    return 0;
  }
  if (a.out.empty()) {
    write_trajectories(std::cout, trajs);
  } else {
    write_trajectories(std::filesystem::path(a.out), trajs);
    print(Json{{"trajectories", a.out}, {"M", a.count}, {"N", a.horizon}, {"K_bar", to_json(sol.k)}});
  }
  return 0;
}

struct EstimateArgs {
  std::string model;
  std::string gram;
  std::string trajectories;
  double phi = 1e4;
  SolverSettings solver;
};

int cmd_estimate(const EstimateArgs& a) {
  const ModelFile mf = parse_model(read_json(a.model));
  GramStatistics stats;
  if (!a.gram.empty()) {
    stats = gram_from_json(read_json(a.gram));
  } else {
    const auto trajs = read_trajectories(std::filesystem::path(a.trajectories));
    if (trajs.empty()) throw InputError("estimate: no trajectories in " + a.trajectories);
    stats = GramStatistics(trajs.front().dim(), trajs.front().horizon());
    for (const auto& t : trajs) {
      if (t.horizon() != stats.horizon()) throw InputError("estimate: trajectories have different lengths");
      stats.add(t);
    }
  }
  const IocInstance inst{mf.dynamics, model_noise(mf, true), stats, a.phi};
  const IocEstimate est = estimate(inst, a.solver);
  Json j;
  j["Q_star"] = to_json(est.q_star);
  j["P_star"] = to_json(est.p_star);
  j["K_star"] = to_json(est.k_star);
  j["objective"] = est.objective_value;
  j["residuals"] = {{"primal", est.solver.primal_residual},
                    {"dual", est.solver.dual_residual},
                    {"iterations", est.solver.iterations},
                    {"status", to_string(est.solver.status)},
                    {"Q_min_eig", est.feasibility.q_min_eig},
                    {"P_min_eig", est.feasibility.p_min_eig},
                    {"H_min_eig", est.feasibility.h_min_eig}};
  j["warnings"] = est.warnings;
  print(j);
  return 0;
}

int cmd_experiment(const std::string& config, const std::optional<std::uint64_t>& seed,
                   const std::string& out, unsigned threads) {
  Json cj = read_json(config);
  if (seed) cj["seed"] = *seed;
  if (!out.empty()) cj["output_dir"] = out;
  if (threads) cj["threads"] = threads;
  const ExperimentConfig cfg = parse_experiment_config(cj);
  const ConsistencyResult result = run_experiment(cfg);
  emit_results(result, cfg.output_dir);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  Json j = report_json(result);
  j["output_dir"] = cfg.output_dir.string();
  print(j);
  return 0;
}

int cmd_plot(const std::string& results, const std::string& out) {
  std::ifstream is(results);
  if (!is) throw InputError("cannot open " + results);
  ConsistencyResult r = read_results_csv(is);
  const auto summaries = r.summaries;
  summarize(r);
  // Keep the summary values exactly as written; only the fits are recomputed.
  if (!summaries.empty()) r.summaries = summaries;
  std::ofstream os(out);
  if (!os) throw Error("cannot open " + out + " for writing");
  write_svg(os, r);
  Json j{{"svg", out},
         {"slope_mean", r.fit_mean ? Json(r.fit_mean->slope) : Json(nullptr)},
         {"slope_std", r.fit_std ? Json(r.fit_std->slope) : Json(nullptr)}};
  print(j);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Forward LQR, identifiability, and inverse optimal control from noisy trajectories"};
  app.require_subcommand(1);

  std::string model;
  auto* forward = app.add_subcommand("forward", "Solve the DARE for a model and print P, K");
  forward->add_option("-m,--model", model, "Model JSON: {A_hat, B_hat, dt} or {A, B}, plus Q")
      ->required()
      ->check(CLI::ExistingFile);

  auto* ident = app.add_subcommand("identifiability", "Decide whether Q can be recovered from K");
  ident->add_option("-m,--model", model, "Model JSON with A, B (or A_hat, B_hat, dt) and Q")
      ->required()
      ->check(CLI::ExistingFile);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Sample closed-loop trajectories under the optimal gain");
  simulate->add_option("-m,--model", sim.model,
                       "Model JSON with Q; optional Sigma_w, Sigma_v (default 0) and init "
                       "(default uniform on [-1, 1]^n)")
      ->required()
      ->check(CLI::ExistingFile);
  simulate->add_option("-N,--horizon", sim.horizon, "Trajectory length")->capture_default_str();
  simulate->add_option("-M,--count", sim.count, "Number of trajectories")->capture_default_str();
  simulate->add_option("-s,--seed", sim.seed, "Random seed")->capture_default_str();
  simulate->add_option("--batch", sim.batch, "Batch index for the random stream")->capture_default_str();
  simulate->add_option("-o,--out", sim.out, "Output path (CSV, or JSON with --gram-only); stdout if omitted");
  simulate->add_flag("--gram-only", sim.gram_only, "Write only the Gram statistics");

  EstimateArgs est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Estimate Q, P and K from trajectory statistics");
  estimate_cmd->add_option("-m,--model", est.model, "Model JSON with A, B (or A_hat, B_hat, dt), Sigma_w, Sigma_v")
      ->required()
      ->check(CLI::ExistingFile);
  auto* gram_opt = estimate_cmd->add_option("-g,--gram", est.gram, "Gram statistics JSON")->check(CLI::ExistingFile);
  auto* traj_opt =
      estimate_cmd->add_option("-t,--trajectories", est.trajectories, "Trajectory CSV")->check(CLI::ExistingFile);
  gram_opt->excludes(traj_opt);
  estimate_cmd->add_option("--phi", est.phi, "Frobenius-norm bound on Q and P")->capture_default_str();
  estimate_cmd->add_option("--tol", est.solver.tol, "Solver tolerance")->capture_default_str();
  estimate_cmd->add_option("--max-iter", est.solver.max_iter, "Solver iteration limit")->capture_default_str();
  estimate_cmd->add_option("--rho", est.solver.rho, "Initial ADMM penalty")->capture_default_str();

  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  unsigned threads = 0;
  auto* experiment = app.add_subcommand("experiment", "Run the consistency study and write CSV, SVG and report");
  experiment->add_option("-c,--config", config, "Experiment config JSON")->required()->check(CLI::ExistingFile);
  experiment->add_option("-s,--seed", seed, "Override the config seed");
  experiment->add_option("-o,--out", out_dir, "Override the output directory");
  experiment->add_option("--threads", threads, "Worker threads for batches (0 = all cores)");

  bool print_default = false;
  auto* default_config = app.add_subcommand("default-config", "Print the desk-scale experiment config");
  default_config->callback([&] { print_default = true; });

  std::string results;
  std::string svg;
  auto* plot = app.add_subcommand("plot", "Redraw the log-log SVG from a results CSV");
  plot->add_option("-r,--results", results, "results.csv from an experiment")->required()->check(CLI::ExistingFile);
  plot->add_option("-o,--out", svg, "SVG output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*forward) return cmd_forward(model);
    if (*ident) return cmd_identifiability(model);
    if (*simulate) return cmd_simulate(sim);
    if (*estimate_cmd) {
      if (est.gram.empty() && est.trajectories.empty()) {
        std::cerr << "error: estimate needs --gram or --trajectories\n";
        return kExitUsage;
      }
      return cmd_estimate(est);
    }
    if (*experiment) return cmd_experiment(config, seed, out_dir, threads);
    if (print_default) {
      print(default_experiment_json());
      return 0;
    }
    if (*plot) return cmd_plot(results, svg);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
