#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lqioc/lqr.hpp"

namespace lqioc {

/// min ⟨c_q, Q⟩ + ⟨c_p, P⟩
/// s.t. Q ⪰ 0, P ⪰ 0, H(Q, P) ⪰ 0, ‖Q‖_F ≤ φ, ‖P‖_F ≤ φ
struct ConicProblem {
  SystemDynamics dynamics;
  SymMatrix c_q;
  SymMatrix c_p;
  double phi = 0.0;
};

struct SolverSettings {
  double tol = 1e-8;
  int max_iter = 200000;
  double rho = 1.0;
  // Residual balancing: every adapt_interval iterations, scale ρ by
  // adapt_factor when one residual exceeds the other by adapt_ratio.
  int adapt_interval = 100;
  double adapt_factor = 2.0;
  double adapt_ratio = 10.0;
  // Infeasible after this many consecutive iterations of primal residual growth.
  int divergence_window = 1000;
  // How often the best feasible objective is recorded.
  int trace_interval = 100;
};

enum class SolverStatus { Solved, MaxIter, Infeasible };

const char* to_string(SolverStatus s);

struct ConicSolution {
  SymMatrix q;
  SymMatrix p;
  double objective_value = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double final_rho = 0.0;
  SolverStatus status = SolverStatus::MaxIter;
  // Best objective among feasible iterates seen so far, sampled every
  // trace_interval iterations. Non-increasing by construction.
  std::vector<double> best_objective_trace;
};

struct FeasibilityReport {
  double q_min_eig = 0.0;
  double p_min_eig = 0.0;
  double h_min_eig = 0.0;
  double q_norm = 0.0;
  double p_norm = 0.0;
  double phi = 0.0;
  bool feasible = false;
  std::vector<std::string> violations;
};

/// H(Q, P) = [[BᵀPB + I, BᵀPA], [AᵀPB, AᵀPA + Q − P]]
SymMatrix assemble_h(const SymMatrix& q, const SymMatrix& p, const SystemDynamics& sd);

/// Eigenvalue thresholds are relative: λ_min(X) ≥ −tol·max(1, ‖X‖_F); norms
/// must satisfy ‖X‖_F ≤ φ(1 + tol).
FeasibilityReport verify_feasibility(const SymMatrix& q, const SymMatrix& p,
                                     const ConicProblem& prob, double tol);

/// Projection onto {X ⪰ 0, ‖X‖_F ≤ radius}: PSD projection, then radial
/// scaling. Exact because the ball is centred at the origin of the cone.
SymMatrix project_psd_ball(const SymMatrix& s, double radius);

/// Symmetric-matrix vectorization with √2 on off-diagonals, so that the
/// Euclidean inner product equals the trace inner product.
Vector svec(const SymMatrix& s);
SymMatrix smat(const Vector& v, Eigen::Index n);

class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual ConicSolution solve(const ConicProblem& prob, const SolverSettings& settings) const = 0;
};

/// Operator splitting with S = H(Q, P): a cached linear solve in (Q, P),
/// projections onto the PSD cone of size m + n and onto the two PSD balls,
/// then a scaled dual update.
class AdmmBackend final : public ConicBackend {
 public:
  ConicSolution solve(const ConicProblem& prob, const SolverSettings& settings) const override;
};

ConicSolution solve(const ConicProblem& prob, const SolverSettings& settings = {});

}  // namespace lqioc
