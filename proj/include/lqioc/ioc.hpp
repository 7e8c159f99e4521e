#pragma once

#include <string>
#include <vector>

#include "lqioc/conic.hpp"
#include "lqioc/trajectory.hpp"

namespace lqioc {

/// Everything the estimator is allowed to see: known dynamics, known noise
/// covariances, and the Gram statistics of the observed trajectories.
struct IocInstance {
  SystemDynamics dynamics;
  NoiseModel noise;
  GramStatistics stats;
  double phi = 0.0;
};

/// Coefficients of the empirical violation objective, which is linear in (Q, P):
///   Ψ_M(Q, P) = ⟨c_q, Q⟩ + ⟨c_p, P⟩
///   c_p = (s_last − s_first)/M − (N − 1)Σ_w
///   c_q = s_all/M − (N − 1)Σ_v
struct ObjectiveCoefficients {
  SymMatrix c_q;
  SymMatrix c_p;
};

ObjectiveCoefficients build_objective(const IocInstance& inst);

/// Ψ_M(q, p). The dropped constant E‖u‖² is not reconstructed, so the value is
/// shifted by it.
double evaluate_violation(const SymMatrix& q, const SymMatrix& p, const IocInstance& inst);

struct IocEstimate {
  SymMatrix q_star;
  SymMatrix p_star;
  Matrix k_star;
  double objective_value = 0.0;
  ConicSolution solver;
  FeasibilityReport feasibility;
  std::vector<std::string> warnings;
};

class EstimationError : public NumericalError {
 public:
  EstimationError(const std::string& what, ConicSolution solution)
      : NumericalError(what), solution_(std::move(solution)) {}
  const ConicSolution& solution() const { return solution_; }

 private:
  ConicSolution solution_;
};

/// Solve the estimator over D(φ) and return K* = −(BᵀP*B + I)⁻¹BᵀP*A.
/// Throws EstimationError when the solver stops without status Solved.
IocEstimate estimate(const IocInstance& inst, const SolverSettings& settings = {},
                     const ConicBackend& backend = AdmmBackend{});

}  // namespace lqioc
