#pragma once

#include <string>
#include <vector>

#include "lqioc/linalg.hpp"

namespace lqioc {

struct ContinuousDynamics {
  Matrix a_hat;  // n×n
  Matrix b_hat;  // n×m
};

/// Discrete-time pair x_{t+1} = A x_t + B u_t + w_t.
///
/// Construction only checks shapes and finiteness. The structural assumptions
/// (controllability, full column rank of B, invertible A) are reported by
/// check_assumptions and enforced by solve_dare, so that degenerate pairs can
/// still be represented and diagnosed.
class SystemDynamics {
 public:
  SystemDynamics() = default;
  SystemDynamics(Matrix a, Matrix b);

  const Matrix& a() const { return a_; }
  const Matrix& b() const { return b_; }
  Eigen::Index n() const { return a_.rows(); }
  Eigen::Index m() const { return b_.cols(); }

 private:
  Matrix a_;
  Matrix b_;
};

struct AssumptionReport {
  bool controllable = false;
  bool b_full_rank = false;
  bool a_invertible = false;
  bool observable = false;

  bool all() const { return controllable && b_full_rank && a_invertible && observable; }
  std::string describe() const;
};

struct LqrSolution {
  SymMatrix q;
  SymMatrix p;
  Matrix k;
  double residual = 0.0;
  double spectral_radius = 0.0;
  int iterations = 0;
  std::string method;  // "doubling" or "fixed-point"
  std::vector<std::string> warnings;
};

struct DareOptions {
  double rel_tol = 1e-12;
  int max_iter = 10000;
};

struct ClosedLoop {
  Matrix a_cl;
  double spectral_radius = 0.0;
  double determinant = 0.0;
  bool invertible = false;
};

/// A = e^{Â·dt}, B = ∫₀^{dt} e^{Âτ}dτ·B̂ from the exponential of [[Â, B̂], [0, 0]]·dt.
SystemDynamics discretize(const ContinuousDynamics& cd, double dt);

/// Output factor C̄ with Q = C̄ᵀC̄: one row √λᵢ·vᵢᵀ per eigenvalue above 1e-10·λ_max.
Matrix observation_factor(const SymMatrix& q);

AssumptionReport check_assumptions(const SystemDynamics& sd, const SymMatrix& q);

/// Right-hand side of the Riccati equation:
/// AᵀPA + Q − AᵀPB(BᵀPB + I)⁻¹BᵀPA.
SymMatrix riccati_map(const SystemDynamics& sd, const SymMatrix& q, const SymMatrix& p);

/// ‖AᵀPA − P + Q − AᵀPB(BᵀPB + I)⁻¹BᵀPA‖_F
double dare_residual(const SystemDynamics& sd, const SymMatrix& q, const SymMatrix& p);

/// Stabilizing solution of the DARE with R = I, by structure-preserving
/// doubling with plain fixed-point iteration as fallback.
///
/// Throws ModelError when (A, B) is not controllable, B is rank deficient, or
/// (A, C̄) is not observable. A singular A only produces a warning.
LqrSolution solve_dare(const SystemDynamics& sd, const SymMatrix& q, const DareOptions& opts = {});

/// Fixed-point Riccati iteration P ← riccati_map(P) from P = Q. Exposed as an
/// independent route to the same solution.
SymMatrix solve_dare_fixed_point(const SystemDynamics& sd, const SymMatrix& q,
                                 const DareOptions& opts = {}, int* iterations = nullptr);

/// K = −(BᵀPB + I)⁻¹BᵀPA
Matrix control_gain(const SymMatrix& p, const SystemDynamics& sd);

ClosedLoop closed_loop(const SystemDynamics& sd, const Matrix& k);

}  // namespace lqioc
