#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lqioc/lqr.hpp"

namespace lqioc {

/// A nonzero pair (ΔP, ΔQ) such that (Q̄ + ΔQ, P̄ + ΔP) solves the same Riccati
/// equation and produces the same gain as (Q̄, P̄).
struct Certificate {
  SymMatrix delta_p;
  SymMatrix delta_q;
  double alpha = 0.0;
};

struct CertificateResiduals {
  double b_delta_p = 0.0;       // ‖BᵀΔP‖_F
  double lyapunov = 0.0;        // ‖AᵀΔPA − ΔP + ΔQ‖_F
  double p_min_eig = 0.0;       // λ_min(P̄ + ΔP)
  double q_min_eig = 0.0;       // λ_min(Q̄ + ΔQ)
  double delta_p_norm = 0.0;
  double delta_q_norm = 0.0;
};

enum class IdentifiabilityStatus { Identifiable, NonIdentifiable, Undetermined };

const char* to_string(IdentifiabilityStatus s);

struct IdentifiabilityVerdict {
  IdentifiabilityStatus status = IdentifiabilityStatus::Undetermined;
  std::optional<Certificate> certificate;
  std::string diagnostics;
  LqrSolution forward;
};

CertificateResiduals certificate_residuals(const Certificate& cert, const SystemDynamics& sd,
                                           const SymMatrix& p_bar, const SymMatrix& q_bar);

bool verify_certificate(const Certificate& cert, const SystemDynamics& sd, const SymMatrix& p_bar,
                        const SymMatrix& q_bar, double tol);

/// ΔQ = ΔP − AᵀΔPA, the unique partner of ΔP under the Lyapunov-type condition.
SymMatrix partner_delta_q(const SystemDynamics& sd, const SymMatrix& delta_p);

/// Orthonormal (Frobenius) basis of {S ∈ 𝕊ⁿ : BᵀS = 0}, built from an
/// orthonormal basis {v_k} of ker(Bᵀ) as v_k v_kᵀ and (v_k v_jᵀ + v_j v_kᵀ)/√2.
std::vector<SymMatrix> admissible_delta_p_basis(const SystemDynamics& sd);

/// Largest t with P̄ + tΔP ⪰ 0 and Q̄ + tΔQ ⪰ 0, found by bisection. Returns 0
/// when no positive step is feasible.
double max_feasible_step(const SymMatrix& p_bar, const SymMatrix& q_bar, const SymMatrix& delta_p,
                         const SymMatrix& delta_q);

/// Rank-one certificate ΔP = λvvᵀ with v ∈ ker(Bᵀ). Both signs of λ are tried
/// (positive first); λ is half the feasibility boundary. Throws
/// NotApplicableError when n ≤ m.
std::optional<Certificate> kernel_certificate(const SystemDynamics& sd, const SymMatrix& p_bar,
                                              const SymMatrix& q_bar);

struct ProbeOptions {
  int random_probes = 64;
  std::uint64_t seed = 0x5eed;
};

std::optional<Certificate> probe_certificate(const SystemDynamics& sd, const SymMatrix& p_bar,
                                             const SymMatrix& q_bar, const ProbeOptions& opts = {});

IdentifiabilityVerdict check_identifiability(const SystemDynamics& sd, const SymMatrix& q_bar,
                                             const ProbeOptions& opts = {});

}  // namespace lqioc
