#include "lqioc/identifiability.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace lqioc {

namespace {

constexpr double kNonzeroNorm = 1e-10;
// Smallest accepted step for a unit-norm ΔP; anything below is treated as
// "only t = 0 is feasible".
constexpr double kMinStep = 1e-6;

Matrix kernel_of_bt(const SystemDynamics& sd) {
  Eigen::JacobiSVD<Matrix> svd(sd.b(), Eigen::ComputeFullU);
  const Eigen::Index rank = numerical_rank(sd.b());
  return svd.matrixU().rightCols(sd.n() - rank);
}

bool step_feasible(const SymMatrix& p_bar, const SymMatrix& q_bar, const SymMatrix& dp,
                   const SymMatrix& dq, double t) {
  const SymMatrix p = p_bar + t * dp;
  const SymMatrix q = q_bar + t * dq;
  const double p_tol = 1e-14 * (1.0 + p.norm());
  const double q_tol = 1e-14 * (1.0 + q.norm());
  return min_eigenvalue(p) >= -p_tol && min_eigenvalue(q) >= -q_tol;
}

}  // namespace

const char* to_string(IdentifiabilityStatus s) {
  switch (s) {
    case IdentifiabilityStatus::Identifiable:
      return "Identifiable";
    case IdentifiabilityStatus::NonIdentifiable:
      return "NonIdentifiable";
    case IdentifiabilityStatus::Undetermined:
      return "Undetermined";
  }
  return "Undetermined";
}

SymMatrix partner_delta_q(const SystemDynamics& sd, const SymMatrix& delta_p) {
  if (delta_p.dim() != sd.n()) {
    throw InputError("partner_delta_q: dimension mismatch");
  }
  const Matrix& a = sd.a();
  return SymMatrix(Matrix(delta_p.matrix() - a.transpose() * delta_p.matrix() * a));
}

CertificateResiduals certificate_residuals(const Certificate& cert, const SystemDynamics& sd,
                                           const SymMatrix& p_bar, const SymMatrix& q_bar) {
  const Eigen::Index n = sd.n();
  if (cert.delta_p.dim() != n || cert.delta_q.dim() != n || p_bar.dim() != n ||
      q_bar.dim() != n) {
    throw InputError("verify_certificate: dimension mismatch");
  }
  const Matrix& a = sd.a();
  const Matrix& dp = cert.delta_p.matrix();
  CertificateResiduals r;
  r.b_delta_p = (sd.b().transpose() * dp).norm();
  r.lyapunov = (a.transpose() * dp * a - dp + cert.delta_q.matrix()).norm();
  r.p_min_eig = min_eigenvalue(p_bar + cert.delta_p);
  r.q_min_eig = min_eigenvalue(q_bar + cert.delta_q);
  r.delta_p_norm = cert.delta_p.norm();
  r.delta_q_norm = cert.delta_q.norm();
  return r;
}

bool verify_certificate(const Certificate& cert, const SystemDynamics& sd, const SymMatrix& p_bar,
                        const SymMatrix& q_bar, double tol) {
  const auto r = certificate_residuals(cert, sd, p_bar, q_bar);
  return r.delta_p_norm > kNonzeroNorm && r.delta_q_norm > kNonzeroNorm && r.b_delta_p <= tol &&
         r.lyapunov <= tol && r.p_min_eig >= -tol && r.q_min_eig >= -tol;
}

std::vector<SymMatrix> admissible_delta_p_basis(const SystemDynamics& sd) {
  const Matrix v = kernel_of_bt(sd);
  std::vector<SymMatrix> basis;
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    basis.emplace_back(Matrix(v.col(k) * v.col(k).transpose()));
  }
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    for (Eigen::Index j = k + 1; j < v.cols(); ++j) {
      const Matrix s = v.col(k) * v.col(j).transpose() + v.col(j) * v.col(k).transpose();
      basis.emplace_back(Matrix(s / std::sqrt(2.0)));
    }
  }
  return basis;
}

double max_feasible_step(const SymMatrix& p_bar, const SymMatrix& q_bar, const SymMatrix& delta_p,
                         const SymMatrix& delta_q) {
  const double cap = 1e8 * (1.0 + p_bar.norm() + q_bar.norm());
  double lo = 0.0;
  double hi = 1.0;
  while (step_feasible(p_bar, q_bar, delta_p, delta_q, hi)) {
    lo = hi;
    hi *= 2.0;
    if (hi > cap) return lo;
  }
  while (hi - lo > 1e-10 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (step_feasible(p_bar, q_bar, delta_p, delta_q, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

std::optional<Certificate> kernel_certificate(const SystemDynamics& sd, const SymMatrix& p_bar,
                                              const SymMatrix& q_bar) {
  if (sd.n() <= sd.m()) {
    throw NotApplicableError("kernel_certificate: requires n > m (ker(Bᵀ) is trivial)");
  }
  const Matrix v = kernel_of_bt(sd);
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    const SymMatrix vvt(Matrix(v.col(k) * v.col(k).transpose()));
    for (double sign : {1.0, -1.0}) {
      const SymMatrix dp = sign * vvt;
      const SymMatrix dq = partner_delta_q(sd, dp);
      if (dq.norm() <= kNonzeroNorm) continue;
      const double t = max_feasible_step(p_bar, q_bar, dp, dq);
      if (t < kMinStep) continue;
      const double lambda = 0.5 * t;
      return Certificate{lambda * dp, lambda * dq, sign * lambda};
    }
  }
  return std::nullopt;
}

std::optional<Certificate> probe_certificate(const SystemDynamics& sd, const SymMatrix& p_bar,
                                             const SymMatrix& q_bar, const ProbeOptions& opts) {
  const auto basis = admissible_delta_p_basis(sd);
  if (basis.empty()) return std::nullopt;
  const auto dim = static_cast<Eigen::Index>(basis.size());

  std::vector<Vector> directions;
  for (Eigen::Index i = 0; i < dim; ++i) {
    directions.push_back(Vector::Unit(dim, i));
    directions.push_back(-Vector::Unit(dim, i));
  }
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal;
  for (int r = 0; r < opts.random_probes; ++r) {
    Vector c(dim);
    for (Eigen::Index i = 0; i < dim; ++i) c(i) = normal(rng);
    if (c.norm() == 0.0) continue;
    directions.push_back(c / c.norm());
  }

  // Probes are evaluated in fixed order; the first feasible one wins.
  for (const Vector& c : directions) {
    Matrix dp = Matrix::Zero(sd.n(), sd.n());
    for (Eigen::Index i = 0; i < dim; ++i) {
      dp += c(i) * basis[static_cast<std::size_t>(i)].matrix();
    }
    const SymMatrix delta_p(dp);
    const SymMatrix delta_q = partner_delta_q(sd, delta_p);
    if (delta_q.norm() <= kNonzeroNorm) continue;
    const double t = max_feasible_step(p_bar, q_bar, delta_p, delta_q);
    if (t < kMinStep) continue;
    const double alpha = 0.5 * t;
    return Certificate{alpha * delta_p, alpha * delta_q, alpha};
  }
  return std::nullopt;
}

IdentifiabilityVerdict check_identifiability(const SystemDynamics& sd, const SymMatrix& q_bar,
                                             const ProbeOptions& opts) {
  IdentifiabilityVerdict verdict;
  verdict.forward = solve_dare(sd, q_bar);
  const SymMatrix& p_bar = verdict.forward.p;

  if (sd.m() == sd.n()) {
    verdict.status = IdentifiabilityStatus::Identifiable;
    verdict.diagnostics = "B is square and invertible, so BᵀΔP = 0 forces ΔP = 0";
    return verdict;
  }

  std::ostringstream diag;
  const auto ed = symmetric_eigen(q_bar);
  const bool q_pd = ed.values(0) > 0.0 && ed.values(sd.n() - 1) > 1e-12 * ed.values(0);
  std::optional<Certificate> cert;
  if (q_pd) {
    cert = kernel_certificate(sd, p_bar, q_bar);
    diag << "Q is positive definite; rank-one kernel construction "
         << (cert ? "succeeded" : "failed") << ". ";
  }
  if (!cert) {
    cert = probe_certificate(sd, p_bar, q_bar, opts);
    diag << "direction probe over " << admissible_delta_p_basis(sd).size()
         << "-dimensional admissible subspace " << (cert ? "found" : "found no")
         << " certificate. ";
  }

  if (cert && verify_certificate(*cert, sd, p_bar, q_bar, 1e-8)) {
    verdict.status = IdentifiabilityStatus::NonIdentifiable;
    verdict.certificate = std::move(cert);
  } else {
    verdict.status = IdentifiabilityStatus::Undetermined;
    diag << "no verified certificate; the probe search is sufficient-only, so identifiability is "
            "not decided.";
  }
  verdict.diagnostics = diag.str();
  while (!verdict.diagnostics.empty() && verdict.diagnostics.back() == ' ') verdict.diagnostics.pop_back();
  return verdict;
}

}  // namespace lqioc
