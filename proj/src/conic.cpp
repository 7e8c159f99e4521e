#include "lqioc/conic.hpp"

#include <cmath>
#include <limits>

namespace lqioc {

const char* to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Solved:
      return "Solved";
    case SolverStatus::MaxIter:
      return "MaxIter";
    case SolverStatus::Infeasible:
      return "Infeasible";
  }
  return "MaxIter";
}

SymMatrix assemble_h(const SymMatrix& q, const SymMatrix& p, const SystemDynamics& sd) {
  const Eigen::Index n = sd.n();
  const Eigen::Index m = sd.m();
  if (q.dim() != n || p.dim() != n) {
    throw InputError("assemble_h: Q and P must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  const Matrix& a = sd.a();
  const Matrix& b = sd.b();
  const Matrix& pm = p.matrix();
  const Matrix pa = pm * a;
  Matrix h(m + n, m + n);
  h.topLeftCorner(m, m) = b.transpose() * pm * b + Matrix::Identity(m, m);
  h.topRightCorner(m, n) = b.transpose() * pa;
  h.bottomLeftCorner(n, m) = h.topRightCorner(m, n).transpose();
  h.bottomRightCorner(n, n) = a.transpose() * pa + q.matrix() - pm;
  return SymMatrix(Matrix(0.5 * (h + h.transpose())));
}

FeasibilityReport verify_feasibility(const SymMatrix& q, const SymMatrix& p,
                                     const ConicProblem& prob, double tol) {
  FeasibilityReport r;
  const SymMatrix h = assemble_h(q, p, prob.dynamics);
  r.q_min_eig = min_eigenvalue(q);
  r.p_min_eig = min_eigenvalue(p);
  r.h_min_eig = min_eigenvalue(h);
  r.q_norm = q.norm();
  r.p_norm = p.norm();
  r.phi = prob.phi;
  if (r.q_min_eig < -tol * std::max(1.0, r.q_norm)) r.violations.emplace_back("Q psd");
  if (r.p_min_eig < -tol * std::max(1.0, r.p_norm)) r.violations.emplace_back("P psd");
  if (r.h_min_eig < -tol * std::max(1.0, h.norm())) r.violations.emplace_back("H(Q,P) psd");
  if (r.q_norm > prob.phi * (1.0 + tol)) r.violations.emplace_back("Q norm ball");
  if (r.p_norm > prob.phi * (1.0 + tol)) r.violations.emplace_back("P norm ball");
  r.feasible = r.violations.empty();
  return r;
}

SymMatrix project_psd_ball(const SymMatrix& s, double radius) {
  SymMatrix out = psd_project(s);
  const double nrm = out.norm();
  if (nrm > radius) {
    out = (radius / nrm) * out;
  }
  return out;
}

Vector svec(const SymMatrix& s) {
  const Eigen::Index n = s.dim();
  Vector v(n * (n + 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      v(k++) = (i == j) ? s(i, j) : std::sqrt(2.0) * s(i, j);
    }
  }
  return v;
}

SymMatrix smat(const Vector& v, Eigen::Index n) {
  if (v.size() != n * (n + 1) / 2) {
    throw InputError("smat: vector length does not match dimension");
  }
  Matrix m(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double x = (i == j) ? v(k) : v(k) / std::sqrt(2.0);
      m(i, j) = x;
      m(j, i) = x;
      ++k;
    }
  }
  return SymMatrix(m);
}

namespace {

// Linear part of H as a matrix acting on [svec Q; svec P].
Matrix h_operator(const SystemDynamics& sd) {
  const Eigen::Index n = sd.n();
  const Eigen::Index nq = n * (n + 1) / 2;
  const Eigen::Index nh = (n + sd.m()) * (n + sd.m() + 1) / 2;
  const SymMatrix zero = SymMatrix::zero(n);
  const Vector h0 = svec(assemble_h(zero, zero, sd));
  Matrix op(nh, 2 * nq);
  for (Eigen::Index k = 0; k < 2 * nq; ++k) {
    const Vector e = Vector::Unit(2 * nq, k);
    const SymMatrix q = smat(e.head(nq), n);
    const SymMatrix p = smat(e.tail(nq), n);
    op.col(k) = svec(assemble_h(q, p, sd)) - h0;
  }
  return op;
}

void validate(const ConicProblem& prob) {
  const Eigen::Index n = prob.dynamics.n();
  if (!(prob.phi > 0.0) || !std::isfinite(prob.phi)) {
    throw InputError("ConicProblem: phi must be positive and finite");
  }
  if (prob.c_q.dim() != n || prob.c_p.dim() != n) {
    throw InputError("ConicProblem: objective coefficients must be " + std::to_string(n) + "x" +
                     std::to_string(n));
  }
}

}  // namespace

ConicSolution AdmmBackend::solve(const ConicProblem& prob, const SolverSettings& settings) const {
  validate(prob);
  const SystemDynamics& sd = prob.dynamics;
  const Eigen::Index n = sd.n();
  const Eigen::Index nh_dim = n + sd.m();
  const Eigen::Index nq = n * (n + 1) / 2;

  const Matrix op = h_operator(sd);
  const SymMatrix zero = SymMatrix::zero(n);
  const Vector h0 = svec(assemble_h(zero, zero, sd));
  const Eigen::LLT<Matrix> kkt(Matrix::Identity(2 * nq, 2 * nq) + op.transpose() * op);
  if (kkt.info() != Eigen::Success) {
    throw NumericalError("AdmmBackend: factorization of the normal equations failed");
  }

  Vector c(2 * nq);
  c << svec(prob.c_q), svec(prob.c_p);
  const double c_scale = std::max({1.0, prob.c_q.norm(), prob.c_p.norm()});
  const Vector c_unit = c / c_scale;

  Vector x = Vector::Zero(2 * nq);
  Vector z1 = Vector::Zero(2 * nq);
  Vector z2 = h0;
  Vector u1 = Vector::Zero(2 * nq);
  Vector u2 = Vector::Zero(op.rows());
  double rho = settings.rho;

  ConicSolution sol;
  sol.status = SolverStatus::MaxIter;
  double best = std::numeric_limits<double>::infinity();
  double prev_r = std::numeric_limits<double>::infinity();
  double streak_start_r = 0.0;
  int growth_streak = 0;
  double r = 0.0;
  double s = 0.0;

  int it = 1;
  for (; it <= settings.max_iter; ++it) {
    x = kkt.solve(z1 - u1 + op.transpose() * (z2 - h0 - u2) - c_unit / rho);
    const Vector hx = op * x + h0;

    const Vector z1_old = z1;
    const Vector z2_old = z2;
    const Vector v1 = x + u1;
    z1.head(nq) = svec(project_psd_ball(smat(v1.head(nq), n), prob.phi));
    z1.tail(nq) = svec(project_psd_ball(smat(v1.tail(nq), n), prob.phi));
    z2 = svec(psd_project(smat(hx + u2, nh_dim)));

    const Vector r1 = x - z1;
    const Vector r2 = hx - z2;
    u1 += r1;
    u2 += r2;

    r = std::sqrt(r1.squaredNorm() + r2.squaredNorm());
    s = rho * ((z1 - z1_old) + op.transpose() * (z2 - z2_old)).norm();
    const double primal_scale =
        std::max({std::sqrt(x.squaredNorm() + hx.squaredNorm()),
                  std::sqrt(z1.squaredNorm() + z2.squaredNorm()), h0.norm()});
    const double dual_scale = rho * (u1 + op.transpose() * u2).norm();

    if (settings.trace_interval > 0 && it % settings.trace_interval == 0) {
      const SymMatrix q = smat(z1.head(nq), n);
      const SymMatrix p = smat(z1.tail(nq), n);
      const SymMatrix h = assemble_h(q, p, sd);
      if (min_eigenvalue(h) >= -1e-6 * std::max(1.0, h.norm())) {
        best = std::min(best, c.dot(z1));
      }
      if (std::isfinite(best)) sol.best_objective_trace.push_back(best);
    }

    if (r <= settings.tol * (1.0 + primal_scale) && s <= settings.tol * (1.0 + dual_scale)) {
      sol.status = SolverStatus::Solved;
      break;
    }

    if (r > prev_r) {
      if (growth_streak == 0) streak_start_r = prev_r;
      ++growth_streak;
      if (growth_streak >= settings.divergence_window && r > 10.0 * streak_start_r) {
        sol.status = SolverStatus::Infeasible;
        break;
      }
    } else {
      growth_streak = 0;
    }
    prev_r = r;

    if (settings.adapt_interval > 0 && it % settings.adapt_interval == 0) {
      if (r > settings.adapt_ratio * s) {
        rho *= settings.adapt_factor;
        u1 /= settings.adapt_factor;
        u2 /= settings.adapt_factor;
        growth_streak = 0;
      } else if (s > settings.adapt_ratio * r) {
        rho /= settings.adapt_factor;
        u1 *= settings.adapt_factor;
        u2 *= settings.adapt_factor;
        growth_streak = 0;
      }
    }
  }

  sol.iterations = std::min(it, settings.max_iter);
  sol.q = smat(z1.head(nq), n);
  sol.p = smat(z1.tail(nq), n);
  sol.objective_value = c.dot(z1);
  sol.primal_residual = r;
  sol.dual_residual = s;
  sol.final_rho = rho;
  if (sol.status == SolverStatus::Solved && !verify_feasibility(sol.q, sol.p, prob, 1e-6).feasible) {
    sol.status = SolverStatus::MaxIter;
  }
  return sol;
}

ConicSolution solve(const ConicProblem& prob, const SolverSettings& settings) {
  return AdmmBackend{}.solve(prob, settings);
}

}  // namespace lqioc
