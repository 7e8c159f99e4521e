#include "lqioc/lqr.hpp"

#include <cmath>
#include <sstream>

namespace lqioc {

SystemDynamics::SystemDynamics(Matrix a, Matrix b) : a_(std::move(a)), b_(std::move(b)) {
  require_square(a_, "SystemDynamics: A");
  if (b_.rows() != a_.rows()) {
    throw InputError("SystemDynamics: B has " + std::to_string(b_.rows()) + " rows, expected " +
                     std::to_string(a_.rows()));
  }
  if (a_.rows() == 0 || b_.cols() == 0) {
    throw InputError("SystemDynamics: empty state or input dimension");
  }
  require_finite(a_, "SystemDynamics: A");
  require_finite(b_, "SystemDynamics: B");
}

std::string AssumptionReport::describe() const {
  std::ostringstream os;
  os << "controllable=" << controllable << " b_full_rank=" << b_full_rank
     << " a_invertible=" << a_invertible << " observable=" << observable;
  return os.str();
}

SystemDynamics discretize(const ContinuousDynamics& cd, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InputError("discretize: time step must be positive");
  }
  require_square(cd.a_hat, "discretize: A_hat");
  const Eigen::Index n = cd.a_hat.rows();
  if (cd.b_hat.rows() != n) {
    throw InputError("discretize: B_hat row count does not match A_hat");
  }
  const Eigen::Index m = cd.b_hat.cols();
  Matrix aug = Matrix::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = cd.a_hat;
  aug.topRightCorner(n, m) = cd.b_hat;
  const Matrix e = expm(aug * dt);
  return SystemDynamics(e.topLeftCorner(n, n), e.topRightCorner(n, m));
}

Matrix observation_factor(const SymMatrix& q) {
  const auto ed = symmetric_eigen(q);
  const double lmax = ed.values.size() ? ed.values(0) : 0.0;
  Matrix c(0, q.dim());
  if (lmax <= 0.0) return c;
  for (Eigen::Index i = 0; i < ed.values.size(); ++i) {
    if (ed.values(i) > 1e-10 * lmax) {
      c.conservativeResize(c.rows() + 1, Eigen::NoChange);
      c.row(c.rows() - 1) = std::sqrt(ed.values(i)) * ed.vectors.col(i).transpose();
    }
  }
  return c;
}

AssumptionReport check_assumptions(const SystemDynamics& sd, const SymMatrix& q) {
  const Eigen::Index n = sd.n();
  const Eigen::Index m = sd.m();
  if (q.dim() != n) {
    throw InputError("check_assumptions: Q has dimension " + std::to_string(q.dim()) +
                     ", expected " + std::to_string(n));
  }
  const auto ed = symmetric_eigen(q);
  const double lmax = std::max(ed.values(0), 0.0);
  if (ed.values(n - 1) < -1e-10 * std::max(lmax, 1.0)) {
    throw DefinitenessError("check_assumptions: Q is not positive semidefinite");
  }

  AssumptionReport r;
  Matrix ctrb(n, n * m);
  Matrix block = sd.b();
  for (Eigen::Index i = 0; i < n; ++i) {
    ctrb.middleCols(i * m, m) = block;
    block = sd.a() * block;
  }
  r.controllable = numerical_rank(ctrb) == n;
  r.b_full_rank = numerical_rank(sd.b()) == m;
  r.a_invertible = numerical_rank(sd.a()) == n;

  const Matrix c = observation_factor(q);
  if (c.rows() == 0) {
    r.observable = false;
  } else {
    const Eigen::Index k = c.rows();
    Matrix obsv(n * k, n);
    Matrix row_block = c;
    for (Eigen::Index i = 0; i < n; ++i) {
      obsv.middleRows(i * k, k) = row_block;
      row_block = row_block * sd.a();
    }
    r.observable = numerical_rank(obsv) == n;
  }
  return r;
}

namespace {

void require_compatible(const SystemDynamics& sd, const SymMatrix& p, const char* what) {
  if (p.dim() != sd.n()) {
    throw InputError(std::string(what) + ": matrix dimension " + std::to_string(p.dim()) +
                     " does not match state dimension " + std::to_string(sd.n()));
  }
}

Matrix input_weight(const SystemDynamics& sd, const Matrix& p) {
  return sd.b().transpose() * p * sd.b() + Matrix::Identity(sd.m(), sd.m());
}

// Doubling on the symplectic pencil with A₀ = A, G₀ = BBᵀ, H₀ = Q; H_k
// converges quadratically to the stabilizing solution.
bool solve_doubling(const SystemDynamics& sd, const SymMatrix& q, const DareOptions& opts,
                    Matrix& p_out, int& iterations) {
  const Eigen::Index n = sd.n();
  const Matrix eye = Matrix::Identity(n, n);
  Matrix ak = sd.a();
  Matrix gk = sd.b() * sd.b().transpose();
  Matrix hk = q.matrix();
  for (int it = 1; it <= opts.max_iter; ++it) {
    Eigen::PartialPivLU<Matrix> lu(eye + gk * hk);
    const Matrix w_a = lu.solve(ak);
    const Matrix w_g = lu.solve(gk);
    const Matrix a_next = ak * w_a;
    Matrix g_next = gk + ak * w_g * ak.transpose();
    Matrix h_next = hk + ak.transpose() * hk * w_a;
    g_next = 0.5 * (g_next + g_next.transpose());
    h_next = 0.5 * (h_next + h_next.transpose());
    if (!h_next.allFinite() || !g_next.allFinite() || !a_next.allFinite()) {
      return false;
    }
    const double step = (h_next - hk).norm();
    ak = a_next;
    gk = g_next;
    hk = h_next;
    iterations = it;
    if (step <= opts.rel_tol * (1.0 + hk.norm())) {
      p_out = hk;
      return true;
    }
  }
  return false;
}

}  // namespace

SymMatrix riccati_map(const SystemDynamics& sd, const SymMatrix& q, const SymMatrix& p) {
  require_compatible(sd, q, "riccati_map");
  require_compatible(sd, p, "riccati_map");
  const Matrix& a = sd.a();
  const Matrix& b = sd.b();
  const Matrix& pm = p.matrix();
  const Matrix bpa = b.transpose() * pm * a;
  const Matrix rhs = a.transpose() * pm * a + q.matrix() -
                     bpa.transpose() * input_weight(sd, pm).ldlt().solve(bpa);
  return SymMatrix(Matrix(0.5 * (rhs + rhs.transpose())));
}

double dare_residual(const SystemDynamics& sd, const SymMatrix& q, const SymMatrix& p) {
  return (riccati_map(sd, q, p).matrix() - p.matrix()).norm();
}

SymMatrix solve_dare_fixed_point(const SystemDynamics& sd, const SymMatrix& q,
                                 const DareOptions& opts, int* iterations) {
  SymMatrix p = q;
  for (int it = 1; it <= opts.max_iter; ++it) {
    SymMatrix next = riccati_map(sd, q, p);
    const double res = dare_residual(sd, q, next);
    p = std::move(next);
    if (iterations) *iterations = it;
    if (res <= opts.rel_tol * (1.0 + p.norm())) {
      return p;
    }
  }
  throw NumericalError("solve_dare_fixed_point: no convergence after " +
                       std::to_string(opts.max_iter) + " iterations");
}

LqrSolution solve_dare(const SystemDynamics& sd, const SymMatrix& q, const DareOptions& opts) {
  const AssumptionReport rep = check_assumptions(sd, q);
  if (!rep.controllable || !rep.b_full_rank || !rep.observable) {
    throw ModelError("solve_dare: structural assumptions violated (" + rep.describe() + ")");
  }

  LqrSolution sol;
  sol.q = q;
  if (!rep.a_invertible) {
    sol.warnings.push_back("A is singular; the pair is not the sampling of a continuous-time system");
  }

  Matrix p;
  int iterations = 0;
  bool ok = solve_doubling(sd, q, opts, p, iterations);
  if (ok) {
    sol.p = SymMatrix(p);
    sol.method = "doubling";
    ok = dare_residual(sd, q, sol.p) <= 1e-8 * (1.0 + sol.p.norm());
  }
  if (!ok) {
    sol.p = solve_dare_fixed_point(sd, q, opts, &iterations);
    sol.method = "fixed-point";
  }
  sol.iterations = iterations;
  sol.residual = dare_residual(sd, q, sol.p);
  sol.k = control_gain(sol.p, sd);
  sol.spectral_radius = spectral_radius(sd.a() + sd.b() * sol.k);

  if (sol.residual > 1e-8 * (1.0 + sol.p.norm())) {
    throw NumericalError("solve_dare: residual " + std::to_string(sol.residual) + " too large");
  }
  if (!(sol.spectral_radius < 1.0)) {
    throw NumericalError("solve_dare: solution is not stabilizing (spectral radius " +
                         std::to_string(sol.spectral_radius) + ")");
  }
  if (!(min_eigenvalue(sol.p) > 0.0)) {
    throw NumericalError("solve_dare: solution is not positive definite");
  }
  return sol;
}

Matrix control_gain(const SymMatrix& p, const SystemDynamics& sd) {
  require_compatible(sd, p, "control_gain");
  const Matrix& pm = p.matrix();
  const Matrix bpa = sd.b().transpose() * pm * sd.a();
  return -input_weight(sd, pm).ldlt().solve(bpa);
}

ClosedLoop closed_loop(const SystemDynamics& sd, const Matrix& k) {
  if (k.rows() != sd.m() || k.cols() != sd.n()) {
    throw InputError("closed_loop: gain must be " + std::to_string(sd.m()) + "x" +
                     std::to_string(sd.n()));
  }
  ClosedLoop cl;
  cl.a_cl = sd.a() + sd.b() * k;
  cl.spectral_radius = spectral_radius(cl.a_cl);
  cl.determinant = cl.a_cl.determinant();
  cl.invertible = numerical_rank(cl.a_cl) == sd.n();
  return cl;
}

}  // namespace lqioc
