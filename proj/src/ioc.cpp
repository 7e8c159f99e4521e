#include "lqioc/ioc.hpp"

#include <sstream>

namespace lqioc {

namespace {

void validate(const IocInstance& inst) {
  const Eigen::Index n = inst.dynamics.n();
  if (inst.noise.dim() != n || inst.stats.dim() != n) {
    throw InputError("IocInstance: noise and statistics must match the state dimension " +
                     std::to_string(n));
  }
  if (inst.stats.m_count() < 1) {
    throw InputError("IocInstance: at least one trajectory is required");
  }
}

}  // namespace

ObjectiveCoefficients build_objective(const IocInstance& inst) {
  validate(inst);
  const auto& st = inst.stats;
  const double inv_m = 1.0 / static_cast<double>(st.m_count());
  const double steps = static_cast<double>(st.horizon() - 1);
  ObjectiveCoefficients c;
  c.c_p = SymMatrix(Matrix(inv_m * (st.s_last().matrix() - st.s_first().matrix()) -
                           steps * inst.noise.sigma_w().matrix()));
  c.c_q = SymMatrix(Matrix(inv_m * st.s_all().matrix() - steps * inst.noise.sigma_v().matrix()));
  return c;
}

double evaluate_violation(const SymMatrix& q, const SymMatrix& p, const IocInstance& inst) {
  const auto c = build_objective(inst);
  return inner(c.c_q, q) + inner(c.c_p, p);
}

IocEstimate estimate(const IocInstance& inst, const SolverSettings& settings,
                     const ConicBackend& backend) {
  const auto coeffs = build_objective(inst);
  const ConicProblem prob{inst.dynamics, coeffs.c_q, coeffs.c_p, inst.phi};
  ConicSolution sol = backend.solve(prob, settings);
  if (sol.status != SolverStatus::Solved) {
    std::ostringstream os;
    os << "estimate: solver stopped with status " << to_string(sol.status) << " after "
       << sol.iterations << " iterations (primal " << sol.primal_residual << ", dual "
       << sol.dual_residual << ")";
    throw EstimationError(os.str(), std::move(sol));
  }

  IocEstimate est;
  est.q_star = sol.q;
  est.p_star = sol.p;
  est.k_star = control_gain(sol.p, inst.dynamics);
  est.objective_value = sol.objective_value;
  est.feasibility = verify_feasibility(sol.q, sol.p, prob, 1e-6);
  if (sol.q.norm() >= 0.99 * inst.phi) {
    est.warnings.push_back("||Q*||_F is within 1% of phi; the norm bound may be active");
  }
  if (sol.p.norm() >= 0.99 * inst.phi) {
    est.warnings.push_back("||P*||_F is within 1% of phi; the norm bound may be active");
  }
  est.solver = std::move(sol);
  return est;
}

}  // namespace lqioc
