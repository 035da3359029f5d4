#include "tvpath/path_following.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tvpath/diagnostics.hpp"

namespace tvpath {

void PathConfig::validate() const {
  if (!(gamma0 > 0) || !(delta0 > 0)) throw InvalidParameter("gamma0 and delta0 must be positive");
  if (!(kappa > 0)) throw InvalidParameter("kappa must be positive");
  if (!(0 < sigma_min && sigma_min <= sigma0 && sigma0 <= sigma_max && sigma_max < 1)) {
    throw InvalidParameter("sigma bounds must satisfy 0 < sigma_min <= sigma0 <= sigma_max < 1");
  }
  if (fixed_sigma && !(*fixed_sigma > 0 && *fixed_sigma < 1)) {
    throw InvalidParameter("fixed sigma must lie in (0,1)");
  }
  if (m_budget <= 0 || max_outer <= 0 || stagnation_window <= 0) {
    throw InvalidParameter("iteration budgets must be positive");
  }
  if (!(rho_floor > 0)) throw InvalidParameter("rho_floor must be positive");
  for (Scalar t : nested_grid_thresholds) {
    if (!(t > 0)) throw InvalidParameter("nested-grid thresholds must be positive");
  }
}

Scalar rho(Scalar gamma, Scalar /*delta*/, Scalar rho_floor) { return std::max(rho_floor, gamma); }

Scalar forcing_term(ForcingMode mode, int k, Scalar delta_i, Scalar eta_floor) {
  if (k < 0) throw InvalidParameter("forcing_term: negative iteration index");
  if (mode == ForcingMode::Constant) return eta_floor;
  return std::max(eta_floor, std::min(std::pow(10.0, -k - 1), std::sqrt(delta_i)));
}

Scalar update_sigma(Scalar sigma_prev, int implicit_steps, int m_budget, Scalar sigma_min,
                    Scalar sigma_max) {
  Scalar s = sigma_prev;
  if (implicit_steps > m_budget) {
    s *= 1.2;
  } else if (implicit_steps <= 0.75 * m_budget) {
    s *= 0.9;
  }
  return std::clamp(s, sigma_min, sigma_max);
}

Scalar control_tolerance(Scalar gamma, Scalar rho_i) {
  return 1e-2 * gamma * rho_i;
}

bool termination_test(const std::vector<AcceptedPair>& history, const std::vector<Scalar>& sigmas,
                      Scalar kappa, Scalar beta, const CsrMatrix& h1_yy) {
  const std::size_t n = history.size();
  if (n < 3) return false;
  if (sigmas.size() + 1 < n) throw InvalidParameter("termination_test: missing sigma values");
  auto norm = [&](const Vector& y, const Vector& p) {
    const Vector ps = p / beta;
    return std::sqrt(y.dot(h1_yy * y) + ps.dot(h1_yy * ps));
  };
  const Scalar current = norm(history[n - 1].y, history[n - 1].p);
  if (current == 0) return false;
  for (std::size_t j = n - 3; j <= n - 2; ++j) {
    const Scalar step = norm(history[j + 1].y - history[j].y, history[j + 1].p - history[j].p);
    if (step > (1 - sigmas[j]) * kappa * current) return false;
  }
  return true;
}

namespace {

Vector transfer_interior(const MeshPtr& from, const Vector& interior, const MeshPtr& to) {
  return restrict_to_interior(*to, interpolate_nodal(from, extend_by_zero(*from, interior), to));
}

}  // namespace

PathResult run_path(const ProblemSpec& problem, MeshPtr mesh, const PathConfig& config,
                    const NewtonConfig& newton, const TraceCallback& on_row) {
  config.validate();
  newton.validate();
  problem.validate();

  PathResult result;
  result.disc = Discretization::build(mesh, problem);
  auto solver = std::make_unique<ImplicitControlSolver>(mesh);
  result.pair = StateAdjointPair::zeros(mesh);
  result.u = FeFunction::zeros(mesh, Space::Full);

  std::vector<AcceptedPair> history{{result.pair.y.coeffs, result.pair.p.coeffs}};
  std::vector<Scalar> sigmas;
  std::vector<Scalar> thresholds = config.nested_grid_thresholds;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  std::size_t next_threshold = 0;

  Scalar gamma = config.gamma0, delta = config.delta0, sigma = config.sigma0;
  auto fail = [&](const std::string& why) {
    result.status = PathStatus::Failed;
    result.failure = why;
    result.gamma_final = gamma;
    result.delta_final = delta;
    return result;
  };

  for (int i = 0; i < config.max_outer; ++i) {
    while (next_threshold < thresholds.size() && gamma < thresholds[next_threshold]) {
      const MeshPtr fine = refine_uniform(result.disc->mesh);
      const MeshPtr& coarse = result.disc->mesh;
      result.pair = {{Space::Interior, transfer_interior(coarse, result.pair.y.coeffs, fine), fine},
                     {Space::Interior, transfer_interior(coarse, result.pair.p.coeffs, fine), fine}};
      result.u = {Space::Full, interpolate_nodal(coarse, result.u.coeffs, fine), fine};
      for (auto& h : history) {
        h.y = transfer_interior(coarse, h.y, fine);
        h.p = transfer_interior(coarse, h.p, fine);
      }
      result.disc = Discretization::build(fine, problem);
      solver = std::make_unique<ImplicitControlSolver>(fine);
      ++next_threshold;
    }
    const Discretization& disc = *result.disc;

    const SmoothingParams params{gamma, delta, problem.beta};
    const Scalar rho_i = rho(gamma, delta, config.rho_floor);
    const Scalar ctol = control_tolerance(gamma, rho_i);
    PathTraceRow row;
    row.i = i;
    row.gamma = gamma;
    row.delta = delta;
    row.rho = rho_i;
    row.dofs = disc.mesh->num_vertices();

    const StateAdjointPair previous = result.pair;
    const FeFunction u_previous = result.u;
    FEvaluation eval;
    try {
      eval = eval_F(disc, *solver, result.pair, params, result.u, ctol, newton.control_max_iter);
      row.control_steps += eval.control.newton_steps;
      row.control_energy_monotone = energy_history_monotone(eval.control.energy_history);

      Scalar best = eval.norm;
      int since_best = 0;
      for (int k = 0; eval.norm > rho_i; ++k) {
        if (k >= newton.max_outer) {
          std::ostringstream msg;
          msg << "inner Newton loop hit " << newton.max_outer << " steps at gamma=" << gamma;
          throw Error(msg.str());
        }
        const Scalar eta = forcing_term(newton.forcing_mode, k, delta, newton.eta_floor);
        NewtonStepResult step = newton_step(result.disc, *solver, result.pair, eval, eta, newton,
                                            params, rho_i, ctol);
        row.newton_steps += 1;
        row.control_steps += step.report.control_steps;
        row.full_steps += step.report.step_length == 1 ? 1 : 0;
        row.max_gmres_iterations = std::max(row.max_gmres_iterations, step.report.gmres_iterations);
        row.control_energy_monotone =
            row.control_energy_monotone && energy_history_monotone(step.eval.control.energy_history);
        result.pair = std::move(step.pair);
        eval = std::move(step.eval);
        if (eval.norm < best) {
          best = eval.norm;
          since_best = 0;
        } else if (++since_best >= config.stagnation_window) {
          std::ostringstream msg;
          msg << "inner Newton loop stagnated at gamma=" << gamma << " (residual " << eval.norm << ")";
          throw Error(msg.str());
        }
      }
    } catch (const Error& e) {
      result.total_newton_steps += row.newton_steps;
      result.total_control_steps += row.control_steps;
      return fail(e.what());
    }
    result.u = eval.u;
    row.residual = eval.norm;

    if (config.fixed_sigma) {
      sigma = *config.fixed_sigma;
    } else if (i > 0) {
      sigma = update_sigma(sigma, row.control_steps, config.m_budget, config.sigma_min,
                           config.sigma_max);
    }
    row.sigma = sigma;
    history.push_back({result.pair.y.coeffs, result.pair.p.coeffs});
    sigmas.push_back(sigma);

    row.objective = objective_value(disc, problem, result.u, params);
    const auto [tau, tau_u] =
        compute_tau(disc, result.pair, previous, result.u, u_previous, problem.beta);
    row.tau = tau;
    row.tau_u = tau_u;
    if (problem.exact && config.trace_errors) {
      const ErrorReport err = compute_errors(result.u, result.pair.y, result.pair.p, row.objective,
                                             *problem.exact);
      row.e_j = err.e_j;
      row.e_u = err.e_u;
      row.e_y = err.e_y;
      row.e_p = err.e_p;
    }

    result.total_newton_steps += row.newton_steps;
    result.total_control_steps += row.control_steps;
    result.total_full_steps += row.full_steps;
    result.max_gmres_iterations = std::max(result.max_gmres_iterations, row.max_gmres_iterations);
    result.control_energy_monotone = result.control_energy_monotone && row.control_energy_monotone;
    result.residuals_within_rho = result.residuals_within_rho && row.residual <= rho_i;
    result.trace.push_back(row);
    if (on_row) on_row(row);

    result.gamma_final = gamma;
    result.delta_final = delta;
    if (termination_test(history, sigmas, config.kappa, problem.beta, disc.h1_yy)) {
      result.status = PathStatus::Terminated;
      return result;
    }
    gamma *= sigma;
    delta *= sigma;
  }
  result.status = PathStatus::MaxOuter;
  result.failure = "path-following reached max_outer without meeting the termination test";
  return result;
}

}  // namespace tvpath
