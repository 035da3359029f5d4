#include "tvpath/implicit_control.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace tvpath {

namespace {

constexpr Scalar kArmijoSlope = 1e-4;
constexpr int kMaxHalvings = 50;
// Residuals below this fraction of the right-hand side size are rounding noise.
constexpr Scalar kResidualRoundoff = std::numeric_limits<Scalar>::epsilon();

}  // namespace

bool energy_history_monotone(const std::vector<Scalar>& history) {
  for (std::size_t k = 1; k < history.size(); ++k) {
    const Scalar slack = kEnergyRoundoff * std::max<Scalar>(1, std::abs(history[k - 1]));
    if (history[k] > history[k - 1] + slack) return false;
  }
  return true;
}

ImplicitControlSolver::ImplicitControlSolver(MeshPtr mesh)
    : mesh_(std::move(mesh)), lumped_(lumped_mass(*mesh_)) {}

std::pair<FeFunction, ControlSolveReport> ImplicitControlSolver::solve(
    const FeFunction& p_rhs, const SmoothingParams& params,
    const std::optional<FeFunction>& warm_start, Scalar tol, int max_iter) {
  params.validate();
  if (!(tol > 0)) throw InvalidParameter("implicit control tolerance must be positive");
  if (p_rhs.mesh != mesh_) throw MeshMismatch("implicit control: right-hand side on another mesh");
  p_rhs.validate();

  FeFunction u = warm_start ? to_full_space(*warm_start) : FeFunction::zeros(mesh_, Space::Full);
  if (u.mesh != mesh_) throw MeshMismatch("implicit control: warm start on another mesh");
  u.validate();

  ControlSolveReport report;
  Vector r = assemble_control_residual(u, p_rhs, params);
  Scalar rnorm = dual_norm(r, lumped_);
  Scalar e = energy(u, p_rhs, params);
  report.energy_history.push_back(e);
  report.residual_history.push_back(rnorm);

  // Below the rounding level of the residual the residual no longer measures the error, so
  // full Newton steps are taken until the step itself is below tol / gamma, the error bound
  // implied by the residual tolerance and the lower bound gamma of the Jacobian.
  const Scalar step_tol = tol / params.gamma;
  Scalar previous_step = std::numeric_limits<Scalar>::infinity();
  while (rnorm > tol) {
    const CsrMatrix jacobian = assemble_control_jacobian(u, params);
    const Vector magnitude = jacobian.cwiseAbs() * u.coeffs.cwiseAbs();
    const Scalar noise = kResidualRoundoff * dual_norm(magnitude, lumped_);
    if (report.newton_steps >= max_iter) {
      if (rnorm <= noise) break;
      report.final_residual_norm = rnorm;
      std::ostringstream msg;
      msg << "implicit control did not converge in " << max_iter << " Newton steps (residual "
          << rnorm << ", tolerance " << tol << ")";
      throw ControlNoConvergence(msg.str(), u, report);
    }

    jacobian_factor_.factor(jacobian);
    const Vector direction = -jacobian_factor_.solve(r);
    if (rnorm <= noise) {
      const Scalar step_size = std::sqrt(direction.dot(lumped_.cwiseProduct(direction)));
      if (step_size > 0.5 * previous_step) break;
      u.coeffs += direction;
      e = energy(u, p_rhs, params);
      r = assemble_control_residual(u, p_rhs, params);
      rnorm = dual_norm(r, lumped_);
      ++report.newton_steps;
      report.energy_history.push_back(e);
      report.residual_history.push_back(rnorm);
      if (step_size <= step_tol) break;
      previous_step = step_size;
      continue;
    }
    const Scalar slope = r.dot(direction);
    const Scalar scale = std::abs(e) + params.beta * psi_delta_h(u, params.delta);

    Scalar step = 1;
    FeFunction trial = u;
    Vector trial_r;
    Scalar trial_e = 0;
    bool accepted = false;
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      trial.coeffs = u.coeffs + step * direction;
      trial_r.resize(0);
      trial_e = energy(trial, p_rhs, params);
      if (trial_e <= e + kArmijoSlope * step * slope) {
        accepted = true;
      } else if (kArmijoSlope * step * std::abs(slope) <= kEnergyRoundoff * scale &&
                 trial_e <= e + kEnergyRoundoff * scale) {
        // The predicted decrease is below rounding; fall back to residual reduction.
        trial_r = assemble_control_residual(trial, p_rhs, params);
        accepted = dual_norm(trial_r, lumped_) < rnorm;
      }
      if (accepted) break;
      step *= 0.5;
      ++report.line_search_backtracks;
    }
    if (!accepted) {
      report.final_residual_norm = rnorm;
      throw ControlNoConvergence("implicit control line search failed", u, report);
    }

    u = std::move(trial);
    e = trial_e;
    r = trial_r.size() ? std::move(trial_r) : assemble_control_residual(u, p_rhs, params);
    rnorm = dual_norm(r, lumped_);
    ++report.newton_steps;
    report.energy_history.push_back(e);
    report.residual_history.push_back(rnorm);
  }

  report.final_residual_norm = rnorm;
  report.converged = true;
  return {std::move(u), std::move(report)};
}

std::pair<FeFunction, ControlSolveReport> solve_implicit_control(
    const FeFunction& p_rhs, const SmoothingParams& params,
    const std::optional<FeFunction>& warm_start, Scalar tol, int max_iter) {
  ImplicitControlSolver solver(p_rhs.mesh);
  return solver.solve(p_rhs, params, warm_start, tol, max_iter);
}

ControlDerivative::ControlDerivative(const FeFunction& u_at_p, const SmoothingParams& params,
                                     std::shared_ptr<const CsrMatrix> mass)
    : mass_(std::move(mass)), factor_(assemble_control_jacobian(u_at_p, params)) {}

Vector ControlDerivative::apply(const Vector& d) const { return factor_.solve(*mass_ * d); }

FeFunction apply_control_derivative(const FeFunction& u_at_p, const FeFunction& d,
                                    const SmoothingParams& params) {
  const FeFunction d_full = to_full_space(d);
  if (d_full.mesh != u_at_p.mesh) throw MeshMismatch("control derivative: direction on another mesh");
  auto mass = std::make_shared<const CsrMatrix>(assemble_mass(*u_at_p.mesh, Space::Full, Space::Full));
  ControlDerivative derivative(u_at_p, params, std::move(mass));
  return FeFunction{Space::Full, derivative.apply(d_full.coeffs), u_at_p.mesh};
}

}  // namespace tvpath
