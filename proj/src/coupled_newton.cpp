#include "tvpath/coupled_newton.hpp"

#include <cmath>
#include <sstream>

namespace tvpath {

std::shared_ptr<const Discretization> Discretization::build(MeshPtr mesh,
                                                            const ProblemSpec& problem) {
  problem.validate();
  auto d = std::make_shared<Discretization>();
  const TriMesh& m = *mesh;
  d->mesh = mesh;
  d->mass_vv = std::make_shared<const CsrMatrix>(assemble_mass(m, Space::Full, Space::Full));
  d->mass_yv = assemble_mass(m, Space::Interior, Space::Full);
  d->mass_yy = assemble_mass(m, Space::Interior, Space::Interior);
  d->state = assemble_state_operator(m, problem.pde);
  d->h1_vv = assemble_h1_matrix(m);
  d->h1_yy = assemble_stiffness(m, Space::Interior, Space::Interior) + d->mass_yy;
  d->lumped_v = lumped_mass(m);
  d->lumped_y = restrict_to_interior(m, d->lumped_v);
  d->load_y = assemble_load(m, problem.y_omega, Space::Interior);
  d->state_factor.factor(d->state);
  d->beta = problem.beta;
  return d;
}

StateAdjointPair StateAdjointPair::zeros(const MeshPtr& mesh) {
  return {FeFunction::zeros(mesh, Space::Interior), FeFunction::zeros(mesh, Space::Interior)};
}

void StateAdjointPair::validate() const {
  if (y.mesh != p.mesh) throw MeshMismatch("state and adjoint live on different meshes");
  if (y.space != Space::Interior || p.space != Space::Interior) {
    throw InvalidParameter("state and adjoint must be interior-space functions");
  }
  y.validate();
  p.validate();
}

void NewtonConfig::validate() const {
  if (!(eta_floor > 0)) throw InvalidParameter("eta_floor must be positive");
  if (!(tau > 0)) throw InvalidParameter("tau must be positive");
  if (max_outer <= 0 || max_halvings < 0 || gmres.max_iter <= 0 || control_max_iter <= 0) {
    throw InvalidParameter("Newton iteration limits must be positive");
  }
}

Scalar residual_norm(const Discretization& disc, const Residual& r) {
  return std::hypot(dual_norm(r.ry, disc.lumped_y), dual_norm(r.rp, disc.lumped_y));
}

Scalar step_norm(const Discretization& disc, const Vector& dy, const Vector& dp) {
  return std::sqrt(dy.dot(disc.mass_yy * dy) + dp.dot(disc.mass_yy * dp));
}

FEvaluation eval_F(const Discretization& disc, ImplicitControlSolver& solver,
                   const StateAdjointPair& pair, const SmoothingParams& params,
                   const std::optional<FeFunction>& warm_start, Scalar control_tol,
                   int control_max_iter) {
  if (pair.y.mesh != disc.mesh || pair.p.mesh != disc.mesh) {
    throw MeshMismatch("eval_F: pair and discretization differ in mesh");
  }
  const FeFunction minus_p{Space::Full, -extend_by_zero(*disc.mesh, pair.p.coeffs), disc.mesh};
  auto [u, report] = solver.solve(minus_p, params, warm_start, control_tol, control_max_iter);

  FEvaluation out;
  out.residual.ry = disc.state * pair.y.coeffs - disc.mass_yv * u.coeffs;
  out.residual.rp = disc.mass_yy * pair.y.coeffs - disc.load_y - disc.state.transpose() * pair.p.coeffs;
  out.norm = residual_norm(disc, out.residual);
  out.u = std::move(u);
  out.control = std::move(report);
  return out;
}

FPrime::FPrime(DiscretizationPtr disc, const FeFunction& u_cache, const SmoothingParams& params)
    : FPrime(std::move(disc), u_cache, params, true) {}

FPrime::FPrime(DiscretizationPtr disc, const FeFunction& u_cache, const SmoothingParams& params,
               bool include_control_block)
    : disc_(std::move(disc)) {
  if (include_control_block) derivative_.emplace(to_full_space(u_cache), params, disc_->mass_vv);
}

Residual FPrime::apply(const Vector& dy, const Vector& dp) const {
  Residual out;
  out.ry = disc_->state * dy;
  if (derivative_) {
    const Vector z = derivative_->apply(extend_by_zero(*disc_->mesh, dp));
    out.ry += disc_->mass_yv * z;
  }
  out.rp = disc_->mass_yy * dy - disc_->state.transpose() * dp;
  return out;
}

Residual apply_F_prime(const DiscretizationPtr& disc, const FeFunction& u_cache,
                       const StateAdjointPair& direction, const SmoothingParams& params) {
  direction.validate();
  return FPrime(disc, u_cache, params).apply(direction.y.coeffs, direction.p.coeffs);
}

std::pair<Vector, Vector> apply_preconditioner(const Discretization& disc, const Residual& rhs) {
  Vector dy = disc.state_factor.solve(rhs.ry);
  // A is symmetric, so B^T = B.
  Vector dp = disc.state_factor.solve(disc.mass_yy * dy - rhs.rp);
  return {std::move(dy), std::move(dp)};
}

NewtonStepResult newton_step(const DiscretizationPtr& disc, ImplicitControlSolver& solver,
                             const StateAdjointPair& pair, const FEvaluation& current,
                             Scalar eta, const NewtonConfig& config,
                             const SmoothingParams& params, Scalar rho,
                             Scalar control_tol) {
  if (!(eta > 0 && eta < 1)) throw InvalidParameter("forcing term must lie in (0,1)");
  const Discretization& d = *disc;
  const Index n = d.ny();
  const Vector scale = d.lumped_y.cwiseSqrt().cwiseInverse();

  // Scaled unknowns v = S w with S = diag(D^{-1/2}); Euclidean norms of scaled residuals are
  // lumped-mass dual norms.
  auto split = [n](const Vector& v) { return std::pair<Vector, Vector>{v.head(n), v.tail(n)}; };
  auto join = [n](const Vector& a, const Vector& b) {
    Vector v(2 * n);
    v << a, b;
    return v;
  };

  const FPrime jac(disc, current.u, params);
  LinearOperator op{2 * n, [&](const Vector& w) {
                      auto [dy, dp] = split(w);
                      const Residual r = jac.apply(dy, dp);
                      return join(scale.cwiseProduct(r.ry), scale.cwiseProduct(r.rp));
                    }};
  LinearOperator precond{2 * n, [&](const Vector& v) {
                           auto [a, b] = split(v);
                           const Residual r{a.cwiseQuotient(scale), b.cwiseQuotient(scale)};
                           auto [dy, dp] = apply_preconditioner(d, r);
                           return join(dy, dp);
                         }};
  const Vector rhs = -join(scale.cwiseProduct(current.residual.ry),
                           scale.cwiseProduct(current.residual.rp));
  const Scalar abs_tol = std::min(eta, 0.1 * rho);
  const GmresResult lin = gmres(op, rhs, precond, abs_tol, eta, config.gmres.max_iter);

  NewtonStepResult out;
  NewtonStepReport& rep = out.report;
  rep.gmres_iterations = lin.iterations;
  rep.gmres_converged = lin.converged;
  rep.gmres_residual = lin.residual;
  rep.residual_before = current.norm;

  const Vector dy = lin.x.head(n), dp = lin.x.tail(n);
  const Scalar dw_norm = step_norm(d, dy, dp);
  rep.step_norm = dw_norm;

  Scalar lambda = 1;
  for (int l = 0; l <= config.max_halvings; ++l, lambda *= 0.5) {
    StateAdjointPair trial{{Space::Interior, pair.y.coeffs + lambda * dy, d.mesh},
                           {Space::Interior, pair.p.coeffs + lambda * dp, d.mesh}};
    std::optional<FEvaluation> eval;
    try {
      eval = eval_F(d, solver, trial, params, current.u, control_tol, config.control_max_iter);
    } catch (const ControlNoConvergence& e) {
      rep.control_steps += e.report().newton_steps;
    }
    if (eval) {
      rep.control_steps += eval->control.newton_steps;
      const Scalar bound = (1 + 1.0 / ((l + 1.0) * (l + 1.0))) * current.norm -
                           config.tau * lambda * lambda * dw_norm * dw_norm;
      if (eval->norm <= bound) {
        rep.step_length = lambda;
        rep.backtracks = l;
        rep.residual_after = eval->norm;
        out.pair = std::move(trial);
        out.eval = std::move(*eval);
        return out;
      }
    }
  }
  std::ostringstream msg;
  msg << "line search failed after " << config.max_halvings << " halvings (residual "
      << current.norm << ", GMRES " << lin.iterations << " iterations, converged "
      << lin.converged << ")";
  throw LineSearchFailure(msg.str());
}

}  // namespace tvpath
