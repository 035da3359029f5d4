#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "tvpath/fem_assembly.hpp"
#include "tvpath/sparse_linalg.hpp"

namespace tvpath {

struct ControlSolveReport {
  int newton_steps = 0;
  Scalar final_residual_norm = 0;
  bool converged = false;
  int line_search_backtracks = 0;
  /// Energy at the start and after every accepted step.
  std::vector<Scalar> energy_history;
  /// Dual residual norm at the start and after every accepted step.
  std::vector<Scalar> residual_history;
};

class ControlNoConvergence : public Error {
 public:
  ControlNoConvergence(const std::string& what, FeFunction best, ControlSolveReport report)
      : Error(what), best_(std::move(best)), report_(std::move(report)) {}

  const FeFunction& best() const { return best_; }
  const ControlSolveReport& report() const { return report_; }

 private:
  FeFunction best_;
  ControlSolveReport report_;
};

/// Relative rounding level below which energy differences are not resolved.
inline constexpr Scalar kEnergyRoundoff = 1e-13;

/// True if the energy history never increases beyond rounding.
bool energy_history_monotone(const std::vector<Scalar>& history);

/// Damped Newton solver for the implicit control u_h(p): the minimizer of
/// beta psi_delta_h(u) + gamma/2 ||u||_{H^1}^2 - (p, u) over V_h.
///
/// Keeps the symbolic Cholesky analysis of the Jacobian pattern between solves on one mesh.
class ImplicitControlSolver {
 public:
  explicit ImplicitControlSolver(MeshPtr mesh);

  /// Converges when the lumped-mass dual norm of the residual is <= tol. Newton steps use
  /// Armijo backtracking (slope 1e-4, halving) on the energy. Throws ControlNoConvergence.
  std::pair<FeFunction, ControlSolveReport> solve(const FeFunction& p_rhs,
                                                  const SmoothingParams& params,
                                                  const std::optional<FeFunction>& warm_start,
                                                  Scalar tol, int max_iter = 200);

  const MeshPtr& mesh() const { return mesh_; }

 private:
  MeshPtr mesh_;
  Vector lumped_;
  SpdFactorization jacobian_factor_;
};

std::pair<FeFunction, ControlSolveReport> solve_implicit_control(
    const FeFunction& p_rhs, const SmoothingParams& params,
    const std::optional<FeFunction>& warm_start, Scalar tol, int max_iter = 200);

/// z = u_h'(p) d, the solution of J(u_h(p)) z = M d with the control Jacobian J.
class ControlDerivative {
 public:
  ControlDerivative(const FeFunction& u_at_p, const SmoothingParams& params,
                    std::shared_ptr<const CsrMatrix> mass);

  /// d and the result are full-space coefficient vectors.
  Vector apply(const Vector& d) const;

 private:
  std::shared_ptr<const CsrMatrix> mass_;
  SpdFactorization factor_;
};

FeFunction apply_control_derivative(const FeFunction& u_at_p, const FeFunction& d,
                                    const SmoothingParams& params);

}  // namespace tvpath
