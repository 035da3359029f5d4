#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "tvpath/coupled_newton.hpp"
#include "tvpath/problems.hpp"

namespace tvpath {

struct PathConfig {
  Scalar gamma0 = 1;
  Scalar delta0 = 0.01;
  Scalar kappa = 1e-3;
  Scalar sigma0 = 0.45;
  Scalar sigma_min = 0.25;
  Scalar sigma_max = 0.9;
  int m_budget = 30;
  Scalar rho_floor = 1e-6;
  int max_outer = 400;
  /// Refine the mesh once gamma_i drops below each threshold.
  std::vector<Scalar> nested_grid_thresholds;
  /// Overrides the adaptive sigma policy when set.
  std::optional<Scalar> fixed_sigma;
  /// Inner loops without a residual reduction for this many steps abort the run.
  int stagnation_window = 50;
  /// Compute error columns on every trace row when an exact solution exists.
  bool trace_errors = true;

  /// delta_i = gamma_i / ratio; gamma0 / delta0 is the ratio.
  Scalar ratio() const { return gamma0 / delta0; }
  void validate() const;
};

struct PathTraceRow {
  int i = 0;
  Scalar gamma = 0;
  Scalar delta = 0;
  Scalar sigma = 0;
  int newton_steps = 0;
  int control_steps = 0;
  Scalar objective = 0;
  std::optional<Scalar> tau;
  std::optional<Scalar> tau_u;
  std::optional<Scalar> e_j;
  std::optional<Scalar> e_u;
  std::optional<Scalar> e_y;
  std::optional<Scalar> e_p;
  /// Accepted residual and the tolerance it met.
  Scalar residual = 0;
  Scalar rho = 0;
  Index dofs = 0;
  int full_steps = 0;
  int max_gmres_iterations = 0;
  bool control_energy_monotone = true;
};

Scalar rho(Scalar gamma, Scalar delta, Scalar rho_floor = 1e-6);

Scalar forcing_term(ForcingMode mode, int k, Scalar delta_i, Scalar eta_floor = 1e-6);

Scalar update_sigma(Scalar sigma_prev, int implicit_steps, int m_budget, Scalar sigma_min = 0.25,
                    Scalar sigma_max = 0.9);

/// Tolerance of the implicit-control solves during one outer iteration.
Scalar control_tolerance(Scalar gamma, Scalar rho_i);

/// One accepted iterate (y_j, p_j) as interior coefficient vectors.
struct AcceptedPair {
  Vector y;
  Vector p;
};

/// history holds w_0 .. w_{i+1}; sigmas holds sigma_0 .. sigma_i. True iff
/// ||w_{j+1} - w_j|| <= (1 - sigma_j) kappa ||w_{i+1}|| for j = i and j = i - 1, with the
/// H^1 norm on Y_h and the adjoint scaled by 1/beta.
bool termination_test(const std::vector<AcceptedPair>& history, const std::vector<Scalar>& sigmas,
                      Scalar kappa, Scalar beta, const CsrMatrix& h1_yy);

enum class PathStatus { Terminated, MaxOuter, Failed };

struct PathResult {
  PathStatus status = PathStatus::Failed;
  std::string failure;
  StateAdjointPair pair;
  FeFunction u;
  DiscretizationPtr disc;
  std::vector<PathTraceRow> trace;
  Scalar gamma_final = 0;
  Scalar delta_final = 0;
  int total_newton_steps = 0;
  int total_control_steps = 0;
  int total_full_steps = 0;
  int max_gmres_iterations = 0;
  /// Every implicit-control energy history of the run was non-increasing.
  bool control_energy_monotone = true;
  /// Every accepted residual met its tolerance.
  bool residuals_within_rho = true;
};

using TraceCallback = std::function<void(const PathTraceRow&)>;

/// Algorithm: path-following in (gamma, delta) with inexact Newton inner loops. Solver
/// failures are returned with status Failed and the trace so far, not thrown.
PathResult run_path(const ProblemSpec& problem, MeshPtr mesh, const PathConfig& config,
                    const NewtonConfig& newton, const TraceCallback& on_row = {});

}  // namespace tvpath
