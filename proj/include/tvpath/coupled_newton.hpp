#pragma once

#include <memory>
#include <optional>

#include "tvpath/fem_assembly.hpp"
#include "tvpath/implicit_control.hpp"
#include "tvpath/problems.hpp"
#include "tvpath/sparse_linalg.hpp"

namespace tvpath {

/// Assembled operators of one problem on one mesh. Y_h blocks are interior-by-interior.
struct Discretization {
  MeshPtr mesh;
  std::shared_ptr<const CsrMatrix> mass_vv;
  CsrMatrix mass_yv;
  CsrMatrix mass_yy;
  CsrMatrix state;      // A on Y_h
  CsrMatrix h1_vv;      // stiffness + mass on V_h
  CsrMatrix h1_yy;      // stiffness + mass on Y_h
  Vector lumped_v;
  Vector lumped_y;
  Vector load_y;        // (y_Omega, phi_i) for interior i
  SpdFactorization state_factor;
  Scalar beta = 0;

  static std::shared_ptr<const Discretization> build(MeshPtr mesh, const ProblemSpec& problem);

  Index ny() const { return static_cast<Index>(lumped_y.size()); }
};

using DiscretizationPtr = std::shared_ptr<const Discretization>;

struct StateAdjointPair {
  FeFunction y;
  FeFunction p;

  static StateAdjointPair zeros(const MeshPtr& mesh);
  /// Throws MeshMismatch or InvalidParameter if the invariants fail.
  void validate() const;
};

enum class ForcingMode { Constant, Adaptive };

struct GmresSettings {
  int max_iter = 400;
};

struct NewtonConfig {
  ForcingMode forcing_mode = ForcingMode::Adaptive;
  Scalar eta_floor = 1e-6;
  Scalar tau = 1e-4;
  int max_outer = 200;
  int max_halvings = 30;
  GmresSettings gmres;
  int control_max_iter = 200;

  void validate() const;
};

/// Both residual blocks are dual vectors on Y_h.
struct Residual {
  Vector ry;
  Vector rp;
};

/// ||(ry, rp)|| with both blocks in the lumped-mass dual norm.
Scalar residual_norm(const Discretization& disc, const Residual& r);

/// sqrt(dy^T M dy + dp^T M dp), the step size measure of the line search.
Scalar step_norm(const Discretization& disc, const Vector& dy, const Vector& dp);

struct FEvaluation {
  Residual residual;
  Scalar norm = 0;
  FeFunction u;  // u_h(-p)
  ControlSolveReport control;
};

/// Evaluates F_h at the pair; the implicit control is solved for -p to control_tol.
FEvaluation eval_F(const Discretization& disc, ImplicitControlSolver& solver,
                   const StateAdjointPair& pair, const SmoothingParams& params,
                   const std::optional<FeFunction>& warm_start, Scalar control_tol,
                   int control_max_iter = 200);

/// Linearization of F_h at a pair with its control u_h(-p). Factorizes the control Jacobian
/// once; every apply costs one solve with it.
class FPrime {
 public:
  FPrime(DiscretizationPtr disc, const FeFunction& u_cache, const SmoothingParams& params);
  /// With include_control_block = false the u_h' block is dropped (linear surrogate).
  FPrime(DiscretizationPtr disc, const FeFunction& u_cache, const SmoothingParams& params,
         bool include_control_block);

  Residual apply(const Vector& dy, const Vector& dp) const;

 private:
  DiscretizationPtr disc_;
  std::optional<ControlDerivative> derivative_;
};

Residual apply_F_prime(const DiscretizationPtr& disc, const FeFunction& u_cache,
                       const StateAdjointPair& direction, const SmoothingParams& params);

/// (dy, dp) = (B r1, B (M B r1 - r2)) with B = A^{-1}; exact inverse of F_h' without the
/// control block.
std::pair<Vector, Vector> apply_preconditioner(const Discretization& disc, const Residual& rhs);

struct NewtonStepReport {
  Scalar step_length = 0;
  int gmres_iterations = 0;
  bool gmres_converged = false;
  Scalar gmres_residual = 0;
  int backtracks = 0;
  /// Implicit-control Newton steps spent on line-search evaluations.
  int control_steps = 0;
  Scalar residual_before = 0;
  Scalar residual_after = 0;
  Scalar step_norm = 0;
};

class LineSearchFailure : public Error {
 public:
  using Error::Error;
};

struct NewtonStepResult {
  StateAdjointPair pair;
  FEvaluation eval;
  NewtonStepReport report;
};

/// One inexact Newton step from pair with current evaluation `current`. GMRES runs on the
/// right-preconditioned system scaled so its Euclidean residual equals the dual norm, and
/// stops at max(eta ||F||, min(eta, 0.1 rho)). The step length is the first 2^{-l}
/// passing the non-monotone test. Throws LineSearchFailure after max_halvings.
NewtonStepResult newton_step(const DiscretizationPtr& disc, ImplicitControlSolver& solver,
                             const StateAdjointPair& pair, const FEvaluation& current,
                             Scalar eta, const NewtonConfig& config,
                             const SmoothingParams& params, Scalar rho,
                             Scalar control_tol);

}  // namespace tvpath
