#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "tvpath/coupled_newton.hpp"
#include "tvpath/path_following.hpp"
#include "tvpath/problems.hpp"

namespace tvpath {

enum class ReferenceKind { Exact, FineGrid };

struct ErrorReport {
  Scalar e_j = 0;
  Scalar e_u = 0;     // L1
  Scalar e_u_l2 = 0;  // L2, used for fine-grid comparisons
  Scalar e_y = 0;     // H1
  Scalar e_p = 0;     // H1
  ReferenceKind reference_kind = ReferenceKind::Exact;
};

/// Integrates g(t, x) over the mesh with the symmetric 3-point degree-2 rule applied on the
/// 4^levels congruent sub-triangles of each triangle.
Scalar integrate_composite(const TriMesh& mesh, int levels,
                           const std::function<Scalar(Index, const Point2&)>& g);

/// Value of a full-space P1 coefficient vector at x inside triangle t.
Scalar eval_p1(const TriMesh& mesh, Index t, const Vector& full, const Point2& x);

/// Errors against the closed-form solution. u is a full-space function, y and p may be either.
/// levels_u refines the quadrature for the discontinuous control.
ErrorReport compute_errors(const FeFunction& u, const FeFunction& y, const FeFunction& p,
                           Scalar objective, const ExactSolution& exact, int levels_u = 3,
                           int levels = 1);

/// The fine-grid reference triple; all three on the same mesh.
struct FineReference {
  FeFunction u;
  FeFunction y;
  FeFunction p;
  Scalar objective = 0;
};

/// Errors against a fine-grid solution: coarse functions are interpolated onto the fine mesh
/// and the norms assembled there.
ErrorReport compute_errors(const FeFunction& u, const FeFunction& y, const FeFunction& p,
                           Scalar objective, const FineReference& reference);

/// (tau, tau_u): H^1 distance of (y, p / beta) between consecutive iterates, and L^2 distance
/// of the corresponding controls.
std::pair<Scalar, Scalar> compute_tau(const Discretization& disc, const StateAdjointPair& current,
                                      const StateAdjointPair& previous, const FeFunction& u_current,
                                      const FeFunction& u_previous, Scalar beta);

/// j_{gamma,delta,h}(u) = 1/2 ||S_h u - y_Omega||^2 + beta psi_delta_h(u) + gamma/2 ||u||_{H^1}^2
/// with the state re-solved for u.
Scalar objective_value(const Discretization& disc, const ProblemSpec& problem, const FeFunction& u,
                       const SmoothingParams& params);

/// Header-only file for an empty row list; missing metrics are empty cells.
void write_trace_csv(const std::string& path, const std::vector<PathTraceRow>& rows);

/// Legacy ASCII VTK unstructured grid with one POINT_DATA scalar per named function.
void write_field_vtk(const std::string& path, const TriMesh& mesh,
                     const std::vector<std::pair<std::string, FeFunction>>& fields);

/// Shortest decimal text that parses back to the same double.
std::string format_number(Scalar v);

}  // namespace tvpath
