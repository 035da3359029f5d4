#pragma once

#include <functional>

#include "tvpath/mesh.hpp"
#include "tvpath/types.hpp"

namespace tvpath {

/// V_h is the full nodal P1 space, Y_h the subspace vanishing on the boundary.
enum class Space { Full, Interior };

Index space_dimension(const TriMesh& mesh, Space space);

/// Coefficient vector of a P1 function tagged with the space it lives in.
struct FeFunction {
  Space space = Space::Full;
  Vector coeffs;
  MeshPtr mesh;

  static FeFunction zeros(MeshPtr mesh, Space space);
  static FeFunction constant(MeshPtr mesh, Scalar value);

  /// Throws on length mismatch or non-finite entries.
  void validate() const;
};

/// Interior coefficients extended by zero to every vertex.
Vector extend_by_zero(const TriMesh& mesh, const Vector& interior);
Vector restrict_to_interior(const TriMesh& mesh, const Vector& full);
FeFunction to_full_space(const FeFunction& f);

struct SmoothingParams {
  Scalar gamma;
  Scalar delta;
  Scalar beta;

  void validate() const;
};

/// Triangle-constant gradients of the P1 basis: column k is grad(phi_k) of local vertex k.
using LocalGradients = Eigen::Matrix<Scalar, 2, 3>;
LocalGradients local_gradients(const TriMesh& mesh, Index t);

/// Per-triangle gradient of a full-space coefficient vector.
Point2 triangle_gradient(const TriMesh& mesh, Index t, const Vector& full_coeffs);

CsrMatrix assemble_mass(const TriMesh& mesh, Space row_space, Space col_space);
CsrMatrix assemble_stiffness(const TriMesh& mesh, Space row_space, Space col_space);

/// Diagonal of the row-sum lumped mass matrix over all vertices.
Vector lumped_mass(const TriMesh& mesh);

/// Coefficients of the elliptic state operator sum a_ij d_i y d_j phi + c0 y phi.
struct StateCoefficients {
  std::function<Eigen::Matrix2d(const Point2&)> diffusion;
  std::function<Scalar(const Point2&)> reaction;

  /// a_ij = delta_ij, c0 = 0.
  static StateCoefficients laplacian();
};

/// Y_h x Y_h matrix of the state operator with homogeneous Dirichlet conditions by index
/// reduction. Coefficients are sampled at triangle centroids (exact for constants).
CsrMatrix assemble_state_operator(const TriMesh& mesh, const StateCoefficients& coeffs);

/// V_h x V_h matrix of the full H^1 inner product, stiffness plus mass.
CsrMatrix assemble_h1_matrix(const TriMesh& mesh);

/// Residual of the implicit control equation, one entry per vertex:
/// (gamma grad u + f(grad u), grad phi_i) + gamma (u, phi_i) - (p_rhs, phi_i).
Vector assemble_control_residual(const FeFunction& u, const FeFunction& p_rhs,
                                 const SmoothingParams& params);

/// Derivative of assemble_control_residual with respect to u; symmetric positive definite.
CsrMatrix assemble_control_jacobian(const FeFunction& u, const SmoothingParams& params);

/// Discrete smoothed TV, sum_T |T| sqrt(delta + |grad u|_T|^2). delta = 0 gives TV.
Scalar psi_delta_h(const FeFunction& u, Scalar delta);

/// beta psi_delta_h(u) + gamma/2 ||u||_{H^1}^2 - (p_rhs, u), minimized by the implicit control.
Scalar energy(const FeFunction& u, const FeFunction& p_rhs, const SmoothingParams& params);

using ScalarField = std::function<Scalar(const Point2&)>;

/// Load vector (g, phi_i) with the symmetric 3-point degree-2 rule on each triangle.
Vector assemble_load(const TriMesh& mesh, const ScalarField& g, Space target_space);

/// sqrt(r^T D^{-1} r) for a dual vector r and a lumped mass diagonal D.
Scalar dual_norm(const Vector& r, const Vector& lumped_diag);

}  // namespace tvpath
