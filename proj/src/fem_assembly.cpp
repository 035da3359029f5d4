#include "tvpath/fem_assembly.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <vector>

#include "tvpath/smoothed_tv.hpp"

namespace tvpath {

namespace {

using LocalMatrix = Eigen::Matrix3d;

Index dof(const TriMesh& mesh, Space space, Index vertex) {
  return space == Space::Full ? vertex : mesh.interior_index(vertex);
}

template <typename LocalFn>
CsrMatrix assemble_bilinear(const TriMesh& mesh, Space row_space, Space col_space, LocalFn&& local) {
  std::vector<Eigen::Triplet<Scalar, Index>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.num_triangles()) * 9);
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const LocalMatrix m = local(t);
    for (int a = 0; a < 3; ++a) {
      const Index row = dof(mesh, row_space, tri[a]);
      if (row < 0) continue;
      for (int b = 0; b < 3; ++b) {
        const Index col = dof(mesh, col_space, tri[b]);
        if (col < 0) continue;
        triplets.emplace_back(row, col, m(a, b));
      }
    }
  }
  CsrMatrix out(space_dimension(mesh, row_space), space_dimension(mesh, col_space));
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

LocalMatrix local_mass(Scalar area) {
  LocalMatrix m = LocalMatrix::Constant(1.0);
  m.diagonal().setConstant(2.0);
  return (area / 12.0) * m;
}

Eigen::Vector3d local_coeffs(const TriMesh& mesh, Index t, const Vector& full) {
  const auto& tri = mesh.triangles()[t];
  return {full[tri[0]], full[tri[1]], full[tri[2]]};
}

void require_full(const FeFunction& f, const char* what) {
  if (f.space != Space::Full) throw InvalidParameter(std::string(what) + " must live on V_h");
  f.validate();
}

// Barycentric coordinates of the symmetric degree-2 rule; each point has weight 1/3.
constexpr Scalar kGauss3[3][3] = {
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0},
};

}  // namespace

Index space_dimension(const TriMesh& mesh, Space space) {
  return space == Space::Full ? mesh.num_vertices() : mesh.num_interior();
}

FeFunction FeFunction::zeros(MeshPtr mesh, Space space) {
  const Index n = space_dimension(*mesh, space);
  return FeFunction{space, Vector::Zero(n), std::move(mesh)};
}

FeFunction FeFunction::constant(MeshPtr mesh, Scalar value) {
  const Index n = mesh->num_vertices();
  return FeFunction{Space::Full, Vector::Constant(n, value), std::move(mesh)};
}

void FeFunction::validate() const {
  if (!mesh) throw InvalidParameter("FeFunction without mesh");
  if (coeffs.size() != space_dimension(*mesh, space)) {
    throw MeshMismatch("FeFunction coefficient length does not match its space");
  }
  if (!coeffs.allFinite()) throw InvalidParameter("FeFunction has non-finite coefficients");
}

Vector extend_by_zero(const TriMesh& mesh, const Vector& interior) {
  if (interior.size() != mesh.num_interior()) throw MeshMismatch("extend_by_zero: size mismatch");
  Vector full = Vector::Zero(mesh.num_vertices());
  const auto& ids = mesh.interior_vertices();
  for (Index i = 0; i < mesh.num_interior(); ++i) full[ids[i]] = interior[i];
  return full;
}

Vector restrict_to_interior(const TriMesh& mesh, const Vector& full) {
  if (full.size() != mesh.num_vertices()) throw MeshMismatch("restrict_to_interior: size mismatch");
  Vector interior(mesh.num_interior());
  const auto& ids = mesh.interior_vertices();
  for (Index i = 0; i < mesh.num_interior(); ++i) interior[i] = full[ids[i]];
  return interior;
}

FeFunction to_full_space(const FeFunction& f) {
  if (f.space == Space::Full) return f;
  return FeFunction{Space::Full, extend_by_zero(*f.mesh, f.coeffs), f.mesh};
}

void SmoothingParams::validate() const {
  if (!(gamma > 0) || !(delta > 0) || !(beta > 0)) {
    throw InvalidParameter("smoothing parameters gamma, delta, beta must be positive");
  }
}

LocalGradients local_gradients(const TriMesh& mesh, Index t) {
  const auto& tri = mesh.triangles()[t];
  const auto& x0 = mesh.vertices()[tri[0]];
  Eigen::Matrix2d jac;
  jac.col(0) = mesh.vertices()[tri[1]] - x0;
  jac.col(1) = mesh.vertices()[tri[2]] - x0;
  const Eigen::Matrix2d inv = jac.inverse();
  LocalGradients g;
  g.col(1) = inv.row(0).transpose();
  g.col(2) = inv.row(1).transpose();
  g.col(0) = -g.col(1) - g.col(2);
  return g;
}

Point2 triangle_gradient(const TriMesh& mesh, Index t, const Vector& full_coeffs) {
  return local_gradients(mesh, t) * local_coeffs(mesh, t, full_coeffs);
}

CsrMatrix assemble_mass(const TriMesh& mesh, Space row_space, Space col_space) {
  return assemble_bilinear(mesh, row_space, col_space,
                           [&](Index t) { return local_mass(mesh.triangle_area(t)); });
}

CsrMatrix assemble_stiffness(const TriMesh& mesh, Space row_space, Space col_space) {
  return assemble_bilinear(mesh, row_space, col_space, [&](Index t) -> LocalMatrix {
    const auto g = local_gradients(mesh, t);
    return mesh.triangle_area(t) * (g.transpose() * g);
  });
}

Vector lumped_mass(const TriMesh& mesh) {
  Vector d = Vector::Zero(mesh.num_vertices());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const Scalar third = mesh.triangle_area(t) / 3.0;
    for (Index v : mesh.triangles()[t]) d[v] += third;
  }
  return d;
}

StateCoefficients StateCoefficients::laplacian() {
  return {[](const Point2&) { return Eigen::Matrix2d::Identity().eval(); },
          [](const Point2&) { return 0.0; }};
}

CsrMatrix assemble_state_operator(const TriMesh& mesh, const StateCoefficients& coeffs) {
  return assemble_bilinear(mesh, Space::Interior, Space::Interior, [&](Index t) -> LocalMatrix {
    const Point2 c = mesh.centroid(t);
    const Eigen::Matrix2d a = coeffs.diffusion(c);
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-14 * std::max(1.0, a.cwiseAbs().maxCoeff()) ||
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(a).eigenvalues().minCoeff() <= 0) {
      throw NotPositiveDefinite("state operator diffusion coefficient is not symmetric positive definite");
    }
    const Scalar c0 = coeffs.reaction(c);
    if (c0 < 0) throw InvalidParameter("state operator reaction coefficient must be non-negative");
    const auto g = local_gradients(mesh, t);
    const Scalar area = mesh.triangle_area(t);
    return area * (g.transpose() * a * g) + c0 * local_mass(area);
  });
}

CsrMatrix assemble_h1_matrix(const TriMesh& mesh) {
  return assemble_bilinear(mesh, Space::Full, Space::Full, [&](Index t) -> LocalMatrix {
    const auto g = local_gradients(mesh, t);
    const Scalar area = mesh.triangle_area(t);
    return area * (g.transpose() * g) + local_mass(area);
  });
}

Vector assemble_control_residual(const FeFunction& u, const FeFunction& p_rhs,
                                 const SmoothingParams& params) {
  require_full(u, "control");
  require_full(p_rhs, "control right-hand side");
  if (u.mesh != p_rhs.mesh) throw MeshMismatch("control residual: functions on different meshes");
  const TriMesh& mesh = *u.mesh;
  Vector r = Vector::Zero(mesh.num_vertices());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const auto g = local_gradients(mesh, t);
    const Scalar area = mesh.triangle_area(t);
    const Eigen::Vector3d ut = local_coeffs(mesh, t, u.coeffs);
    const Eigen::Vector3d pt = local_coeffs(mesh, t, p_rhs.coeffs);
    const Point2 grad = g * ut;
    const Point2 flux = params.gamma * grad + eval_f<Scalar>(grad, params.delta, params.beta);
    const Eigen::Vector3d local =
        area * (g.transpose() * flux) + local_mass(area) * (params.gamma * ut - pt);
    for (int a = 0; a < 3; ++a) r[tri[a]] += local[a];
  }
  return r;
}

CsrMatrix assemble_control_jacobian(const FeFunction& u, const SmoothingParams& params) {
  require_full(u, "control");
  const TriMesh& mesh = *u.mesh;
  return assemble_bilinear(mesh, Space::Full, Space::Full, [&](Index t) -> LocalMatrix {
    const auto g = local_gradients(mesh, t);
    const Scalar area = mesh.triangle_area(t);
    const Point2 grad = g * local_coeffs(mesh, t, u.coeffs);
    const Eigen::Matrix2d coeff = params.gamma * Eigen::Matrix2d::Identity() +
                                  eval_fprime<Scalar>(grad, params.delta, params.beta);
    return area * (g.transpose() * coeff * g) + params.gamma * local_mass(area);
  });
}

Scalar psi_delta_h(const FeFunction& u, Scalar delta) {
  require_full(u, "psi_delta_h argument");
  if (delta < 0) throw InvalidParameter("psi_delta_h needs delta >= 0");
  const TriMesh& mesh = *u.mesh;
  Scalar sum = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    sum += mesh.triangle_area(t) * tv_density<Scalar>(triangle_gradient(mesh, t, u.coeffs), delta);
  }
  return sum;
}

Scalar energy(const FeFunction& u, const FeFunction& p_rhs, const SmoothingParams& params) {
  require_full(u, "control");
  require_full(p_rhs, "control right-hand side");
  const TriMesh& mesh = *u.mesh;
  Scalar tv = 0, h1 = 0, pairing = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = local_gradients(mesh, t);
    const Scalar area = mesh.triangle_area(t);
    const Eigen::Vector3d ut = local_coeffs(mesh, t, u.coeffs);
    const Eigen::Vector3d pt = local_coeffs(mesh, t, p_rhs.coeffs);
    const Point2 grad = g * ut;
    const LocalMatrix m = local_mass(area);
    tv += area * tv_density<Scalar>(grad, params.delta);
    h1 += area * grad.squaredNorm() + ut.dot(m * ut);
    pairing += pt.dot(m * ut);
  }
  return params.beta * tv + 0.5 * params.gamma * h1 - pairing;
}

Vector assemble_load(const TriMesh& mesh, const ScalarField& g, Space target_space) {
  Vector full = Vector::Zero(mesh.num_vertices());
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Scalar w = mesh.triangle_area(t) / 3.0;
    for (const auto& lambda : kGauss3) {
      Point2 x = Point2::Zero();
      for (int a = 0; a < 3; ++a) x += lambda[a] * mesh.vertices()[tri[a]];
      const Scalar gx = g(x);
      for (int a = 0; a < 3; ++a) full[tri[a]] += w * gx * lambda[a];
    }
  }
  return target_space == Space::Full ? full : restrict_to_interior(mesh, full);
}

Scalar dual_norm(const Vector& r, const Vector& lumped_diag) {
  return std::sqrt((r.array().square() / lumped_diag.array()).sum());
}

}  // namespace tvpath
