#pragma once

#include <array>
#include <memory>
#include <optional>
#include <vector>

#include "tvpath/types.hpp"

namespace tvpath {

/// Curved boundary description used to snap new boundary vertices during refinement.
struct AnnulusBoundary {
  Scalar inner_radius;
  Scalar outer_radius;
};

/// Conforming triangulation of a planar domain with P1 degree-of-freedom bookkeeping.
///
/// Immutable after construction. Vertices on the boundary are flagged; the interior
/// vertices (in increasing vertex order) define the Dirichlet space Y_h.
class TriMesh {
 public:
  using Triangle = std::array<Index, 3>;

  TriMesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
          std::optional<AnnulusBoundary> curved_boundary = std::nullopt,
          std::shared_ptr<const TriMesh> parent = nullptr);

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<bool>& boundary_flags() const { return boundary_; }
  const std::shared_ptr<const TriMesh>& parent() const { return parent_; }
  const std::optional<AnnulusBoundary>& curved_boundary() const { return curved_; }

  Index num_vertices() const { return static_cast<Index>(vertices_.size()); }
  Index num_triangles() const { return static_cast<Index>(triangles_.size()); }
  Index num_interior() const { return static_cast<Index>(interior_.size()); }

  /// Interior vertex ids, ordered; position in this list is the Y_h index.
  const std::vector<Index>& interior_vertices() const { return interior_; }
  /// Y_h index of a vertex, or -1 for boundary vertices.
  Index interior_index(Index vertex) const { return to_interior_[vertex]; }

  /// Maximal triangle diameter.
  Scalar h() const { return h_; }
  /// Sum of triangle areas.
  Scalar area() const { return area_; }

  Scalar triangle_area(Index t) const;
  Point2 centroid(Index t) const;

  /// Throws Error if any structural invariant is violated.
  void check_invariants() const;

 private:
  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<bool> boundary_;
  std::optional<AnnulusBoundary> curved_;
  std::shared_ptr<const TriMesh> parent_;
  std::vector<Index> interior_;
  std::vector<Index> to_interior_;
  Scalar h_ = 0;
  Scalar area_ = 0;
};

using MeshPtr = std::shared_ptr<const TriMesh>;

/// Structured polar mesh of {inner_radius < |x| < outer_radius}: n_rings radial layers,
/// n_sectors angular cells, every quad split into two triangles.
MeshPtr make_annulus_mesh(Scalar inner_radius, Scalar outer_radius, int n_rings, int n_sectors);

/// Uniform mesh of [-1,1]^2 with n cells per direction, diagonals all running south-west to
/// north-east.
MeshPtr make_square_mesh(int n);

/// Red refinement: every triangle split into four by its edge midpoints. Midpoints of
/// boundary edges on a curved boundary are projected onto the circle.
MeshPtr refine_uniform(const MeshPtr& mesh);

struct PointLocation {
  Index triangle;
  Eigen::Vector3d barycentric;
};

/// Bucket-grid accelerated point location.
class PointLocator {
 public:
  explicit PointLocator(MeshPtr mesh);

  /// Throws PointOutsideMesh if no triangle contains x up to 1e-10.
  PointLocation locate(const Point2& x) const;
  std::optional<PointLocation> try_locate(const Point2& x) const;

  const TriMesh& mesh() const { return *mesh_; }

 private:
  MeshPtr mesh_;
  Point2 lower_;
  Scalar cell_ = 1;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<Index> offsets_;
  std::vector<Index> entries_;
};

PointLocation locate_point(const MeshPtr& mesh, const Point2& x);

/// Barycentric coordinates of x in triangle t.
Eigen::Vector3d barycentric(const TriMesh& mesh, Index t, const Point2& x);

/// Nodal interpolation of a P1 vertex vector given on `from` onto the vertices of `to`.
/// Vertices of `to` outside `from` (curved-boundary slivers) use the nearest triangle.
Vector interpolate_nodal(const MeshPtr& from, const Vector& values, const MeshPtr& to);

}  // namespace tvpath
