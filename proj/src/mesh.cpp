#include "tvpath/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <utility>

namespace tvpath {

namespace {

constexpr Scalar kLocateTol = 1e-10;

Scalar signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
}

using Edge = std::pair<Index, Index>;

Edge make_edge(Index a, Index b) { return a < b ? Edge{a, b} : Edge{b, a}; }

std::map<Edge, int> edge_counts(const std::vector<TriMesh::Triangle>& triangles) {
  std::map<Edge, int> counts;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) ++counts[make_edge(t[k], t[(k + 1) % 3])];
  }
  return counts;
}

}  // namespace

TriMesh::TriMesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
                 std::optional<AnnulusBoundary> curved_boundary, std::shared_ptr<const TriMesh> parent)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_(vertices_.size(), false),
      curved_(curved_boundary),
      parent_(std::move(parent)) {
  for (const auto& [edge, count] : edge_counts(triangles_)) {
    if (count == 1) {
      boundary_[edge.first] = true;
      boundary_[edge.second] = true;
    }
  }
  to_interior_.assign(vertices_.size(), -1);
  for (Index v = 0; v < num_vertices(); ++v) {
    if (!boundary_[v]) {
      to_interior_[v] = static_cast<Index>(interior_.size());
      interior_.push_back(v);
    }
  }
  for (Index t = 0; t < num_triangles(); ++t) {
    const auto& tri = triangles_[t];
    area_ += triangle_area(t);
    for (int k = 0; k < 3; ++k) {
      h_ = std::max(h_, (vertices_[tri[k]] - vertices_[tri[(k + 1) % 3]]).norm());
    }
  }
}

Scalar TriMesh::triangle_area(Index t) const {
  const auto& tri = triangles_[t];
  return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

Point2 TriMesh::centroid(Index t) const {
  const auto& tri = triangles_[t];
  return (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
}

void TriMesh::check_invariants() const {
  auto fail = [](const std::string& what) { throw Error("mesh invariant violated: " + what); };

  for (Index t = 0; t < num_triangles(); ++t) {
    for (Index v : triangles_[t]) {
      if (v < 0 || v >= num_vertices()) fail("triangle references missing vertex");
    }
    if (!(triangle_area(t) > 0)) {
      std::ostringstream msg;
      msg << "triangle " << t << " has non-positive area";
      fail(msg.str());
    }
  }

  std::vector<Index> order(vertices_.size());
  for (Index i = 0; i < num_vertices(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) {
    return vertices_[a].x() < vertices_[b].x();
  });
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (vertices_[order[j]].x() - vertices_[order[i]].x() > 1e-12) break;
      if ((vertices_[order[j]] - vertices_[order[i]]).norm() <= 1e-12) fail("coincident vertices");
    }
  }

  std::vector<bool> on_boundary_edge(vertices_.size(), false);
  for (const auto& [edge, count] : edge_counts(triangles_)) {
    if (count > 2) fail("edge shared by more than two triangles");
    if (count == 1) {
      on_boundary_edge[edge.first] = true;
      on_boundary_edge[edge.second] = true;
    }
  }
  if (on_boundary_edge != boundary_) fail("boundary flags disagree with boundary edges");

  if (parent_) {
    PointLocator locator(std::make_shared<TriMesh>(vertices_, triangles_));
    for (const auto& pv : parent_->vertices()) {
      const auto loc = locator.try_locate(pv);
      bool found = false;
      if (loc) {
        for (Index v : triangles_[loc->triangle]) {
          if ((vertices_[v] - pv).norm() <= 1e-12) found = true;
        }
      }
      if (!found) fail("parent vertex missing from refined mesh");
    }
  }
}

MeshPtr make_annulus_mesh(Scalar inner_radius, Scalar outer_radius, int n_rings, int n_sectors) {
  if (!(inner_radius > 0) || !(outer_radius > inner_radius)) {
    throw InvalidParameter("annulus radii must satisfy 0 < inner < outer");
  }
  if (n_rings < 2) throw InvalidParameter("annulus mesh needs n_rings >= 2");
  if (n_sectors < 8) throw InvalidParameter("annulus mesh needs n_sectors >= 8");

  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>((n_rings + 1) * n_sectors));
  for (int j = 0; j <= n_rings; ++j) {
    const Scalar r = j == n_rings ? outer_radius
                                  : inner_radius + (outer_radius - inner_radius) * j / n_rings;
    for (int k = 0; k < n_sectors; ++k) {
      const Scalar theta = 2 * std::numbers::pi * k / n_sectors;
      vertices.emplace_back(r * std::cos(theta), r * std::sin(theta));
    }
  }

  auto id = [n_sectors](int ring, int sector) { return ring * n_sectors + (sector % n_sectors); };
  std::vector<TriMesh::Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n_rings * n_sectors));
  for (int j = 0; j < n_rings; ++j) {
    for (int k = 0; k < n_sectors; ++k) {
      const Index v00 = id(j, k), v10 = id(j + 1, k), v11 = id(j + 1, k + 1), v01 = id(j, k + 1);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }
  return std::make_shared<TriMesh>(std::move(vertices), std::move(triangles),
                                   AnnulusBoundary{inner_radius, outer_radius});
}

MeshPtr make_square_mesh(int n) {
  if (n < 2 || n % 2 != 0) throw InvalidParameter("square mesh needs an even n >= 2");
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.emplace_back(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n);
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  std::vector<TriMesh::Triangle> triangles;
  triangles.reserve(static_cast<std::size_t>(2 * n * n));
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return std::make_shared<TriMesh>(std::move(vertices), std::move(triangles));
}

MeshPtr refine_uniform(const MeshPtr& mesh) {
  std::vector<Point2> vertices = mesh->vertices();
  const auto counts = edge_counts(mesh->triangles());
  const auto& curved = mesh->curved_boundary();

  std::map<Edge, Index> midpoint;
  auto mid = [&](Index a, Index b) {
    const Edge e = make_edge(a, b);
    if (auto it = midpoint.find(e); it != midpoint.end()) return it->second;
    Point2 m = 0.5 * (vertices[a] + vertices[b]);
    if (curved && counts.at(e) == 1) {
      // Snap onto whichever circle the edge endpoints lie on.
      const Scalar r = m.norm();
      const Scalar ra = vertices[a].norm();
      const Scalar target = std::abs(ra - curved->inner_radius) < std::abs(ra - curved->outer_radius)
                                ? curved->inner_radius
                                : curved->outer_radius;
      m *= target / r;
    }
    const Index id = static_cast<Index>(vertices.size());
    vertices.push_back(m);
    midpoint.emplace(e, id);
    return id;
  };

  std::vector<TriMesh::Triangle> triangles;
  triangles.reserve(mesh->triangles().size() * 4);
  for (const auto& t : mesh->triangles()) {
    const Index m01 = mid(t[0], t[1]), m12 = mid(t[1], t[2]), m20 = mid(t[2], t[0]);
    triangles.push_back({t[0], m01, m20});
    triangles.push_back({m01, t[1], m12});
    triangles.push_back({m20, m12, t[2]});
    triangles.push_back({m01, m12, m20});
  }
  return std::make_shared<TriMesh>(std::move(vertices), std::move(triangles), curved, mesh);
}

Eigen::Vector3d barycentric(const TriMesh& mesh, Index t, const Point2& x) {
  const auto& tri = mesh.triangles()[t];
  const auto& a = mesh.vertices()[tri[0]];
  const auto& b = mesh.vertices()[tri[1]];
  const auto& c = mesh.vertices()[tri[2]];
  const Scalar total = signed_area(a, b, c);
  Eigen::Vector3d lambda;
  lambda[1] = signed_area(a, x, c) / total;
  lambda[2] = signed_area(a, b, x) / total;
  lambda[0] = 1.0 - lambda[1] - lambda[2];
  return lambda;
}

PointLocator::PointLocator(MeshPtr mesh) : mesh_(std::move(mesh)) {
  const auto& verts = mesh_->vertices();
  Point2 upper = verts.front();
  lower_ = verts.front();
  for (const auto& v : verts) {
    lower_ = lower_.cwiseMin(v);
    upper = upper.cwiseMax(v);
  }
  const Point2 extent = (upper - lower_).cwiseMax(1e-12);
  const Scalar target = std::max<Scalar>(1, std::sqrt(static_cast<Scalar>(mesh_->num_triangles())));
  cell_ = std::max(extent.x(), extent.y()) / target;
  nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_)));

  auto cell_range = [&](Index t) {
    const auto& tri = mesh_->triangles()[t];
    Point2 lo = verts[tri[0]], hi = verts[tri[0]];
    for (Index v : tri) {
      lo = lo.cwiseMin(verts[v]);
      hi = hi.cwiseMax(verts[v]);
    }
    auto clamp_x = [&](Scalar x) { return std::clamp(static_cast<int>(std::floor(x)), 0, nx_ - 1); };
    auto clamp_y = [&](Scalar y) { return std::clamp(static_cast<int>(std::floor(y)), 0, ny_ - 1); };
    return std::array<int, 4>{clamp_x((lo.x() - lower_.x()) / cell_ - 1e-9),
                              clamp_x((hi.x() - lower_.x()) / cell_ + 1e-9),
                              clamp_y((lo.y() - lower_.y()) / cell_ - 1e-9),
                              clamp_y((hi.y() - lower_.y()) / cell_ + 1e-9)};
  };

  std::vector<Index> count(static_cast<std::size_t>(nx_ * ny_) + 1, 0);
  for (Index t = 0; t < mesh_->num_triangles(); ++t) {
    const auto r = cell_range(t);
    for (int j = r[2]; j <= r[3]; ++j)
      for (int i = r[0]; i <= r[1]; ++i) ++count[j * nx_ + i + 1];
  }
  for (std::size_t k = 1; k < count.size(); ++k) count[k] += count[k - 1];
  offsets_ = count;
  entries_.resize(offsets_.back());
  std::vector<Index> fill(offsets_.begin(), offsets_.end() - 1);
  for (Index t = 0; t < mesh_->num_triangles(); ++t) {
    const auto r = cell_range(t);
    for (int j = r[2]; j <= r[3]; ++j)
      for (int i = r[0]; i <= r[1]; ++i) entries_[fill[j * nx_ + i]++] = t;
  }
}

std::optional<PointLocation> PointLocator::try_locate(const Point2& x) const {
  const Scalar fx = (x.x() - lower_.x()) / cell_;
  const Scalar fy = (x.y() - lower_.y()) / cell_;
  if (fx < -1 || fy < -1 || fx > nx_ + 1 || fy > ny_ + 1) return std::nullopt;
  const int i = std::clamp(static_cast<int>(std::floor(fx)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::floor(fy)), 0, ny_ - 1);
  const Index cell = j * nx_ + i;
  for (Index k = offsets_[cell]; k < offsets_[cell + 1]; ++k) {
    const Index t = entries_[k];
    const auto lambda = barycentric(*mesh_, t, x);
    if (lambda.minCoeff() >= -kLocateTol && lambda.maxCoeff() <= 1 + kLocateTol) {
      return PointLocation{t, lambda};
    }
  }
  return std::nullopt;
}

PointLocation PointLocator::locate(const Point2& x) const {
  if (auto loc = try_locate(x)) return *loc;
  std::ostringstream msg;
  msg << "point (" << x.x() << ", " << x.y() << ") lies outside the mesh";
  throw PointOutsideMesh(msg.str());
}

PointLocation locate_point(const MeshPtr& mesh, const Point2& x) {
  return PointLocator(mesh).locate(x);
}

Vector interpolate_nodal(const MeshPtr& from, const Vector& values, const MeshPtr& to) {
  if (values.size() != from->num_vertices()) throw MeshMismatch("interpolate_nodal: size mismatch");
  PointLocator locator(from);
  Vector out(to->num_vertices());
  for (Index v = 0; v < to->num_vertices(); ++v) {
    const Point2& x = to->vertices()[v];
    auto loc = locator.try_locate(x);
    if (!loc) {
      // Linear extrapolation from the triangle whose barycentric coordinates are least negative.
      Scalar best = -std::numeric_limits<Scalar>::infinity();
      for (Index t = 0; t < from->num_triangles(); ++t) {
        const auto lambda = barycentric(*from, t, x);
        if (lambda.minCoeff() > best) {
          best = lambda.minCoeff();
          loc = PointLocation{t, lambda};
        }
      }
    }
    const auto& tri = from->triangles()[loc->triangle];
    out[v] = loc->barycentric[0] * values[tri[0]] + loc->barycentric[1] * values[tri[1]] +
             loc->barycentric[2] * values[tri[2]];
  }
  return out;
}

}  // namespace tvpath
