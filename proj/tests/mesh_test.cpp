#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tvpath/mesh.hpp"

using namespace tvpath;
using std::numbers::pi;

namespace {

Scalar shoelace_area(const TriMesh& mesh) {
  Scalar total = 0;
  for (const auto& t : mesh.triangles()) {
    const Point2 &a = mesh.vertices()[t[0]], &b = mesh.vertices()[t[1]], &c = mesh.vertices()[t[2]];
    total += 0.5 * ((b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y()));
  }
  return total;
}

int count_boundary(const TriMesh& mesh) {
  return static_cast<int>(std::count(mesh.boundary_flags().begin(), mesh.boundary_flags().end(), true));
}

std::vector<std::pair<Scalar, Scalar>> sorted_points(const TriMesh& mesh) {
  std::vector<std::pair<Scalar, Scalar>> pts;
  for (const auto& v : mesh.vertices()) {
    pts.emplace_back(std::round(v.x() * 1e9) / 1e9, std::round(v.y() * 1e9) / 1e9);
  }
  std::sort(pts.begin(), pts.end());
  return pts;
}

}  // namespace

TEST_CASE("annulus mesh counts and radii") {
  const MeshPtr m = make_annulus_mesh(1, 2, 2, 8);
  CHECK(m->num_vertices() == 24);
  CHECK(m->num_triangles() == 32);
  CHECK(count_boundary(*m) == 16);
  m->check_invariants();

  const MeshPtr big = make_annulus_mesh(2 * pi, 4 * pi, 5, 40);
  for (const auto& v : big->vertices()) {
    CHECK(v.norm() >= 2 * pi - 1e-12);
    CHECK(v.norm() <= 4 * pi + 1e-12);
  }
}

TEST_CASE("annulus area against the shoelace sum and its convergence") {
  const MeshPtr m = make_annulus_mesh(1, 2, 4, 16);
  CHECK(m->area() == doctest::Approx(shoelace_area(*m)).epsilon(1e-12));
  // The inscribed 16-gon annulus: area n/2 sin(2 pi/n) (2^2 - 1^2), 2.5% below 3 pi.
  CHECK(m->area() == doctest::Approx(8 * std::sin(2 * pi / 16) * 3).epsilon(1e-13));
  CHECK(std::abs(m->area() - 3 * pi) / (3 * pi) < 0.03);

  const Scalar exact = pi * (16 * pi * pi - 4 * pi * pi);
  MeshPtr level = make_annulus_mesh(2 * pi, 4 * pi, 3, 16);
  std::vector<Scalar> errors;
  for (int k = 0; k < 4; ++k) {
    errors.push_back(exact - level->area());
    level = refine_uniform(level);
  }
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const Scalar ratio = errors[k - 1] / errors[k];
    CHECK(ratio >= 3.5);
    CHECK(ratio <= 4.5);
  }
}

TEST_CASE("square mesh counts, area and size") {
  const MeshPtr m = make_square_mesh(2);
  CHECK(m->num_vertices() == 9);
  CHECK(m->num_triangles() == 8);
  CHECK(count_boundary(*m) == 8);
  CHECK(make_square_mesh(4)->area() == doctest::Approx(4).epsilon(1e-15));
  for (int n : {2, 8, 16, 64}) CHECK(std::abs(make_square_mesh(n)->area() - 4) < 1e-12);
  CHECK(make_square_mesh(32)->h() == doctest::Approx(2.0 / 32 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK_THROWS_AS(make_square_mesh(3), InvalidParameter);
  CHECK_THROWS_AS(make_square_mesh(0), InvalidParameter);
}

TEST_CASE("red refinement") {
  const MeshPtr coarse = make_square_mesh(2);
  const MeshPtr fine = refine_uniform(coarse);
  fine->check_invariants();
  CHECK(fine->num_triangles() == 4 * coarse->num_triangles());
  CHECK(fine->parent() == coarse);
  CHECK(sorted_points(*fine) == sorted_points(*make_square_mesh(4)));
  CHECK(count_boundary(*fine) == 16);

  const MeshPtr ann = make_annulus_mesh(1, 2, 2, 12);
  const MeshPtr ann_fine = refine_uniform(ann);
  ann_fine->check_invariants();
  for (Index v = 0; v < ann->num_vertices(); ++v) {
    CHECK((ann_fine->vertices()[v] - ann->vertices()[v]).norm() == 0);
  }
  for (Index v = 0; v < ann_fine->num_vertices(); ++v) {
    if (!ann_fine->boundary_flags()[v]) continue;
    const Scalar r = ann_fine->vertices()[v].norm();
    CHECK(std::min(std::abs(r - 1), std::abs(r - 2)) < 1e-12);
  }
}

TEST_CASE("point location") {
  const MeshPtr m = make_annulus_mesh(1, 2, 4, 24);
  const PointLocator locator(m);
  for (Index t = 0; t < m->num_triangles(); t += 7) {
    const auto loc = locator.locate(m->centroid(t));
    CHECK(loc.triangle == t);
    for (int k = 0; k < 3; ++k) CHECK(loc.barycentric[k] == doctest::Approx(1.0 / 3).epsilon(1e-12));
  }

  const auto at_vertex = locate_point(m, m->vertices()[5]);
  CHECK(at_vertex.barycentric.maxCoeff() == doctest::Approx(1).epsilon(1e-12));

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<Scalar> radius(1.05, 1.95), angle(0, 2 * pi);
  for (int k = 0; k < 200; ++k) {
    const Scalar r = radius(rng), a = angle(rng);
    const Point2 x(r * std::cos(a), r * std::sin(a));
    const auto loc = locator.locate(x);
    CHECK(std::abs(loc.barycentric.sum() - 1) < 1e-12);
    CHECK(loc.barycentric.minCoeff() >= -1e-10);
    // Exhaustive scan: the located triangle must be one that contains x.
    bool found = false;
    for (Index t = 0; t < m->num_triangles() && !found; ++t) {
      const auto b = barycentric(*m, t, x);
      found = b.minCoeff() >= -1e-10 && t == loc.triangle;
    }
    CHECK(found);
  }
  CHECK_THROWS_AS(locator.locate(Point2(0, 0)), PointOutsideMesh);
  CHECK_FALSE(locator.try_locate(Point2(5, 5)).has_value());
}

TEST_CASE("nodal interpolation is exact for linear functions on nested meshes") {
  const MeshPtr coarse = make_square_mesh(4);
  const MeshPtr fine = refine_uniform(coarse);
  Vector values(coarse->num_vertices());
  for (Index v = 0; v < coarse->num_vertices(); ++v) {
    values[v] = 2 * coarse->vertices()[v].x() - 3 * coarse->vertices()[v].y() + 1;
  }
  const Vector out = interpolate_nodal(coarse, values, fine);
  for (Index v = 0; v < fine->num_vertices(); ++v) {
    const Point2& x = fine->vertices()[v];
    CHECK(out[v] == doctest::Approx(2 * x.x() - 3 * x.y() + 1).epsilon(1e-12));
  }
}
