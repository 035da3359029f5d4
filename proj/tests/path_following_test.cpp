#include <doctest.h>

#include <cmath>

#include "tvpath/diagnostics.hpp"
#include "tvpath/path_following.hpp"

using namespace tvpath;

TEST_CASE("rho") {
  CHECK(rho(1e-3, 5) == 1e-3);
  CHECK(rho(1e-9, 5) == 1e-6);
  CHECK(rho(1e-6, 5) == 1e-6);
}

TEST_CASE("forcing term") {
  CHECK(forcing_term(ForcingMode::Constant, 0, 1) == 1e-6);
  CHECK(forcing_term(ForcingMode::Constant, 7, 1e-2) == 1e-6);
  CHECK(forcing_term(ForcingMode::Adaptive, 0, 1e-2) == doctest::Approx(1e-1));
  CHECK(forcing_term(ForcingMode::Adaptive, 9, 1) == 1e-6);
  CHECK(forcing_term(ForcingMode::Adaptive, 1, 1e-6) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(forcing_term(ForcingMode::Adaptive, -1, 1), InvalidParameter);
}

TEST_CASE("sigma update") {
  const int m = 40;
  CHECK(update_sigma(0.45, m / 2, m) == doctest::Approx(0.405));
  CHECK(update_sigma(0.80, 2 * m, m) == doctest::Approx(0.90));
  CHECK(update_sigma(0.26, m / 10, m) == doctest::Approx(0.25));
  CHECK(update_sigma(0.5, 35, m) == 0.5);
  CHECK(update_sigma(0.5, 30, m) == doctest::Approx(0.45));
}

TEST_CASE("termination test") {
  const MeshPtr mesh = make_square_mesh(4);
  const CsrMatrix h1 = assemble_stiffness(*mesh, Space::Interior, Space::Interior) +
                       assemble_mass(*mesh, Space::Interior, Space::Interior);
  const Index n = mesh->num_interior();
  const AcceptedPair w{Vector::Ones(n), Vector::Constant(n, 1e-3)};
  const std::vector<Scalar> sigmas{0.45, 0.45, 0.45};
  CHECK(termination_test({w, w, w}, sigmas, 1e-3, 1e-3, h1));
  CHECK_FALSE(termination_test({w, w}, sigmas, 1e-3, 1e-3, h1));

  AcceptedPair moved = w;
  moved.y *= 1.01;
  CHECK_FALSE(termination_test({w, moved, w}, sigmas, 1e-3, 1e-3, h1));
  moved.y = w.y * (1 + 1e-6);
  CHECK(termination_test({w, w, moved}, sigmas, 1e-3, 1e-3, h1));
  // The adjoint counts with weight 1/beta.
  AcceptedPair p_moved = w;
  p_moved.p *= 1 + 1e-3;
  CHECK_FALSE(termination_test({w, w, p_moved}, sigmas, 1e-3, 1e-6, h1));
  const AcceptedPair zero{Vector::Zero(n), Vector::Zero(n)};
  CHECK_FALSE(termination_test({zero, zero, zero}, sigmas, 1e-3, 1e-3, h1));
}

TEST_CASE("path config validation") {
  PathConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.ratio() == doctest::Approx(100));
  c.sigma0 = 0.1;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = PathConfig{};
  c.sigma_max = 1;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = PathConfig{};
  c.kappa = 0;
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
}

TEST_CASE("coarse Example 1 path has the expected trace shape") {
  const ProblemSpec problem = example1(1e-3);
  const MeshPtr mesh = make_annulus_mesh(problem.domain.radius, 2 * problem.domain.radius, 12, 112);
  const PathResult res = run_path(problem, mesh, PathConfig{}, NewtonConfig{});
  REQUIRE(res.status == PathStatus::Terminated);
  const auto& t = res.trace;
  REQUIRE(t.size() >= 5);
  CHECK(t.front().gamma == 1);
  for (std::size_t k = 1; k < t.size(); ++k) CHECK(t[k].gamma < t[k - 1].gamma);
  CHECK(t.front().sigma <= 0.45);
  CHECK(t.back().sigma >= 0.25);
  for (const auto& row : t) {
    CHECK(row.newton_steps >= 0);
    CHECK(row.control_steps >= 0);
    CHECK(row.residual <= row.rho);
  }
  const std::size_t last = t.size() - 1;
  CHECK(*t[last].tau < *t[last - 3].tau);
  CHECK(*t[last].tau_u < *t[last - 3].tau_u);
  CHECK(res.control_energy_monotone);
  CHECK(res.residuals_within_rho);
  CHECK(res.gamma_final == t.back().gamma);

  // Determinism: the same configuration gives the same trace.
  const PathResult again = run_path(problem, mesh, PathConfig{}, NewtonConfig{});
  REQUIRE(again.trace.size() == t.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    CHECK(again.trace[k].objective == t[k].objective);
    CHECK(again.trace[k].newton_steps == t[k].newton_steps);
  }
}

TEST_CASE("nested-grid handoff refines the mesh during the path") {
  const ProblemSpec problem = example2();
  PathConfig config;
  config.gamma0 = 0.01;
  config.delta0 = 1;
  config.nested_grid_thresholds = {1e-4};
  const MeshPtr mesh = make_square_mesh(8);
  const PathResult res = run_path(problem, mesh, config, NewtonConfig{});
  CHECK(res.status == PathStatus::Terminated);
  REQUIRE_FALSE(res.trace.empty());
  CHECK(res.trace.front().dofs == mesh->num_vertices());
  CHECK(res.trace.back().dofs == refine_uniform(mesh)->num_vertices());
  for (const auto& row : res.trace) {
    if (row.gamma < 1e-4) CHECK(row.dofs == refine_uniform(mesh)->num_vertices());
  }
  CHECK(res.disc->mesh->num_vertices() == res.trace.back().dofs);
}

TEST_CASE("max_outer stops the path") {
  const ProblemSpec problem = example1(1e-3);
  const MeshPtr mesh = make_annulus_mesh(problem.domain.radius, 2 * problem.domain.radius, 4, 32);
  PathConfig config;
  config.max_outer = 2;
  const PathResult res = run_path(problem, mesh, config, NewtonConfig{});
  CHECK(res.status == PathStatus::MaxOuter);
  CHECK(res.trace.size() == 2);
}
