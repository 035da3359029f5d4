#include "verify_suites.hpp"

#include <cmath>
#include <random>

#include "tvpath/coupled_newton.hpp"
#include "tvpath/implicit_control.hpp"

using namespace tvpath;

namespace {

Vector random_vector(std::mt19937_64& rng, Index n, Scalar scale) {
  std::uniform_real_distribution<Scalar> dist(-1, 1);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = scale * dist(rng);
  return v;
}

bool report(std::ostream& out, const char* name, Scalar err, Scalar tol) {
  const bool ok = err < tol;
  out << (ok ? "PASS " : "FAIL ") << name << " relative error " << err << " (tolerance " << tol
      << ")\n";
  return ok;
}

Scalar control_jacobian_check(std::mt19937_64& rng) {
  const MeshPtr mesh = make_square_mesh(2);
  const SmoothingParams params{0.1, 0.05, 1.0};
  const FeFunction u{Space::Full, random_vector(rng, mesh->num_vertices(), 1), mesh};
  const FeFunction p{Space::Full, random_vector(rng, mesh->num_vertices(), 1), mesh};
  const Vector d = random_vector(rng, mesh->num_vertices(), 1);
  const Scalar eps = 1e-6;
  FeFunction plus = u, minus = u;
  plus.coeffs += eps * d;
  minus.coeffs -= eps * d;
  const Vector fd = (assemble_control_residual(plus, p, params) -
                     assemble_control_residual(minus, p, params)) / (2 * eps);
  const Vector jd = assemble_control_jacobian(u, params) * d;
  return (fd - jd).norm() / jd.norm();
}

Scalar f_prime_check(std::mt19937_64& rng) {
  const ProblemSpec problem = example1(1e-2);
  const MeshPtr mesh = make_annulus_mesh(problem.domain.radius, 2 * problem.domain.radius, 3, 16);
  const auto disc = Discretization::build(mesh, problem);
  ImplicitControlSolver solver(mesh);
  const SmoothingParams params{0.1, 0.1, problem.beta};
  const Index n = mesh->num_interior();
  const StateAdjointPair pair{{Space::Interior, random_vector(rng, n, 1), mesh},
                              {Space::Interior, random_vector(rng, n, 0.05), mesh}};
  const Vector dy = random_vector(rng, n, 1), dp = random_vector(rng, n, 0.05);
  const Scalar eps = 1e-5, tol = 1e-13;
  const FEvaluation base = eval_F(*disc, solver, pair, params, std::nullopt, tol);
  auto shifted = [&](Scalar s) {
    StateAdjointPair q = pair;
    q.y.coeffs += s * dy;
    q.p.coeffs += s * dp;
    return eval_F(*disc, solver, q, params, base.u, tol).residual;
  };
  const Residual rp = shifted(eps), rm = shifted(-eps);
  const Residual lin = FPrime(disc, base.u, params).apply(dy, dp);
  Vector fd(2 * n), an(2 * n);
  fd << (rp.ry - rm.ry) / (2 * eps), (rp.rp - rm.rp) / (2 * eps);
  an << lin.ry, lin.rp;
  return (fd - an).norm() / an.norm();
}

Scalar control_derivative_check(std::mt19937_64& rng) {
  const MeshPtr mesh = make_annulus_mesh(1, 2, 3, 16);
  const SmoothingParams params{0.05, 0.01, 0.1};
  ImplicitControlSolver solver(mesh);
  const Index n = mesh->num_vertices();
  const FeFunction p{Space::Full, random_vector(rng, n, 1), mesh};
  const Vector d = random_vector(rng, n, 1);
  const Scalar eps = 1e-5, tol = 1e-13;
  const FeFunction u = solver.solve(p, params, std::nullopt, tol).first;
  auto solve_at = [&](Scalar s) {
    FeFunction q = p;
    q.coeffs += s * d;
    return solver.solve(q, params, u, tol).first.coeffs;
  };
  const Vector fd = (solve_at(eps) - solve_at(-eps)) / (2 * eps);
  const Vector an = apply_control_derivative(u, {Space::Full, d, mesh}, params).coeffs;
  return (fd - an).norm() / an.norm();
}

}  // namespace

bool run_gradient_suite(std::uint64_t seed, std::ostream& out) {
  std::mt19937_64 rng(seed);
  bool ok = true;
  for (int trial = 0; trial < 3; ++trial) {
    ok &= report(out, "control jacobian", control_jacobian_check(rng), 1e-5);
    ok &= report(out, "optimality map derivative", f_prime_check(rng), 1e-4);
    ok &= report(out, "control derivative", control_derivative_check(rng), 1e-4);
  }
  return ok;
}
