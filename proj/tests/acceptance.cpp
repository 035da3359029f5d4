// Acceptance checks: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "tvpath/diagnostics.hpp"
#include "tvpath/path_following.hpp"
#include "verify_suites.hpp"

using namespace tvpath;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Run {
  PathResult result;
  double seconds = 0;
  std::optional<ErrorReport> errors;
};

Run run_example1(int rings, int sectors, Scalar beta = 1e-3, PathConfig config = {}) {
  const ProblemSpec problem = example1(beta);
  const MeshPtr mesh = make_annulus_mesh(problem.domain.radius, 2 * problem.domain.radius, rings, sectors);
  config.trace_errors = false;
  const auto start = std::chrono::steady_clock::now();
  Run run{run_path(problem, mesh, config, NewtonConfig{}), 0, std::nullopt};
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (run.result.status == PathStatus::Terminated) {
    run.errors = compute_errors(run.result.u, run.result.pair.y, run.result.pair.p,
                                run.result.trace.back().objective, *problem.exact);
  }
  return run;
}

Run run_example2(int n) {
  PathConfig config;
  config.gamma0 = 0.01;
  config.delta0 = 1;
  const auto start = std::chrono::steady_clock::now();
  Run run{run_path(example2(), make_square_mesh(n), config, NewtonConfig{}), 0, std::nullopt};
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

std::string status_text(const PathResult& r) {
  switch (r.status) {
    case PathStatus::Terminated: return "terminated";
    case PathStatus::MaxOuter: return "max_outer";
    default: return "failed (" + r.failure + ")";
  }
}

// Independent oracle for 1/2 ||Laplace p_bar||^2: with g = r h_hat, p_bar = g'/r and
// Laplace p_bar = g'''/r - g''/r^2 + g'/r^3, integrated by 8-point Gauss-Legendre panels.
Scalar fit_term_oracle(Scalar beta) {
  const Scalar R = 2 * pi, k = 2 * pi / R;
  auto lap = [&](Scalar r) {
    const Scalar c = std::cos(k * r), s = std::sin(k * r);
    const Scalar h = beta / 2 * (c - 1), h1 = -beta / 2 * k * s, h2 = -beta / 2 * k * k * c,
                 h3 = beta / 2 * k * k * k * s;
    const Scalar g1 = h + r * h1, g2 = 2 * h1 + r * h2, g3 = 3 * h2 + r * h3;
    return g3 / r - g2 / (r * r) + g1 / (r * r * r);
  };
  const Scalar x[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                       -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                       0.7966664774136267,  0.9602898564975363};
  const Scalar w[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                       0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                       0.2223810344533745, 0.1012285362903763};
  const int panels = 400;
  Scalar total = 0;
  for (int p = 0; p < panels; ++p) {
    const Scalar a = R + R * p / panels, b = R + R * (p + 1) / panels;
    for (int q = 0; q < 8; ++q) {
      const Scalar r = 0.5 * (a + b) + 0.5 * (b - a) * x[q];
      const Scalar l = lap(r);
      total += 0.5 * (b - a) * w[q] * l * l * 2 * pi * r;
    }
  }
  return 0.5 * total;
}

Vector random_vector(std::mt19937_64& rng, Index n, Scalar scale = 1) {
  std::uniform_real_distribution<Scalar> d(-scale, scale);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

Scalar gradient_sparsity(const FeFunction& u) {
  const TriMesh& mesh = *u.mesh;
  const Vector full = to_full_space(u).coeffs;
  std::vector<Scalar> g(mesh.num_triangles());
  Scalar gmax = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    g[t] = triangle_gradient(mesh, t, full).norm();
    gmax = std::max(gmax, g[t]);
  }
  const auto small = std::count_if(g.begin(), g.end(), [&](Scalar v) { return v <= 1e-2 * gmax; });
  return static_cast<Scalar>(small) / mesh.num_triangles();
}

}  // namespace

int main() {
  std::vector<std::pair<int, Outcome>> outcomes;
  auto report = [&](int id, Outcome o) {
    std::cout << "criterion " << id << ' ' << (o.pass ? "PASS" : "FAIL") << ": " << o.detail << std::endl;
    outcomes.emplace_back(id, std::move(o));
  };

  // Mesh levels shared by criteria 1-4, 6-8.
  const std::vector<std::pair<int, int>> levels{{12, 112}, {24, 224}, {48, 448}};
  std::vector<Run> e1;
  for (const auto& [rings, sectors] : levels) e1.push_back(run_example1(rings, sectors));
  const Run& finest = e1.back();
  const Index finest_dofs = finest.result.disc->mesh->num_vertices();

  {
    Outcome o;
    if (finest.errors) {
      const ErrorReport& e = *finest.errors;
      o.pass = finest_dofs >= 24443 / 2 && finest_dofs <= 2 * 24443 && e.e_j <= 3e-3 &&
               e.e_u <= 12 && e.e_y <= 1.2 && e.e_p <= 3e-2 && finest.seconds <= 1800;
      o.detail = "DOF " + std::to_string(finest_dofs) + ", E_j " + fmt(e.e_j) + ", E_u " + fmt(e.e_u) +
                 ", E_y " + fmt(e.e_y) + ", E_p " + fmt(e.e_p) + ", " + fmt(finest.seconds) + " s";
    } else {
      o.detail = "run " + status_text(finest.result);
    }
    report(1, o);
  }

  {
    const Scalar closed = example1_optimal_value(1e-3);
    const Scalar oracle = fit_term_oracle(1e-3) + 1e-3 * 6 * pi * pi;
    const Scalar rel = std::abs(closed - oracle) / oracle;
    Outcome o;
    o.detail = "closed form " + fmt(closed) + " vs quadrature relative " + fmt(rel);
    o.pass = rel <= 1e-8;
    if (finest.errors) {
      const Scalar j = finest.result.trace.back().objective;
      const Scalar rj = std::abs(j - closed) / closed;
      o.pass = o.pass && rj <= 0.03;
      o.detail += ", discrete objective relative " + fmt(rj);
    } else {
      o.pass = false;
    }
    report(2, o);
  }

  {
    Outcome o{true, ""};
    for (std::size_t k = 0; k < e1.size(); ++k) {
      if (!e1[k].errors) {
        o.pass = false;
        o.detail += "level " + std::to_string(k) + " " + status_text(e1[k].result) + "; ";
        continue;
      }
      const ErrorReport& e = *e1[k].errors;
      o.detail += "E_u/E_y/E_p " + fmt(e.e_u) + "/" + fmt(e.e_y) + "/" + fmt(e.e_p) + "; ";
      if (k == 0 || !e1[k - 1].errors) continue;
      const ErrorReport& prev = *e1[k - 1].errors;
      o.pass = o.pass && e.e_u < prev.e_u && e.e_y < prev.e_y && e.e_p < prev.e_p &&
               prev.e_y / e.e_y >= 1.7;
      o.detail += "E_y ratio " + fmt(prev.e_y / e.e_y) + "; ";
    }
    report(3, o);
  }

  {
    Outcome o{true, "#it"};
    for (const Run& r : e1) {
      const int it = r.result.total_newton_steps;
      o.pass = o.pass && r.result.status == PathStatus::Terminated && it >= 30 && it <= 130;
      o.detail += " " + std::to_string(it);
    }
    report(4, o);
  }

  {
    std::ostringstream log;
    const bool ok = run_gradient_suite(2024, log);
    Outcome o{ok, ""};
    std::istringstream lines(log.str());
    int passed = 0, total = 0;
    for (std::string line; std::getline(lines, line);) {
      ++total;
      passed += line.rfind("PASS", 0) == 0 ? 1 : 0;
    }
    o.detail = std::to_string(passed) + "/" + std::to_string(total) + " finite-difference checks";
    report(5, o);
  }

  // Square meshes and runs used by criteria 6, 10 and 11.
  std::vector<Run> e2;
  for (int n : {32, 64, 128}) e2.push_back(run_example2(n));

  {
    const MeshPtr mesh = make_annulus_mesh(2 * pi, 4 * pi, 12, 112);
    const SmoothingParams params{1e-4, 1e-6, 1e-3};
    const Scalar c = 0.37;
    auto [u, rep] = solve_implicit_control(FeFunction::constant(mesh, c), params, std::nullopt, 1e-14);
    const Scalar dev = (u.coeffs.array() - c / params.gamma).abs().maxCoeff();
    bool monotone = true;
    int runs = 0;
    for (const auto* runs_of : {&e1, &e2}) {
      for (const Run& r : *runs_of) {
        monotone = monotone && r.result.control_energy_monotone;
        ++runs;
      }
    }
    report(6, {dev <= 1e-10 && monotone,
               "constant right-hand side max deviation " + fmt(dev) + ", energy monotone in " +
                   std::to_string(runs) + " runs: " + (monotone ? "yes" : "no")});
  }

  {
    const ProblemSpec problem = example1(1e-3);
    const MeshPtr mesh = make_annulus_mesh(problem.domain.radius, 2 * problem.domain.radius, 12, 112);
    const auto disc = Discretization::build(mesh, problem);
    const FPrime surrogate(disc, FeFunction::zeros(mesh, Space::Full), {1, 0.01, problem.beta}, false);
    std::mt19937_64 rng(99);
    Scalar worst = 0;
    for (int k = 0; k < 20; ++k) {
      const Vector y = random_vector(rng, mesh->num_interior());
      const Vector p = random_vector(rng, mesh->num_interior());
      const auto [dy, dp] = apply_preconditioner(*disc, surrogate.apply(y, p));
      worst = std::max(worst, std::sqrt((dy - y).squaredNorm() + (dp - p).squaredNorm()) /
                                  std::sqrt(y.squaredNorm() + p.squaredNorm()));
    }
    int gmres_max = 0;
    for (const Run& r : e1) gmres_max = std::max(gmres_max, r.result.max_gmres_iterations);
    report(7, {worst <= 1e-10 && gmres_max <= 100,
               "identity defect " + fmt(worst) + ", max GMRES iterations " + std::to_string(gmres_max)});
  }

  {
    Outcome o{true, "full steps"};
    for (const Run& r : e1) {
      const Scalar frac = static_cast<Scalar>(r.result.total_full_steps) / r.result.total_newton_steps;
      o.pass = o.pass && frac >= 0.9;
      o.detail += " " + std::to_string(r.result.total_full_steps) + "/" +
                  std::to_string(r.result.total_newton_steps);
    }
    report(8, o);
  }

  {
    std::vector<int> its;
    bool all_done = true;
    for (Scalar s : {0.3, 0.5, 0.7, 0.9}) {
      PathConfig config;
      config.fixed_sigma = s;
      const Run r = run_example1(12, 112, 1e-3, config);
      all_done = all_done && r.result.status == PathStatus::Terminated;
      its.push_back(r.result.total_newton_steps);
    }
    const bool from_03 = its[0] < its[1] && its[1] < its[2] && its[2] < its[3];
    const bool from_05 = its[1] < its[2] && its[2] < its[3];
    const Scalar ratio = static_cast<Scalar>(its[3]) / its[1];
    report(9, {all_done && (from_03 || from_05) && ratio >= 2.5,
               "#it for sigma 0.3/0.5/0.7/0.9: " + std::to_string(its[0]) + "/" +
                   std::to_string(its[1]) + "/" + std::to_string(its[2]) + "/" +
                   std::to_string(its[3]) + ", ratio 0.9 to 0.5 " + fmt(ratio)});
  }

  {
    std::vector<MeshPtr> meshes;
    for (const Run& r : e1) meshes.push_back(r.result.disc->mesh);
    for (const Run& r : e2) meshes.push_back(r.result.disc->mesh);
    std::mt19937_64 rng(7);
    const Scalar delta = 1e-2;
    int violations = 0, checks = 0;
    for (const MeshPtr& mesh : meshes) {
      for (int k = 0; k < 100; ++k, ++checks) {
        const FeFunction u{Space::Full, random_vector(rng, mesh->num_vertices(), 2), mesh};
        const Scalar tv = psi_delta_h(u, 0), smooth = psi_delta_h(u, delta);
        if (!(tv <= smooth && smooth <= tv + std::sqrt(delta) * mesh->area())) ++violations;
      }
    }
    report(10, {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) +
                                     " random functions on " + std::to_string(meshes.size()) + " meshes"});
  }

  {
    Outcome o{true, ""};
    for (std::size_t k = 0; k < e2.size(); ++k) {
      o.pass = o.pass && e2[k].result.status == PathStatus::Terminated;
      o.detail += "n=" + std::to_string(32 << k) + " " + status_text(e2[k].result) + " (" +
                  fmt(e2[k].seconds) + " s); ";
    }
    if (o.pass) {
      const PathResult& ref = e2[2].result;
      const FineReference fine{ref.u, ref.pair.y, ref.pair.p, ref.trace.back().objective};
      auto err = [&](const PathResult& r) {
        return compute_errors(r.u, r.pair.y, r.pair.p, r.trace.back().objective, fine);
      };
      const ErrorReport e32 = err(e2[0].result), e64 = err(e2[1].result);
      const Scalar ratio = e32.e_u_l2 / e64.e_u_l2;
      const Scalar sparse = gradient_sparsity(ref.u);
      o.pass = ratio >= 1.6 && sparse >= 0.6;
      o.detail += "L2 u error " + fmt(e32.e_u_l2) + " -> " + fmt(e64.e_u_l2) + " (ratio " + fmt(ratio) +
                  "), H1 y error " + fmt(e32.e_y) + " -> " + fmt(e64.e_y) +
                  ", flat-gradient fraction " + fmt(sparse);
    }
    report(11, o);
  }

  {
    Outcome o{true, ""};
    for (Scalar beta : {1e-2, 1e-4, 1e-5}) {
      const Run r = run_example1(12, 112, beta);
      o.pass = o.pass && r.result.status == PathStatus::Terminated;
      o.detail += "beta " + fmt(beta) + " " + status_text(r.result) + "; ";
    }
    for (Scalar ratio : {1e-2, 1.0, 1e2}) {
      PathConfig config;
      config.delta0 = config.gamma0 / ratio;
      const Run r = run_example1(12, 112, 1e-3, config);
      o.pass = o.pass && r.result.status == PathStatus::Terminated;
      o.detail += "ratio " + fmt(ratio) + " " + status_text(r.result) + "; ";
    }
    report(12, o);
  }

  int failed = 0;
  for (const auto& [id, o] : outcomes) failed += o.pass ? 0 : 1;
  std::cout << (outcomes.size() - failed) << "/" << outcomes.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
