#include "tvpath/diagnostics.hpp"

#include <cmath>
#include <charconv>
#include <fstream>

namespace tvpath {

Scalar integrate_composite(const TriMesh& mesh, int levels,
                           const std::function<Scalar(Index, const Point2&)>& g) {
  if (levels < 0) throw InvalidParameter("quadrature level must be non-negative");
  const int n = 1 << levels;
  const Scalar sub_scale = 1.0 / (static_cast<Scalar>(n) * n);
  Scalar total = 0;
  for (Index t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Point2& a = mesh.vertices()[tri[0]];
    const Point2 e1 = (mesh.vertices()[tri[1]] - a) / n;
    const Point2 e2 = (mesh.vertices()[tri[2]] - a) / n;
    const Scalar w = mesh.triangle_area(t) * sub_scale / 3;
    auto lattice = [&](Scalar i, Scalar j) -> Point2 { return a + i * e1 + j * e2; };
    auto sub = [&](const Point2& p0, const Point2& p1, const Point2& p2) {
      const Scalar s = g(t, (4 * p0 + p1 + p2) / 6) + g(t, (p0 + 4 * p1 + p2) / 6) +
                       g(t, (p0 + p1 + 4 * p2) / 6);
      return w * s;
    };
    for (int i = 0; i < n; ++i) {
      for (int j = 0; i + j < n; ++j) {
        total += sub(lattice(i, j), lattice(i + 1, j), lattice(i, j + 1));
        if (i + j < n - 1) total += sub(lattice(i + 1, j), lattice(i + 1, j + 1), lattice(i, j + 1));
      }
    }
  }
  return total;
}

Scalar eval_p1(const TriMesh& mesh, Index t, const Vector& full, const Point2& x) {
  const auto lambda = barycentric(mesh, t, x);
  const auto& tri = mesh.triangles()[t];
  return lambda[0] * full[tri[0]] + lambda[1] * full[tri[1]] + lambda[2] * full[tri[2]];
}

namespace {

Scalar h1_error(const TriMesh& mesh, const Vector& full, const ScalarField& f,
                const VectorField& grad_f, int levels) {
  std::vector<Point2> grads(mesh.num_triangles());
  for (Index t = 0; t < mesh.num_triangles(); ++t) grads[t] = triangle_gradient(mesh, t, full);
  const Scalar sq = integrate_composite(mesh, levels, [&](Index t, const Point2& x) {
    const Scalar d = eval_p1(mesh, t, full, x) - f(x);
    return d * d + (grads[t] - grad_f(x)).squaredNorm();
  });
  return std::sqrt(std::max<Scalar>(sq, 0));
}

}  // namespace

ErrorReport compute_errors(const FeFunction& u, const FeFunction& y, const FeFunction& p,
                           Scalar objective, const ExactSolution& exact, int levels_u,
                           int levels) {
  if (!exact.u_bar || !exact.y_bar || !exact.p_bar || !exact.grad_y_bar || !exact.grad_p_bar) {
    throw InvalidParameter("compute_errors: exact solution is incomplete");
  }
  const TriMesh& mesh = *u.mesh;
  if (y.mesh != u.mesh || p.mesh != u.mesh) throw MeshMismatch("compute_errors: mesh mismatch");
  const Vector uf = to_full_space(u).coeffs;
  const Vector yf = to_full_space(y).coeffs;
  const Vector pf = to_full_space(p).coeffs;

  ErrorReport rep;
  rep.reference_kind = ReferenceKind::Exact;
  rep.e_j = std::abs(objective - exact.j_optimal);
  rep.e_u = integrate_composite(mesh, levels_u, [&](Index t, const Point2& x) {
    return std::abs(eval_p1(mesh, t, uf, x) - exact.u_bar(x));
  });
  rep.e_u_l2 = std::sqrt(integrate_composite(mesh, levels_u, [&](Index t, const Point2& x) {
    const Scalar d = eval_p1(mesh, t, uf, x) - exact.u_bar(x);
    return d * d;
  }));
  rep.e_y = h1_error(mesh, yf, exact.y_bar, exact.grad_y_bar, levels);
  rep.e_p = h1_error(mesh, pf, exact.p_bar, exact.grad_p_bar, levels);
  return rep;
}

ErrorReport compute_errors(const FeFunction& u, const FeFunction& y, const FeFunction& p,
                           Scalar objective, const FineReference& reference) {
  const MeshPtr& fine = reference.u.mesh;
  if (!fine || reference.y.mesh != fine || reference.p.mesh != fine) {
    throw InvalidParameter("compute_errors: fine-grid reference is incomplete");
  }
  auto diff = [&](const FeFunction& coarse, const FeFunction& ref) -> Vector {
    const Vector c = interpolate_nodal(coarse.mesh, to_full_space(coarse).coeffs, fine);
    return c - to_full_space(ref).coeffs;
  };
  const Vector du = diff(u, reference.u);
  const Vector dy = diff(y, reference.y);
  const Vector dp = diff(p, reference.p);
  const CsrMatrix mass = assemble_mass(*fine, Space::Full, Space::Full);
  const CsrMatrix h1 = assemble_h1_matrix(*fine);

  ErrorReport rep;
  rep.reference_kind = ReferenceKind::FineGrid;
  rep.e_j = std::abs(objective - reference.objective);
  rep.e_u = integrate_composite(*fine, 1, [&](Index t, const Point2& x) {
    return std::abs(eval_p1(*fine, t, du, x));
  });
  rep.e_u_l2 = std::sqrt(std::max<Scalar>(du.dot(mass * du), 0));
  rep.e_y = std::sqrt(std::max<Scalar>(dy.dot(h1 * dy), 0));
  rep.e_p = std::sqrt(std::max<Scalar>(dp.dot(h1 * dp), 0));
  return rep;
}

std::pair<Scalar, Scalar> compute_tau(const Discretization& disc, const StateAdjointPair& current,
                                      const StateAdjointPair& previous, const FeFunction& u_current,
                                      const FeFunction& u_previous, Scalar beta) {
  if (current.y.mesh != disc.mesh || previous.y.mesh != disc.mesh ||
      u_current.mesh != disc.mesh || u_previous.mesh != disc.mesh) {
    throw MeshMismatch("compute_tau: iterates live on different meshes");
  }
  if (!(beta > 0)) throw InvalidParameter("compute_tau: beta must be positive");
  const Vector dy = current.y.coeffs - previous.y.coeffs;
  const Vector dp = (current.p.coeffs - previous.p.coeffs) / beta;
  const Vector du = to_full_space(u_current).coeffs - to_full_space(u_previous).coeffs;
  const Scalar tau = std::sqrt(dy.dot(disc.h1_yy * dy) + dp.dot(disc.h1_yy * dp));
  const Scalar tau_u = std::sqrt(du.dot(*disc.mass_vv * du));
  return {tau, tau_u};
}

Scalar objective_value(const Discretization& disc, const ProblemSpec& problem, const FeFunction& u,
                       const SmoothingParams& params) {
  const TriMesh& mesh = *disc.mesh;
  const FeFunction uf = to_full_space(u);
  const Vector y = extend_by_zero(mesh, disc.state_factor.solve(disc.mass_yv * uf.coeffs));
  const Scalar fit = integrate_composite(mesh, 1, [&](Index t, const Point2& x) {
    const Scalar d = eval_p1(mesh, t, y, x) - problem.y_omega(x);
    return d * d;
  });
  return 0.5 * fit + params.beta * psi_delta_h(uf, params.delta) +
         0.5 * params.gamma * uf.coeffs.dot(disc.h1_vv * uf.coeffs);
}

std::string format_number(Scalar v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

void check_written(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace

void write_trace_csv(const std::string& path, const std::vector<PathTraceRow>& rows) {
  std::ofstream out = open_output(path);
  out << "i,gamma,delta,sigma,newton_steps,control_steps,objective,tau,tau_u,e_j,e_u,e_y,e_p\n";
  auto opt = [](const std::optional<Scalar>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.i << ',' << format_number(r.gamma) << ',' << format_number(r.delta) << ','
        << format_number(r.sigma) << ',' << r.newton_steps << ',' << r.control_steps << ','
        << format_number(r.objective) << ',' << opt(r.tau) << ',' << opt(r.tau_u) << ','
        << opt(r.e_j) << ',' << opt(r.e_u) << ',' << opt(r.e_y) << ',' << opt(r.e_p) << '\n';
  }
  check_written(out, path);
}

void write_field_vtk(const std::string& path, const TriMesh& mesh,
                     const std::vector<std::pair<std::string, FeFunction>>& fields) {
  for (const auto& [name, f] : fields) {
    if (f.mesh.get() != &mesh) throw MeshMismatch("write_field_vtk: field '" + name + "' on another mesh");
  }
  std::ofstream out = open_output(path);
  const Index nv = mesh.num_vertices(), nt = mesh.num_triangles();
  out << "# vtk DataFile Version 3.0\ntvpath fields\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << nv << " double\n";
  for (const auto& x : mesh.vertices()) {
    out << format_number(x.x()) << ' ' << format_number(x.y()) << " 0\n";
  }
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  out << "CELL_TYPES " << nt << '\n';
  for (Index t = 0; t < nt; ++t) out << "5\n";
  out << "POINT_DATA " << nv << '\n';
  for (const auto& [name, f] : fields) {
    const Vector full = to_full_space(f).coeffs;
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (Index v = 0; v < nv; ++v) out << format_number(full[v]) << '\n';
  }
  check_written(out, path);
}

}  // namespace tvpath
