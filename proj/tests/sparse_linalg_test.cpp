#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "tvpath/fem_assembly.hpp"
#include "tvpath/sparse_linalg.hpp"

using namespace tvpath;

namespace {

CsrMatrix to_sparse(const Eigen::MatrixXd& d) {
  CsrMatrix a = d.sparseView();
  a.makeCompressed();
  return a;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<Scalar> dist(-1, 1);
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
  }
  return a;
}

}  // namespace

TEST_CASE("Cholesky solves") {
  const Vector b = Vector::LinSpaced(5, -1, 3);
  CHECK((spd_solve(cholesky_factor(to_sparse(Eigen::MatrixXd::Identity(5, 5))), b) - b).norm() == 0);

  Eigen::Matrix2d small;
  small << 4, 1, 1, 3;
  const Vector x = spd_solve(cholesky_factor(to_sparse(small)), Vector((Vector(2) << 1, 2).finished()));
  CHECK(x[0] == doctest::Approx(1.0 / 11).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(7.0 / 11).epsilon(1e-14));

  std::mt19937_64 rng(23);
  const Eigen::MatrixXd a = random_matrix(rng, 50);
  const Eigen::MatrixXd spd = a.transpose() * a + Eigen::MatrixXd::Identity(50, 50);
  const Vector rhs = random_matrix(rng, 50).col(0);
  const Vector sol = spd_solve(cholesky_factor(to_sparse(spd)), rhs);
  CHECK((spd * sol - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("Cholesky rejects indefinite matrices and reuses the pattern") {
  Eigen::Matrix2d indefinite;
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(cholesky_factor(to_sparse(indefinite)), NotPositiveDefinite);

  const MeshPtr mesh = make_square_mesh(8);
  const CsrMatrix a = assemble_state_operator(*mesh, StateCoefficients::laplacian());
  SpdFactorization fac(a);
  const Vector b = Vector::Ones(a.rows());
  fac.factor(2 * a);
  CHECK((2 * a * fac.solve(b) - b).norm() < 1e-10 * b.norm());
  CHECK(fac.dimension() == a.rows());
}

TEST_CASE("GMRES small systems") {
  const Vector b = Vector::Ones(3);
  const GmresResult id = gmres(LinearOperator::identity(3), b, LinearOperator::identity(3), 1e-14, 1e-14, 10);
  CHECK(id.converged);
  CHECK(id.iterations == 1);
  CHECK((id.x - b).norm() < 1e-14);

  Eigen::Matrix3d diag = Eigen::Vector3d(1, 2, 3).asDiagonal();
  const GmresResult d = gmres(LinearOperator::from_matrix(to_sparse(diag)), b,
                              LinearOperator::identity(3), 1e-14, 1e-14, 10);
  CHECK(d.converged);
  CHECK(d.iterations <= 3);
  CHECK(d.x[0] == doctest::Approx(1));
  CHECK(d.x[1] == doctest::Approx(0.5));
  CHECK(d.x[2] == doctest::Approx(1.0 / 3));
}

TEST_CASE("GMRES on a random nonsymmetric system") {
  std::mt19937_64 rng(29);
  const int n = 30;
  const Eigen::MatrixXd a = 4 * Eigen::MatrixXd::Identity(n, n) + 0.5 * random_matrix(rng, n);
  const Vector b = random_matrix(rng, n).col(0);
  const GmresResult res = gmres(LinearOperator::from_matrix(to_sparse(a)), b,
                                LinearOperator::identity(n), 1e-10 * b.norm(), 1e-12, 30);
  CHECK(res.converged);
  CHECK(res.iterations <= 30);
  CHECK((a * res.x - b).norm() <= 1e-10 * b.norm() * 1.0001);
  const Vector exact = a.partialPivLu().solve(b);
  CHECK((res.x - exact).norm() < 1e-8 * exact.norm());
  for (std::size_t k = 1; k < res.history.size(); ++k) CHECK(res.history[k] <= res.history[k - 1] * (1 + 1e-12));

  // An exact preconditioner converges at once.
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const LinearOperator inverse{n, [&lu](const Vector& v) { return Vector(lu.solve(v)); }};
  const GmresResult pre = gmres(LinearOperator::from_matrix(to_sparse(a)), b, inverse, 1e-12, 1e-12, 30);
  CHECK(pre.converged);
  CHECK(pre.iterations <= 2);
}

TEST_CASE("GMRES reports max_iter without convergence") {
  std::mt19937_64 rng(31);
  const int n = 40;
  const Eigen::MatrixXd a = random_matrix(rng, n) + 0.1 * Eigen::MatrixXd::Identity(n, n);
  const Vector b = Vector::Ones(n);
  const GmresResult res = gmres(LinearOperator::from_matrix(to_sparse(a)), b,
                                LinearOperator::identity(n), 1e-15, 1e-15, 3);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 3);
  CHECK(res.residual <= b.norm());
}
