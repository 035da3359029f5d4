#include "tvpath/sparse_linalg.hpp"

#include <algorithm>
#include <cmath>

namespace tvpath {

void SpdFactorization::factor(const CsrMatrix& a) {
  if (a.rows() != a.cols()) throw InvalidParameter("Cholesky factorization needs a square matrix");
  Eigen::SparseMatrix<Scalar> csc = a;
  csc.makeCompressed();
  const bool same_pattern =
      llt_ && dim_ == a.rows() &&
      std::equal(pattern_outer_.begin(), pattern_outer_.end(), csc.outerIndexPtr(),
                 csc.outerIndexPtr() + csc.outerSize() + 1) &&
      static_cast<Index>(pattern_inner_.size()) == csc.nonZeros() &&
      std::equal(pattern_inner_.begin(), pattern_inner_.end(), csc.innerIndexPtr());
  if (!same_pattern) {
    llt_ = std::make_shared<Llt>();
    llt_->analyzePattern(csc);
    dim_ = static_cast<Index>(a.rows());
    pattern_outer_.assign(csc.outerIndexPtr(), csc.outerIndexPtr() + csc.outerSize() + 1);
    pattern_inner_.assign(csc.innerIndexPtr(), csc.innerIndexPtr() + csc.nonZeros());
  } else if (llt_.use_count() > 1) {
    // Copies share the factor; never overwrite one that someone else still reads.
    llt_ = std::make_shared<Llt>();
    llt_->analyzePattern(csc);
  }
  llt_->factorize(csc);
  if (llt_->info() != Eigen::Success) {
    llt_.reset();
    throw NotPositiveDefinite("Cholesky factorization hit a non-positive pivot");
  }
}

Vector SpdFactorization::solve(const Vector& b) const {
  if (!llt_) throw Error("solve with an empty factorization");
  if (b.size() != dim_) throw InvalidParameter("spd_solve: right-hand side has wrong size");
  return llt_->solve(b);
}

SpdFactorization cholesky_factor(const CsrMatrix& a) { return SpdFactorization(a); }

Vector spd_solve(const SpdFactorization& factorization, const Vector& b) {
  return factorization.solve(b);
}

LinearOperator LinearOperator::identity(Index n) {
  return {n, [](const Vector& x) { return x; }};
}

LinearOperator LinearOperator::from_matrix(const CsrMatrix& a) {
  auto owned = std::make_shared<const CsrMatrix>(a);
  return {static_cast<Index>(a.rows()), [owned](const Vector& x) -> Vector { return *owned * x; }};
}

GmresResult gmres(const LinearOperator& op, const Vector& b, const LinearOperator& precond,
                  Scalar abs_tol, Scalar rel_tol, int max_iter) {
  const Index n = static_cast<Index>(b.size());
  if (op.dimension != n || precond.dimension != n) {
    throw InvalidParameter("gmres: operator and right-hand side dimensions differ");
  }

  GmresResult result;
  const Scalar beta = b.norm();
  const Scalar target = std::max(abs_tol, rel_tol * beta);
  result.history.push_back(beta);
  result.residual = beta;
  if (beta <= target || beta == 0) {
    result.x = Vector::Zero(n);
    result.converged = true;
    return result;
  }

  const int m = std::max(1, std::min<int>(max_iter, n));
  std::vector<Vector> basis;
  basis.reserve(static_cast<std::size_t>(m) + 1);
  basis.push_back(b / beta);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(m + 1, m);
  Vector cs = Vector::Zero(m), sn = Vector::Zero(m), g = Vector::Zero(m + 1);
  g[0] = beta;

  int k = 0;
  bool done = false;
  while (k < m && !done) {
    Vector w = op(precond(basis[k]));
    for (int pass = 0; pass < 2; ++pass) {
      for (int j = 0; j <= k; ++j) {
        const Scalar c = basis[j].dot(w);
        hess(j, k) += c;
        w -= c * basis[j];
      }
    }
    const Scalar wnorm = w.norm();
    hess(k + 1, k) = wnorm;

    for (int j = 0; j < k; ++j) {
      const Scalar t = cs[j] * hess(j, k) + sn[j] * hess(j + 1, k);
      hess(j + 1, k) = -sn[j] * hess(j, k) + cs[j] * hess(j + 1, k);
      hess(j, k) = t;
    }
    const Scalar rho = std::hypot(hess(k, k), hess(k + 1, k));
    cs[k] = rho == 0 ? 1 : hess(k, k) / rho;
    sn[k] = rho == 0 ? 0 : hess(k + 1, k) / rho;
    hess(k, k) = rho;
    hess(k + 1, k) = 0;
    g[k + 1] = -sn[k] * g[k];
    g[k] = cs[k] * g[k];

    ++k;
    const Scalar res = std::abs(g[k]);
    result.history.push_back(std::min(res, result.history.back()));
    result.residual = res;
    // Happy breakdown: the Krylov space is invariant and the iterate is exact.
    const bool breakdown = wnorm <= 1e-14 * beta;
    done = res <= target || breakdown;
    if (!done && k < m) basis.push_back(w / wnorm);
  }

  const Vector y = hess.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
  Vector z = Vector::Zero(n);
  for (int j = 0; j < k; ++j) z += y[j] * basis[j];
  result.x = precond(z);
  result.iterations = k;
  result.converged = result.residual <= target;
  return result;
}

}  // namespace tvpath
