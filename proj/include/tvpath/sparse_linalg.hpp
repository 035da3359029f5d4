#pragma once

#include <Eigen/SparseCholesky>
#include <functional>
#include <memory>
#include <vector>

#include "tvpath/types.hpp"

namespace tvpath {

/// Sparse Cholesky factorization of an SPD matrix with a fill-reducing ordering.
///
/// The symbolic analysis is kept, so refactorizing a matrix with the same sparsity pattern
/// only repeats the numeric phase. Solves are const and may run concurrently.
class SpdFactorization {
 public:
  SpdFactorization() = default;
  explicit SpdFactorization(const CsrMatrix& a) { factor(a); }

  /// Throws NotPositiveDefinite when a pivot is not positive.
  void factor(const CsrMatrix& a);
  Vector solve(const Vector& b) const;

  Index dimension() const { return dim_; }
  bool empty() const { return !llt_; }

 private:
  using Llt = Eigen::SimplicialLLT<Eigen::SparseMatrix<Scalar>, Eigen::Lower,
                                   Eigen::AMDOrdering<Eigen::SparseMatrix<Scalar>::StorageIndex>>;
  std::shared_ptr<Llt> llt_;
  Index dim_ = 0;
  std::vector<Index> pattern_outer_;
  std::vector<Index> pattern_inner_;
};

SpdFactorization cholesky_factor(const CsrMatrix& a);
Vector spd_solve(const SpdFactorization& factorization, const Vector& b);

/// Matrix-free linear map of a fixed dimension.
struct LinearOperator {
  Index dimension = 0;
  std::function<Vector(const Vector&)> apply;

  Vector operator()(const Vector& x) const { return apply(x); }

  static LinearOperator identity(Index n);
  static LinearOperator from_matrix(const CsrMatrix& a);
};

struct GmresResult {
  Vector x;
  Scalar residual = 0;
  int iterations = 0;
  bool converged = false;
  /// Residual norm after each iteration, starting with ||b||.
  std::vector<Scalar> history;
};

/// Right-preconditioned GMRES without restarts. Arnoldi uses modified Gram-Schmidt with one
/// reorthogonalization pass. Stops once ||b - op(x)|| <= max(abs_tol, rel_tol ||b||); on
/// max_iter returns the last (best) iterate with converged = false.
GmresResult gmres(const LinearOperator& op, const Vector& b, const LinearOperator& precond,
                  Scalar abs_tol, Scalar rel_tol, int max_iter);

}  // namespace tvpath
