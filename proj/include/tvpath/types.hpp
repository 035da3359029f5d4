#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <stdexcept>
#include <string>

namespace tvpath {

using Scalar = double;
using Index = int;

template <typename S>
using VectorX = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Vector2 = Eigen::Matrix<S, 2, 1>;
template <typename S>
using Matrix2 = Eigen::Matrix<S, 2, 2>;

using Vector = VectorX<Scalar>;
using Point2 = Vector2<Scalar>;

/// Compressed sparse row matrix; all finite-element operators use this layout.
using CsrMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor, Index>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class PointOutsideMesh : public Error {
 public:
  using Error::Error;
};

class NotPositiveDefinite : public Error {
 public:
  using Error::Error;
};

class MeshMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace tvpath
