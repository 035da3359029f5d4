#pragma once

#include <cmath>

#include "tvpath/types.hpp"

namespace tvpath {

/// Pointwise density of the smoothed total variation, sqrt(delta + |v|^2).
template <typename S>
S tv_density(const Vector2<S>& v, S delta) {
  using std::sqrt;
  return sqrt(delta + v.squaredNorm());
}

/// Flux of the smoothed TV term, f(v) = beta v / sqrt(delta + |v|^2). |f(v)| < beta.
template <typename S>
Vector2<S> eval_f(const Vector2<S>& v, S delta, S beta) {
  return (beta / tv_density(v, delta)) * v;
}

/// Jacobian of eval_f: beta (I / s - v v^T / s^3) with s = sqrt(delta + |v|^2).
/// Symmetric positive semi-definite for delta > 0.
template <typename S>
Matrix2<S> eval_fprime(const Vector2<S>& v, S delta, S beta) {
  const S s = tv_density(v, delta);
  return (beta / s) * (Matrix2<S>::Identity() - (v * v.transpose()) / (s * s));
}

}  // namespace tvpath
