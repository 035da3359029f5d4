#include "tvpath/problems.hpp"

#include <cmath>
#include <numbers>

namespace tvpath {

namespace {

using std::numbers::pi;

template <typename F>
Scalar adaptive_simpson(const F& f, Scalar a, Scalar b, Scalar fa, Scalar fm, Scalar fb, Scalar whole,
                        Scalar tol, int depth) {
  const Scalar m = 0.5 * (a + b);
  const Scalar lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const Scalar flm = f(lm), frm = f(rm);
  const Scalar left = (m - a) / 6 * (fa + 4 * flm + fm);
  const Scalar right = (b - m) / 6 * (fm + 4 * frm + fb);
  const Scalar delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15 * tol) return left + right + delta / 15;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

template <typename F>
Scalar integrate(const F& f, Scalar a, Scalar b, Scalar tol) {
  const Scalar fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const Scalar whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

namespace annulus_profile {

Constants state_constants(Scalar radius) {
  const Scalar r2 = radius * radius;
  return {r2 / 8 * (18 * std::log(0.75) - 5) / std::log(0.25), 9 * r2 / 8 * (0.5 - std::log(0.75)),
          r2 / 8 * (18 * std::log(1.5) - 5) / std::log(0.25)};
}

Scalar y_bar(Scalar r, Scalar radius) {
  const auto k = state_constants(radius);
  const Scalar log_term = std::log(r / (2 * radius));
  return r < 1.5 * radius ? -r * r / 4 + k.a * log_term + k.b : k.c * log_term;
}

Scalar dy_bar(Scalar r, Scalar radius) {
  const auto k = state_constants(radius);
  return r < 1.5 * radius ? -r / 2 + k.a / r : k.c / r;
}

Scalar h_hat(Scalar r, Scalar radius, Scalar beta) {
  return beta / 2 * (std::cos(2 * pi * r / radius) - 1);
}

namespace {

// Derivatives of h_hat up to third order.
std::array<Scalar, 4> h_hat_derivatives(Scalar r, Scalar radius, Scalar beta) {
  const Scalar k = 2 * pi / radius;
  const Scalar c = std::cos(k * r), s = std::sin(k * r);
  return {beta / 2 * (c - 1), -beta * k / 2 * s, -beta * k * k / 2 * c, beta * k * k * k / 2 * s};
}

}  // namespace

Scalar p_bar(Scalar r, Scalar radius, Scalar beta) {
  const auto h = h_hat_derivatives(r, radius, beta);
  return h[1] + h[0] / r;
}

Scalar dp_bar(Scalar r, Scalar radius, Scalar beta) {
  const auto h = h_hat_derivatives(r, radius, beta);
  return h[2] + h[1] / r - h[0] / (r * r);
}

Scalar laplace_p_bar(Scalar r, Scalar radius, Scalar beta) {
  const auto h = h_hat_derivatives(r, radius, beta);
  const Scalar d2p = h[3] + h[2] / r - 2 * h[1] / (r * r) + 2 * h[0] / (r * r * r);
  return d2p + dp_bar(r, radius, beta) / r;
}

}  // namespace annulus_profile

void ProblemSpec::validate() const {
  if (!(beta > 0)) throw InvalidParameter("problem beta must be positive");
  if (!y_omega) throw InvalidParameter("problem has no desired state");
  if (exact.has_value() != (domain.kind == DomainKind::Annulus)) {
    throw InvalidParameter("exact solution is available exactly for the annulus benchmark");
  }
}

Scalar cosine_integral(Scalar t) {
  if (!(t > 0)) throw InvalidParameter("cosine_integral needs t > 0");
  auto integrand = [](Scalar s) { return s == 0 ? 0.0 : (std::cos(s) - 1) / s; };
  // Unit-length panels keep the oscillatory integrand well resolved for large t.
  const int panels = std::max(1, static_cast<int>(std::ceil(t)));
  Scalar sum = 0;
  for (int k = 0; k < panels; ++k) {
    const Scalar a = t * k / panels, b = t * (k + 1) / panels;
    sum += integrate(integrand, a, b, 1e-14 / panels);
  }
  return std::numbers::egamma + std::log(t) + sum;
}

Scalar example1_optimal_value(Scalar beta) {
  if (beta < 0) throw InvalidParameter("example1_optimal_value needs beta >= 0");
  const Scalar fit = pi / 4 *
                     (3 * pi * pi + std::log(8.0) + 15.0 / 4 * cosine_integral(2 * pi) -
                      27.0 / 4 * cosine_integral(4 * pi) + 3 * cosine_integral(8 * pi));
  return beta * beta * fit + 6 * pi * pi * beta;
}

ProblemSpec example1(Scalar beta, Scalar radius) {
  if (!(beta > 0) || !(radius > 0)) throw InvalidParameter("example1 needs beta > 0 and R > 0");
  namespace ap = annulus_profile;
  ExactSolution exact;
  exact.u_bar = [radius](const Point2& x) {
    const Scalar r = x.norm();
    return (r > radius && r < 1.5 * radius) ? 1.0 : 0.0;
  };
  exact.y_bar = [radius](const Point2& x) { return ap::y_bar(x.norm(), radius); };
  exact.p_bar = [radius, beta](const Point2& x) { return ap::p_bar(x.norm(), radius, beta); };
  exact.grad_y_bar = [radius](const Point2& x) -> Point2 {
    const Scalar r = x.norm();
    return ap::dy_bar(r, radius) / r * x;
  };
  exact.grad_p_bar = [radius, beta](const Point2& x) -> Point2 {
    const Scalar r = x.norm();
    return ap::dp_bar(r, radius, beta) / r * x;
  };
  if (std::abs(radius - 2 * pi) <= 1e-12 * radius) {
    exact.j_optimal = example1_optimal_value(beta);
  } else {
    // 1/2 ||Laplace p_bar||^2 over the annulus plus beta times the jump-circle perimeter.
    const Scalar fit = pi * integrate(
                                [&](Scalar r) {
                                  const Scalar l = ap::laplace_p_bar(r, radius, beta);
                                  return l * l * r;
                                },
                                radius, 2 * radius, 1e-16);
    exact.j_optimal = fit + beta * 3 * pi * radius;
  }

  ProblemSpec spec;
  spec.name = "example1";
  spec.domain = {DomainKind::Annulus, radius};
  spec.beta = beta;
  spec.y_omega = [radius, beta](const Point2& x) {
    const Scalar r = x.norm();
    return ap::laplace_p_bar(r, radius, beta) + ap::y_bar(r, radius);
  };
  spec.exact = std::move(exact);
  return spec;
}

ProblemSpec example2(Scalar beta, Scalar rotation_degrees) {
  if (!(beta > 0)) throw InvalidParameter("example2 needs beta > 0");
  const Scalar angle = rotation_degrees * pi / 180;
  const Scalar c = std::cos(angle), s = std::sin(angle);
  ProblemSpec spec;
  spec.name = "example2";
  spec.domain = {DomainKind::Square, 0};
  spec.beta = beta;
  spec.y_omega = [c, s](const Point2& x) {
    // Rotate the point back by the indicator's rotation angle.
    const Scalar xr = c * x.x() + s * x.y();
    const Scalar yr = -s * x.x() + c * x.y();
    return (std::abs(xr) < 0.5 && std::abs(yr) < 0.5) ? 1.0 : 0.0;
  };
  return spec;
}

}  // namespace tvpath
