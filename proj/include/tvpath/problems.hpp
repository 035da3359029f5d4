#pragma once

#include <functional>
#include <optional>
#include <string>

#include "tvpath/fem_assembly.hpp"

namespace tvpath {

using VectorField = std::function<Point2(const Point2&)>;

/// Closed-form optimal triple of the rotationally symmetric annulus benchmark.
struct ExactSolution {
  ScalarField u_bar;
  ScalarField y_bar;
  ScalarField p_bar;
  VectorField grad_y_bar;
  VectorField grad_p_bar;
  Scalar j_optimal = 0;
};

enum class DomainKind { Annulus, Square };

struct Domain {
  DomainKind kind = DomainKind::Square;
  /// Inner radius R of the annulus R < |x| < 2R; unused for the square [-1,1]^2.
  Scalar radius = 0;
};

struct ProblemSpec {
  std::string name;
  Domain domain;
  Scalar beta = 0;
  ScalarField y_omega;
  std::optional<ExactSolution> exact;
  StateCoefficients pde = StateCoefficients::laplacian();

  void validate() const;
};

/// Annulus R < |x| < 2R with the explicit optimal control 1 on R < |x| < 3R/2.
ProblemSpec example1(Scalar beta, Scalar radius = 2 * 3.14159265358979323846);

/// Optimal objective value of example1 for R = 2 pi, in closed form via the cosine integral.
Scalar example1_optimal_value(Scalar beta);

/// Ci(t) = -int_t^inf cos(s)/s ds for t > 0.
Scalar cosine_integral(Scalar t);

/// Square [-1,1]^2, beta = 1e-4 by default, desired state the indicator of (-1/2,1/2)^2
/// rotated counter-clockwise by rotation_degrees.
ProblemSpec example2(Scalar beta = 1e-4, Scalar rotation_degrees = 0);

namespace annulus_profile {

/// Radial profiles of example1; exposed for tests and diagnostics.
struct Constants {
  Scalar a, b, c;
};
Constants state_constants(Scalar radius);
Scalar y_bar(Scalar r, Scalar radius);
Scalar dy_bar(Scalar r, Scalar radius);
Scalar h_hat(Scalar r, Scalar radius, Scalar beta);
Scalar p_bar(Scalar r, Scalar radius, Scalar beta);
Scalar dp_bar(Scalar r, Scalar radius, Scalar beta);
/// Laplacian of p_bar in closed form.
Scalar laplace_p_bar(Scalar r, Scalar radius, Scalar beta);

}  // namespace annulus_profile

}  // namespace tvpath
