#pragma once

#include <array>
#include <functional>
#include <string>

#include "sthp/mesh.hpp"

namespace sthp {

using ScalarField = std::function<double(double x, double y, double t)>;
using VectorField = std::function<std::array<double, 2>(double x, double y, double t)>;

/// Axis-aligned box used to decide where data quadrature needs subdivision.
struct Box {
  double x0, x1, y0, y1;
};
using ResolvePredicate = std::function<bool(const Box&)>;

/// Coefficients and data of d_t u - div(eps grad u) + b.grad u + alpha u = f
/// with Dirichlet data g, Neumann flux u_N = eps grad u . n and u(0) = u_0.
struct ProblemDefinition {
  std::string name;
  Domain domain;
  double end_time = 1.0;
  ScalarField epsilon, alpha, f, g, neumann, u0;
  VectorField velocity;
  ScalarField exact; ///< empty when no closed form is known
  std::array<BoundaryKind, 4> boundary{BoundaryKind::dirichlet, BoundaryKind::dirichlet,
                                       BoundaryKind::dirichlet, BoundaryKind::dirichlet};
  /// If set, every data field factors as time_profile(t) * d(x, y, T) / time_profile(T).
  std::function<double(double)> time_profile;
  /// Boxes on which data integrals must be subdivided further.
  ResolvePredicate resolve;
  /// Maps two uniform numbers in [0,1) to a point near the solution's sharpest
  /// feature; used by the finite-difference self-check.
  std::function<std::array<double, 2>(double, double)> sample_near_feature;

  bool has_exact() const { return static_cast<bool>(exact); }
};

/// Interior layer along 2x - y = 1/2 transported along b = (1,2)/sqrt(5).
ProblemDefinition interior_layer(double eps);

/// u = (1 + t + t^2) sin(pi x) sin(pi y) with constant coefficients.
ProblemDefinition smooth_problem(double eps, std::array<double, 2> b, double alpha);

/// u = e^t x(1-x) y(1-y), pure diffusion; spatially in Q_2.
ProblemDefinition exponential_in_time_problem(double eps);

/// Heat equation without source on a user-chosen initial condition.
ProblemDefinition heat_problem(double eps, ScalarField u0);

ProblemDefinition make_problem(const std::string& id, double eps);

/// Max over sample points of |strong residual of exact u| / scale, using
/// fourth-order finite differences with steps tied to the problem's length
/// scale. Throws if the problem has no exact solution.
double manufactured_residual(const ProblemDefinition& problem, int samples,
                             unsigned seed, double length_scale);

} // namespace sthp
