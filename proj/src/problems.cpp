#include "sthp/problems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace sthp {

namespace {

ScalarField constant(double v) {
  return [v](double, double, double) { return v; };
}

} // namespace

ProblemDefinition interior_layer(double eps) {
  if (!(eps > 0.0))
    throw std::invalid_argument("interior_layer: eps must be positive");
  const double w = std::sqrt(5.0 * eps);
  const double s5 = std::sqrt(5.0);
  ProblemDefinition p;
  p.name = "interior_layer";
  p.epsilon = constant(eps);
  p.alpha = constant(1.0);
  p.velocity = [s5](double, double, double) {
    return std::array<double, 2>{1.0 / s5, 2.0 / s5};
  };
  auto exact = [w](double x, double y, double t) {
    return 0.5 * std::exp(3.0 * (t - 1.0)) * (1.0 - std::tanh((2.0 * x - y - 0.5) / w));
  };
  p.exact = exact;
  p.g = exact;
  p.u0 = [exact](double x, double y, double) { return exact(x, y, 0.0); };
  p.neumann = constant(0.0);
  p.f = [w, exact](double x, double y, double t) {
    const double z = (2.0 * x - y - 0.5) / w;
    const double th = std::tanh(z);
    const double sech2 = 1.0 - th * th;
    return 4.0 * exact(x, y, t) - std::exp(3.0 * (t - 1.0)) * sech2 * th;
  };
  p.time_profile = [](double t) { return std::exp(3.0 * (t - 1.0)); };
  p.resolve = [w](const Box& b) {
    const double s[4] = {2.0 * b.x0 - b.y0 - 0.5, 2.0 * b.x1 - b.y0 - 0.5,
                         2.0 * b.x0 - b.y1 - 0.5, 2.0 * b.x1 - b.y1 - 0.5};
    const double lo = *std::min_element(s, s + 4) / w;
    const double hi = *std::max_element(s, s + 4) / w;
    const double dist = lo > 0.0 ? lo : (hi < 0.0 ? -hi : 0.0);
    return dist < 14.0 && hi - lo > 1.5 + dist;
  };
  p.sample_near_feature = [w](double a, double b) {
    // point on the layer line shifted by up to 3 layer widths
    const double y = 0.1 + 0.8 * a;
    const double x = 0.5 * (y + 0.5) + 3.0 * w * (2.0 * b - 1.0);
    return std::array<double, 2>{x, y};
  };
  return p;
}

ProblemDefinition smooth_problem(double eps, std::array<double, 2> b, double alpha) {
  const double pi = std::numbers::pi;
  ProblemDefinition p;
  p.name = "smooth";
  p.epsilon = constant(eps);
  p.alpha = constant(alpha);
  p.velocity = [b](double, double, double) { return b; };
  auto exact = [pi](double x, double y, double t) {
    return (1.0 + t + t * t) * std::sin(pi * x) * std::sin(pi * y);
  };
  p.exact = exact;
  p.g = exact;
  p.u0 = [exact](double x, double y, double) { return exact(x, y, 0.0); };
  p.neumann = constant(0.0);
  p.f = [=](double x, double y, double t) {
    const double a = 1.0 + t + t * t;
    const double sx = std::sin(pi * x), sy = std::sin(pi * y);
    const double cx = std::cos(pi * x), cy = std::cos(pi * y);
    return (1.0 + 2.0 * t) * sx * sy + 2.0 * pi * pi * eps * a * sx * sy +
           a * pi * (b[0] * cx * sy + b[1] * sx * cy) + alpha * a * sx * sy;
  };
  return p;
}

ProblemDefinition exponential_in_time_problem(double eps) {
  ProblemDefinition p;
  p.name = "exp_time";
  p.epsilon = constant(eps);
  p.alpha = constant(0.0);
  p.velocity = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
  auto exact = [](double x, double y, double t) {
    return std::exp(t) * x * (1.0 - x) * y * (1.0 - y);
  };
  p.exact = exact;
  p.g = exact;
  p.u0 = [exact](double x, double y, double) { return exact(x, y, 0.0); };
  p.neumann = constant(0.0);
  p.f = [eps](double x, double y, double t) {
    const double xx = x * (1.0 - x), yy = y * (1.0 - y);
    return std::exp(t) * (xx * yy + 2.0 * eps * (xx + yy));
  };
  p.time_profile = [](double t) { return std::exp(t); };
  return p;
}

ProblemDefinition heat_problem(double eps, ScalarField u0) {
  ProblemDefinition p;
  p.name = "heat";
  p.epsilon = constant(eps);
  p.alpha = constant(0.0);
  p.velocity = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
  p.f = constant(0.0);
  p.g = constant(0.0);
  p.neumann = constant(0.0);
  p.u0 = std::move(u0);
  return p;
}

ProblemDefinition make_problem(const std::string& id, double eps) {
  if (id == "interior_layer")
    return interior_layer(eps);
  if (id == "smooth")
    return smooth_problem(eps, {0.6, 0.8}, 1.0);
  if (id == "exp_time")
    return exponential_in_time_problem(eps);
  throw std::invalid_argument("unknown problem '" + id + "'");
}

double manufactured_residual(const ProblemDefinition& problem, int samples,
                             unsigned seed, double length_scale) {
  if (!problem.has_exact())
    throw std::invalid_argument("manufactured_residual: problem has no exact solution");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto& u = problem.exact;
  const auto& d = problem.domain;
  const double hx = 2e-3 * length_scale;
  const double ht = 1e-3 * problem.end_time;

  auto first = [](double m2, double m1, double p1, double p2, double h) {
    return (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
  };
  auto second = [](double m2, double m1, double c, double p1, double p2, double h) {
    return (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
  };

  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    double x, y;
    if (problem.sample_near_feature && s % 2 == 1) {
      const auto pt = problem.sample_near_feature(unit(rng), unit(rng));
      x = pt[0];
      y = pt[1];
    } else {
      x = d.x0 + (d.x1 - d.x0) * (0.05 + 0.9 * unit(rng));
      y = d.y0 + (d.y1 - d.y0) * (0.05 + 0.9 * unit(rng));
    }
    const double t = problem.end_time * (0.05 + 0.9 * unit(rng));
    const double c = u(x, y, t);
    const double ut = first(u(x, y, t - 2 * ht), u(x, y, t - ht), u(x, y, t + ht),
                            u(x, y, t + 2 * ht), ht);
    const double ux0 = u(x - 2 * hx, y, t), ux1 = u(x - hx, y, t);
    const double ux2 = u(x + hx, y, t), ux3 = u(x + 2 * hx, y, t);
    const double uy0 = u(x, y - 2 * hx, t), uy1 = u(x, y - hx, t);
    const double uy2 = u(x, y + hx, t), uy3 = u(x, y + 2 * hx, t);
    const double ux = first(ux0, ux1, ux2, ux3, hx);
    const double uy = first(uy0, uy1, uy2, uy3, hx);
    const double lap = second(ux0, ux1, c, ux2, ux3, hx) + second(uy0, uy1, c, uy2, uy3, hx);
    const double eps = problem.epsilon(x, y, t);
    const auto b = problem.velocity(x, y, t);
    const double alpha = problem.alpha(x, y, t);
    const double f = problem.f(x, y, t);
    const double terms[] = {ut, eps * lap, b[0] * ux, b[1] * uy, alpha * c, f};
    double scale = 0.0;
    for (double v : terms)
      scale += std::abs(v);
    const double r = ut - eps * lap + b[0] * ux + b[1] * uy + alpha * c - f;
    worst = std::max(worst, std::abs(r) / std::max(scale, 1e-300));
  }
  return worst;
}

} // namespace sthp
