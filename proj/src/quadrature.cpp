#include "sthp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sthp/polynomials.hpp"

namespace sthp {

namespace {

constexpr double newton_tolerance = 1e-15;
constexpr int newton_max_iterations = 100;

template <typename F, typename DF>
double newton(double x, F&& f, DF&& df) {
  for (int it = 0; it < newton_max_iterations; ++it) {
    const double dx = f(x) / df(x);
    x -= dx;
    if (std::abs(dx) < newton_tolerance)
      break;
  }
  return x;
}

void sort_rule(QuadratureRule& rule) {
  std::vector<std::size_t> order(rule.size());
  for (std::size_t i = 0; i < order.size(); ++i)
    order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return rule.nodes[a] < rule.nodes[b];
  });
  QuadratureRule sorted{rule.kind, {}, {}};
  for (auto i : order) {
    sorted.nodes.push_back(rule.nodes[i]);
    sorted.weights.push_back(rule.weights[i]);
  }
  rule = std::move(sorted);
}

} // namespace

int QuadratureRule::exactness_degree() const {
  const int n = static_cast<int>(size());
  switch (kind) {
  case QuadratureKind::gauss_legendre:
    return 2 * n - 1;
  case QuadratureKind::gauss_lobatto:
    return 2 * n - 3;
  case QuadratureKind::gauss_radau_right:
    return 2 * n - 2;
  }
  return 0;
}

QuadratureRule QuadratureRule::mapped(double a, double b) const {
  QuadratureRule out{kind, nodes, weights};
  const double half = 0.5 * (b - a);
  for (std::size_t i = 0; i < size(); ++i) {
    out.nodes[i] = a + half * (nodes[i] + 1.0);
    out.weights[i] = half * weights[i];
  }
  return out;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1)
    throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule rule{QuadratureKind::gauss_legendre, {}, {}};
  for (int j = 0; j < n; ++j) {
    const double guess = -std::cos(std::numbers::pi * (j + 0.75) / (n + 0.5));
    const double x = newton(
        guess, [n](double t) { return legendre(n, t); },
        [n](double t) { return legendre_derivative(n, t); });
    const double d = legendre_derivative(n, x);
    rule.nodes.push_back(x);
    rule.weights.push_back(2.0 / ((1.0 - x * x) * d * d));
  }
  sort_rule(rule);
  return rule;
}

QuadratureRule gauss_lobatto(int n) {
  if (n < 2)
    throw std::invalid_argument("gauss_lobatto: n must be >= 2");
  QuadratureRule rule{QuadratureKind::gauss_lobatto, {}, {}};
  const int m = n - 1;
  const double end_weight = 2.0 / (n * m);
  rule.nodes.push_back(-1.0);
  rule.weights.push_back(end_weight);
  for (int j = 1; j < m; ++j) {
    const double guess = -std::cos(std::numbers::pi * j / m);
    // Interior nodes are the roots of L'_m; L''_m from the Legendre ODE.
    const double x = newton(
        guess, [m](double t) { return legendre_derivative(m, t); },
        [m](double t) {
          return (2.0 * t * legendre_derivative(m, t) -
                  m * (m + 1.0) * legendre(m, t)) /
                 (1.0 - t * t);
        });
    const double l = legendre(m, x);
    rule.nodes.push_back(x);
    rule.weights.push_back(end_weight / (l * l));
  }
  rule.nodes.push_back(1.0);
  rule.weights.push_back(end_weight);
  sort_rule(rule);
  return rule;
}

QuadratureRule gauss_radau_right(int n) {
  if (n < 1)
    throw std::invalid_argument("gauss_radau_right: n must be >= 1");
  // Build the left rule (roots of L_{n-1} + L_n) and mirror it.
  QuadratureRule rule{QuadratureKind::gauss_radau_right, {}, {}};
  const double nn = static_cast<double>(n) * n;
  rule.nodes.push_back(1.0);
  rule.weights.push_back(2.0 / nn);
  for (int j = 1; j < n; ++j) {
    const double guess = -std::cos(2.0 * std::numbers::pi * j / (2.0 * n - 1.0));
    const double x = newton(
        guess, [n](double t) { return legendre(n - 1, t) + legendre(n, t); },
        [n](double t) {
          return legendre_derivative(n - 1, t) + legendre_derivative(n, t);
        });
    const double l = legendre(n - 1, x);
    rule.nodes.push_back(-x);
    rule.weights.push_back((1.0 - x) / (nn * l * l));
  }
  sort_rule(rule);
  return rule;
}

QuadratureRule2D tensor(const QuadratureRule& qx, const QuadratureRule& qy) {
  QuadratureRule2D out;
  for (std::size_t j = 0; j < qy.size(); ++j)
    for (std::size_t i = 0; i < qx.size(); ++i) {
      out.x.push_back(qx.nodes[i]);
      out.y.push_back(qy.nodes[j]);
      out.w.push_back(qx.weights[i] * qy.weights[j]);
    }
  return out;
}

} // namespace sthp
