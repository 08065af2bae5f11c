#pragma once

#include <cstddef>
#include <vector>

namespace sthp {

enum class QuadratureKind { gauss_legendre, gauss_lobatto, gauss_radau_right };

/// One-dimensional quadrature rule on the reference interval [-1, 1].
struct QuadratureRule {
  QuadratureKind kind = QuadratureKind::gauss_legendre;
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }

  /// Highest polynomial degree integrated exactly.
  int exactness_degree() const;

  /// Rule mapped affinely onto [a, b].
  QuadratureRule mapped(double a, double b) const;
};

QuadratureRule gauss_legendre(int n);
QuadratureRule gauss_lobatto(int n);
/// Radau rule that contains the right endpoint +1.
QuadratureRule gauss_radau_right(int n);

/// Tensor rule on [-1,1]^2 (index = i + n1 * j).
struct QuadratureRule2D {
  std::vector<double> x, y, w;
  std::size_t size() const { return w.size(); }
};

QuadratureRule2D tensor(const QuadratureRule& qx, const QuadratureRule& qy);

} // namespace sthp
