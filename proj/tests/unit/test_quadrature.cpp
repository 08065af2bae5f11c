#include <doctest.h>

#include <cmath>

#include "sthp/fe_space.hpp"
#include "sthp/polynomials.hpp"
#include "sthp/quadrature.hpp"

using namespace sthp;

namespace {

double integrate(const QuadratureRule& q, auto f) {
  double s = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    s += q.weights[i] * f(q.nodes[i]);
  return s;
}

double monomial_integral(int m) { return m % 2 ? 0.0 : 2.0 / (m + 1); }

} // namespace

TEST_CASE("gauss-legendre small rules") {
  const auto g1 = gauss_legendre(1);
  CHECK(g1.nodes[0] == doctest::Approx(0.0));
  CHECK(g1.weights[0] == doctest::Approx(2.0));
  const auto g2 = gauss_legendre(2);
  CHECK(std::abs(std::abs(g2.nodes[0]) - 1.0 / std::sqrt(3.0)) < 1e-15);
  CHECK(g2.weights[0] == doctest::Approx(1.0));
  CHECK(g2.weights[1] == doctest::Approx(1.0));
  CHECK(std::abs(integrate(gauss_legendre(5), [](double x) { return std::pow(x, 9); })) < 1e-14);
}

TEST_CASE("right radau small rules") {
  const auto r1 = gauss_radau_right(1);
  CHECK(r1.nodes[0] == 1.0);
  CHECK(r1.weights[0] == doctest::Approx(2.0));
  // brute force: w0 + w1 = 2, w0 x0 + w1 = 0, w0 x0^2 + w1 = 2/3
  const auto r2 = gauss_radau_right(2);
  CHECK(r2.nodes[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-14));
  CHECK(r2.nodes[1] == 1.0);
  CHECK(r2.weights[0] == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(r2.weights[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(std::abs(integrate(gauss_radau_right(3), [](double x) { return std::pow(x, 4); }) - 0.4) <
        1e-13);
}

TEST_CASE("gauss-lobatto small rules") {
  const auto l2 = gauss_lobatto(2);
  CHECK(l2.nodes[0] == -1.0);
  CHECK(l2.nodes[1] == 1.0);
  const auto l3 = gauss_lobatto(3);
  CHECK(l3.weights[0] == doctest::Approx(1.0 / 3.0));
  CHECK(l3.weights[1] == doctest::Approx(4.0 / 3.0));
  CHECK(std::abs(l3.nodes[1]) < 1e-15);
  const auto l4 = gauss_lobatto(4);
  CHECK(std::abs(std::abs(l4.nodes[1]) - 1.0 / std::sqrt(5.0)) < 1e-14);
}

TEST_CASE("exactness degree of every family") {
  for (int n = 1; n <= 12; ++n) {
    for (const auto& q : {gauss_legendre(n), gauss_radau_right(n)}) {
      double wsum = 0.0;
      for (double w : q.weights) {
        CHECK(w > 0.0);
        wsum += w;
      }
      CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
      for (int m = 0; m <= q.exactness_degree(); ++m) {
        const double v = integrate(q, [m](double x) { return std::pow(x, m); });
        CHECK(std::abs(v - monomial_integral(m)) < 1e-13);
      }
    }
    if (n >= 2) {
      const auto q = gauss_lobatto(n);
      CHECK(q.exactness_degree() == 2 * n - 3);
      for (int m = 0; m <= q.exactness_degree(); ++m)
        CHECK(std::abs(integrate(q, [m](double x) { return std::pow(x, m); }) -
                       monomial_integral(m)) < 1e-13);
    }
  }
  CHECK(gauss_legendre(4).exactness_degree() == 7);
  CHECK(gauss_radau_right(4).exactness_degree() == 6);
}

TEST_CASE("mapped rule integrates on [a,b]") {
  const auto q = gauss_legendre(4).mapped(0.5, 2.0);
  // int_{0.5}^{2} x^3 = (16 - 1/16) / 4
  CHECK(integrate(q, [](double x) { return x * x * x; }) ==
        doctest::Approx((16.0 - 1.0 / 16.0) / 4.0).epsilon(1e-14));
  CHECK_THROWS(gauss_legendre(0));
}

TEST_CASE("beta integral against quadrature") {
  CHECK(beta_integral(0) == doctest::Approx(2.0));
  CHECK(beta_integral(1) == doctest::Approx(4.0 / 3.0));
  for (int k = 0; k <= 6; ++k) {
    const double q = integrate(gauss_legendre(k + 1), [k](double x) {
      return std::pow(1.0 - x * x, k);
    });
    CHECK(std::abs(q - beta_integral(k)) < 1e-13);
    const double b = std::sqrt(std::acos(-1.0)) * std::tgamma(k + 1.0) / std::tgamma(k + 1.5);
    CHECK(std::abs(b - beta_integral(k)) < 1e-12);
  }
}

TEST_CASE("legendre values") {
  CHECK(legendre(0, 0.3) == 1.0);
  CHECK(legendre(2, 0.0) == doctest::Approx(-0.5));
  const auto g = gauss_legendre(4);
  CHECK(integrate(g, [](double x) { return legendre(3, x) * legendre(3, x); }) ==
        doctest::Approx(2.0 / 7.0).epsilon(1e-14));
  for (double x : {-1.0, -0.4, 0.2, 1.0})
    for (int k = 1; k <= 8; ++k) {
      const double h = 1e-6;
      const double fd = (legendre(k, x + h) - legendre(k, x - h)) / (2 * h);
      CHECK(legendre_derivative(k, x) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("lagrange bases are cardinal and tabulate agrees with evaluate") {
  for (int q = 0; q <= 9; ++q) {
    for (const auto& nodes : {spatial_nodes(q), temporal_nodes(q)}) {
      const LagrangeBasis1D b(nodes);
      for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t i = 0; i < nodes.size(); ++i)
          CHECK(std::abs(b.value(i, nodes[a]) - (a == i ? 1.0 : 0.0)) < 1e-12);
      Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);
      Eigen::MatrixXd v, d;
      b.tabulate(x, v, &d);
      std::vector<double> vv(nodes.size()), dd(nodes.size());
      for (int r = 0; r < x.size(); ++r) {
        b.evaluate(x(r), vv, dd);
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          CHECK(std::abs(v(r, i) - vv[i]) < 1e-13);
          CHECK(std::abs(d(r, i) - dd[i]) < 1e-10);
        }
      }
    }
  }
  CHECK(spatial_nodes(0) == std::vector<double>{0.0});
  CHECK(temporal_nodes(0) == std::vector<double>{1.0});
}
