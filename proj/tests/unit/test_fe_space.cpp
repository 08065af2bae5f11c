#include <doctest.h>

#include <cmath>
#include <random>

#include "sthp/fe_space.hpp"
#include "sthp/polynomials.hpp"
#include "sthp/quadrature.hpp"

using namespace sthp;

namespace {

// Nodal vector of a reference function on the degree-q element.
Eigen::VectorXd interpolate(Degree q, auto f) {
  const auto& e = reference_element(q);
  Eigen::VectorXd v(e.size());
  for (int j = 0; j <= q[1]; ++j)
    for (int i = 0; i <= q[0]; ++i)
      v(i + (q[0] + 1) * j) = f(e.basis[0].nodes()[i], e.basis[1].nodes()[j]);
  return v;
}

// Reference L2 inner product of two nodal degree-q vectors.
double inner(Degree q, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const auto& e = reference_element(q);
  const auto g = gauss_legendre(std::max(q[0], q[1]) + 2);
  double s = 0.0;
  std::vector<double> vx(q[0] + 1), vy(q[1] + 1);
  for (std::size_t qj = 0; qj < g.size(); ++qj)
    for (std::size_t qi = 0; qi < g.size(); ++qi) {
      e.basis[0].evaluate(g.nodes[qi], vx);
      e.basis[1].evaluate(g.nodes[qj], vy);
      double va = 0.0, vb = 0.0;
      for (int j = 0; j <= q[1]; ++j)
        for (int i = 0; i <= q[0]; ++i) {
          va += a(i + (q[0] + 1) * j) * vx[i] * vy[j];
          vb += b(i + (q[0] + 1) * j) * vx[i] * vy[j];
        }
      s += g.weights[qi] * g.weights[qj] * va * vb;
    }
  return s;
}

Eigen::VectorXd random_vector(int n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i)
    v(i) = d(rng);
  return v;
}

double factorial(int n) { return std::tgamma(n + 1.0); }

} // namespace

TEST_CASE("dof counts") {
  CHECK(dofs_per_cell({2, 3}) == 12);
  Mesh m(2, 2);
  CHECK(build_dof_map(m).n_dofs == 16);
  m.set_degree(0, {2, 3});
  const auto d = build_dof_map(m);
  CHECK(d.n_dofs == 12 + 3 * 4);
  CHECK(d.offset[1] == 12);
  const auto ho = build_dof_map(m, 1);
  CHECK(ho.n_dofs == 20 + 3 * 9);
  CHECK(ho.degree[0] == Degree{3, 4});
}

TEST_CASE("modal transform examples") {
  const Degree p{2, 3};
  const auto one = to_modal(p, interpolate(p, [](double, double) { return 1.0; }));
  CHECK(one(0) == doctest::Approx(1.0));
  CHECK(one.tail(one.size() - 1).cwiseAbs().maxCoeff() < 1e-13);
  const auto l = to_modal(p, interpolate(p, [](double x, double y) {
                            return legendre(2, x) * legendre(1, y);
                          }));
  for (int a2 = 0; a2 <= 3; ++a2)
    for (int a1 = 0; a1 <= 2; ++a1)
      CHECK(std::abs(l(a1 + 3 * a2) - (a1 == 2 && a2 == 1 ? 1.0 : 0.0)) < 1e-12);
  std::mt19937 rng(5);
  const auto v = random_vector(12, rng);
  CHECK((from_modal(p, to_modal(p, v)) - v).norm() < 1e-12);
}

TEST_CASE("isotropic restriction is the L2 projection") {
  std::mt19937 rng(9);
  for (int p1 = 1; p1 <= 4; ++p1)
    for (int p2 = 1; p2 <= 4; ++p2) {
      const Degree p{p1, p2}, q{p1 + 1, p2 + 1};
      const auto& r = restriction_matrix(p, Restriction::to_p);
      // v in Q_p is fixed
      const auto low = interpolate(q, [&](double x, double y) {
        return std::pow(x, p1) * std::pow(y, p2) - 0.3 * x + 1.0;
      });
      CHECK((r * low - low).norm() < 1e-11);
      // L_{p1+1}(x) is removed
      const auto top = interpolate(q, [&](double x, double) { return legendre(p1 + 1, x); });
      CHECK((r * top).norm() < 1e-11);
      // orthogonality of the remainder against Q_p
      const auto v = random_vector(dofs_per_cell(q), rng);
      const Eigen::VectorXd res = v - r * v;
      for (int b = 0; b <= p2; ++b)
        for (int a = 0; a <= p1; ++a) {
          const auto w = interpolate(q, [&](double x, double y) {
            return std::pow(x, a) * std::pow(y, b);
          });
          CHECK(std::abs(inner(q, res, w)) < 1e-11);
        }
    }
}

TEST_CASE("directional restrictions") {
  const Degree p{2, 3}, q{3, 4};
  const auto& r1 = restriction_matrix(p, Restriction::drop_x);
  const auto& r2 = restriction_matrix(p, Restriction::drop_y);
  const auto corner = interpolate(q, [](double x, double y) {
    return legendre(3, x) * legendre(4, y);
  });
  CHECK((r1 * corner).norm() < 1e-11);
  const auto side = interpolate(q, [](double x, double y) {
    return legendre(2, x) * legendre(4, y);
  });
  CHECK((r1 * side - side).norm() < 1e-11);
  std::mt19937 rng(1);
  const auto v = random_vector(dofs_per_cell(q), rng);
  CHECK((r1 * (r2 * v) - r2 * (r1 * v)).norm() < 1e-11);
  // R_{h,1} R_{h,2} removes both bands, more than R keeps
  const auto& r = restriction_matrix(p, Restriction::to_p);
  CHECK((r1 * (r2 * v) - r * v).norm() < 1e-11);
}

TEST_CASE("isotropic error operator") {
  const Degree p{1, 2}, q{2, 3};
  const auto& e = restriction_matrix(p, Restriction::iso_error);
  const auto low = interpolate(q, [](double x, double y) { return x * y * y + 2.0; });
  CHECK((e * low).norm() < 1e-11);
  const auto corner = interpolate(q, [](double x, double y) {
    return legendre(2, x) * legendre(3, y);
  });
  CHECK((e * corner - corner).norm() < 1e-11);
  const auto band = interpolate(q, [](double x, double y) {
    return legendre(2, x) * legendre(1, y) + legendre(0, x) * legendre(3, y);
  });
  CHECK((e * band).norm() < 1e-11);
}

TEST_CASE("isotropic error constant matches monomial fields") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> deg(1, 5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 20; ++trial) {
    const int p1 = deg(rng), p2 = deg(rng);
    const Degree p{p1, p2}, q{p1 + 1, p2 + 1};
    Eigen::MatrixXd c(p1 + 2, p2 + 2);
    for (Eigen::Index i = 0; i < c.size(); ++i)
      c.data()[i] = n(rng);
    const auto v = interpolate(q, [&](double x, double y) {
      double s = 0.0;
      for (int b = 0; b <= p2 + 1; ++b)
        for (int a = 0; a <= p1 + 1; ++a)
          s += c(a, b) * std::pow(x, a) * std::pow(y, b);
      return s;
    });
    const Eigen::VectorXd ev = restriction_matrix(p, Restriction::iso_error) * v;
    for (auto [h1, h2] : {std::pair{0.5, 0.125}, std::pair{1e-2, 3e-1}}) {
      const double norm = std::sqrt(inner(q, ev, ev) * h1 * h2 / 4.0);
      const double deriv = c(p1 + 1, p2 + 1) * factorial(p1 + 1) * factorial(p2 + 1) *
                           std::pow(2.0 / h1, p1 + 1) * std::pow(2.0 / h2, p2 + 1);
      const double rhs = iso_error_constant(p1, p2) * std::abs(deriv) * std::sqrt(h1 * h2) *
                         std::pow(h1, p1 + 1) * std::pow(h2, p2 + 1);
      CHECK(std::abs(norm - rhs) <= 1e-10 * rhs);
    }
  }
}

TEST_CASE("truncation keeps the lower modes") {
  const Degree q{3, 3};
  const auto v = interpolate(q, [](double x, double y) {
    return legendre(3, x) + legendre(1, x) * legendre(2, y) + 1.0;
  });
  const auto t = truncate_modal(q, v, 2, 3);
  const auto expect = interpolate(q, [](double x, double y) {
    return legendre(1, x) * legendre(2, y) + 1.0;
  });
  CHECK((t - expect).norm() < 1e-11);
}
