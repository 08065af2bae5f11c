#include <doctest.h>

#include <cmath>

#include "sthp/goals.hpp"
#include "sthp/quadrature.hpp"
#include "sthp/solver.hpp"

using namespace sthp;

namespace {

// Composite tensor Gauss over the bump's bounding square.
double integrate_bump(const Bump& b, const auto& weight) {
  const auto g = gauss_legendre(8);
  const int panels = 40;
  const double s = b.radius(), h = 2.0 * s / panels;
  double sum = 0.0;
  for (int i = 0; i < panels; ++i)
    for (int j = 0; j < panels; ++j) {
      const double x0 = b.xc() - s + i * h, y0 = b.yc() - s + j * h;
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t c = 0; c < g.size(); ++c) {
          const double x = x0 + 0.5 * h * (g.nodes[a] + 1.0);
          const double y = y0 + 0.5 * h * (g.nodes[c] + 1.0);
          sum += 0.25 * h * h * g.weights[a] * g.weights[c] * b(x, y) * weight(x, y);
        }
    }
  return sum;
}

// u = x y t, exactly representable with p = (1,1), k = 1.
ProblemDefinition bilinear_problem() {
  ProblemDefinition p;
  p.name = "bilinear";
  p.epsilon = p.alpha = p.f = p.g = p.neumann = p.u0 = [](double, double, double) { return 0.0; };
  p.velocity = [](double, double, double) { return std::array<double, 2>{0.0, 0.0}; };
  p.exact = [](double x, double y, double t) { return x * y * t; };
  return p;
}

// Nodal interpolant of the exact solution on (dofs, tm).
std::vector<Eigen::MatrixXd> interpolate(const Mesh& m, const DofMap& d, const TimeMesh& tm,
                                         const ProblemDefinition& p) {
  std::vector<Eigen::MatrixXd> v;
  for (const auto& s : tm.slabs()) {
    const auto tn = temporal_nodes(s.k);
    Eigen::MatrixXd vn(d.n_dofs, s.k + 1);
    for (std::size_t c = 0; c < m.n_cells(); ++c) {
      const auto& e = reference_element(d.degree[c]);
      const int n1 = d.degree[c][0] + 1;
      for (int b = 0; b <= d.degree[c][1]; ++b)
        for (int a = 0; a <= d.degree[c][0]; ++a) {
          const double x = m.origin(c, 0) + 0.5 * m.h(c, 0) * (e.basis[0].nodes()[a] + 1.0);
          const double y = m.origin(c, 1) + 0.5 * m.h(c, 1) * (e.basis[1].nodes()[b] + 1.0);
          for (int i = 0; i <= s.k; ++i)
            vn(d.offset[c] + a + n1 * b, i) =
                p.exact(x, y, s.t0 + 0.5 * s.tau() * (tn[i] + 1.0));
        }
    }
    v.push_back(vn);
  }
  return v;
}

} // namespace

TEST_CASE("goal names") {
  CHECK(parse_goal("l2") == GoalKind::l2_space_time);
  CHECK(parse_goal("point") == GoalKind::point_value);
  CHECK(parse_goal(goal_name(GoalKind::point_value)) == GoalKind::point_value);
  CHECK_THROWS(parse_goal("mean"));
}

TEST_CASE("regularized delta") {
  const Bump b(0.5, 0.5, 1.0 / 16.0, Domain{});
  CHECK(b(0.5, 0.5) == doctest::Approx(b.scale()).epsilon(1e-15));
  CHECK(b(0.5 + 1.0 / 16.0, 0.5) == 0.0);
  CHECK(b(0.6, 0.6) == 0.0);
  CHECK(integrate_bump(b, [](double, double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-8));
  // clipped support is renormalized over the domain
  const Bump edge(0.0, 0.5, 0.1, Domain{});
  CHECK(integrate_bump(edge, [](double x, double) { return x >= 0.0 ? 1.0 : 0.0; }) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS(Bump(0.5, 0.5, 0.0, Domain{}));
  CHECK_THROWS(Bump(2.0, 0.5, 0.1, Domain{}));
}

TEST_CASE("point goal on the layer line") {
  const auto p = interior_layer(1e-6);
  const Bump b(0.5, 0.5, 1.0 / 16.0, p.domain);
  CHECK(p.exact(0.5, 0.5, 1.0) == doctest::Approx(0.5));
  CHECK(point_goal_exact(p, b) == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("shrinking the delta converges quadratically") {
  const auto p = smooth_problem(0.1, {1.0, 0.0}, 0.0);
  const double u = p.exact(0.3, 0.4, p.end_time);
  const double e1 = std::abs(point_goal_exact(p, Bump(0.3, 0.4, 0.1, p.domain)) - u);
  const double e2 = std::abs(point_goal_exact(p, Bump(0.3, 0.4, 0.05, p.domain)) - u);
  CHECK(e2 < e1);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("point goal load sits on the terminal node") {
  Mesh m(4, 4);
  m.refine({{5, 0}});
  const auto d = build_dof_map(m, 1);
  TimeMesh tm(1.0, 3, 2);
  const auto p = interior_layer(1e-6);
  const Bump b(0.5, 0.5, 1.0 / 16.0, p.domain);
  const auto j = point_goal_load(m, d, tm, p, b);
  CHECK(j[0].norm() == 0.0);
  CHECK(j[1].norm() == 0.0);
  CHECK(j[2].leftCols(2).norm() == 0.0);
  const double dev = j[2].col(2).sum() - 1.0;
  INFO(dev);
  CHECK(std::abs(dev) < 1e-8);
}

TEST_CASE("l2 goal error and saturation") {
  const auto p = bilinear_problem();
  Mesh m(2, 2);
  const auto d = build_dof_map(m);
  const TimeMesh tm(1.0, 2, 1);
  const auto exact = interpolate(m, d, tm, p);
  CHECK(l2_error(m, d, tm, p, exact) < 1e-13);
  const auto sat = l2_goal(m, d, tm, shifted(tm, 1), p, exact);
  CHECK(sat.saturated);

  // a perturbed field: J(u) - J(v) is the error norm
  auto v = exact;
  v[1](3, 0) += 0.1;
  const auto g = l2_goal(m, d, tm, shifted(tm, 1), p, v);
  CHECK_FALSE(g.saturated);
  CHECK(g.error == doctest::Approx(l2_error(m, d, tm, p, v)).epsilon(1e-12));
  // J'(w) = (w, e) / |e| with w = exact - v gives |e|
  std::vector<Eigen::MatrixXd> diff;
  for (std::size_t n = 0; n < v.size(); ++n)
    diff.push_back(exact[n] - v[n]);
  CHECK(pairing(g.load, embed_in_time(tm, diff, 1)) == doctest::Approx(g.error).epsilon(1e-10));
}

TEST_CASE("shifted time mesh and embedding") {
  TimeMesh tm(1.0, 2, 1);
  tm.set_degree(1, 3);
  const auto s = shifted(tm, 1);
  CHECK(s[0].k == 2);
  CHECK(s[1].k == 4);
  std::vector<Eigen::MatrixXd> v{Eigen::MatrixXd::Ones(3, 2), Eigen::MatrixXd::Ones(3, 4)};
  const auto e = embed_in_time(tm, v, 1);
  CHECK(e[1].cols() == 5);
  CHECK((e[1] - Eigen::MatrixXd::Ones(3, 5)).norm() < 1e-13);
}
