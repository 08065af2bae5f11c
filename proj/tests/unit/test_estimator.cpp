#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "sthp/estimator.hpp"
#include "sthp/goals.hpp"

using namespace sthp;

namespace {

// One enriched primal/adjoint solve, wired as in a DWR loop.
struct Fixture {
  Mesh mesh;
  TimeMesh tm;
  ProblemDefinition problem;
  DofMap ho;
  SparseMatrix mass, stiffness;
  SpaceTimeField f, j, u, z;
  Eigen::VectorXd u0h;

  Fixture(Mesh m, TimeMesh t, ProblemDefinition p) : mesh(std::move(m)), tm(std::move(t)),
                                                      problem(std::move(p)) {
    ho = build_dof_map(mesh, 1);
    mass = assemble_mass(mesh, ho);
    stiffness = assemble_stiffness(mesh, ho, problem, 0.0);
    const TimeMesh tu = shifted(tm, 1);
    f = assemble_rhs(mesh, ho, problem, tm, 1);
    const Eigen::VectorXd b0 = assemble_initial_load(mesh, ho, problem);
    SolverConfig cfg;
    cfg.outer.tolerance = 1e-13;
    cfg.outer.max_iterations = 400;
    SpaceTimeSolver solver(mass, stiffness, cfg);
    u = solver.solve_primal(tm, embed(f), b0);
    add_initial_term(f, tu, b0);
    j = point_goal_load(mesh, ho, tu, problem, Bump(0.4, 0.55, 0.2, problem.domain));
    z = solver.solve_adjoint(tm, embed(j));
    u0h = l2_projection(mass, b0);
  }

  SpaceTimeField embed(const SpaceTimeField& load) const {
    SpaceTimeField out;
    for (std::size_t n = 0; n < load.size(); ++n)
      out.push_back(load[n] * temporal_embedding(tm[n].k, tm[n].k + 1));
    return out;
  }

  EstimatorInput input() const {
    return {mesh, ho, tm, mass, stiffness, f, j, u, z, &u0h};
  }
};

Mesh mixed_mesh() {
  Mesh m(3, 3);
  m.refine({{4, 0}, {1, 1}});
  for (std::size_t c = 0; c < m.n_cells(); ++c)
    m.set_degree(c, {1 + static_cast<int>(c % 2), 1 + static_cast<int>(c % 3)});
  return m;
}

TimeMesh mixed_time() {
  TimeMesh t(1.0, 3, 1);
  t.set_degree(1, 2);
  t.set_degree(2, 0);
  return t;
}

ProblemDefinition constant_one() {
  ProblemDefinition p;
  p.name = "one";
  p.epsilon = [](double, double, double) { return 0.01; };
  p.alpha = p.f = p.neumann = [](double, double, double) { return 0.0; };
  p.g = p.u0 = p.exact = [](double, double, double) { return 1.0; };
  p.velocity = [](double, double, double) { return std::array<double, 2>{0.5, 0.25}; };
  return p;
}

} // namespace

TEST_CASE("effectivity examples") {
  CHECK(effectivity(1e-3, 1e-3) == 1.0);
  CHECK(effectivity(2e-3, 1e-3) == doctest::Approx(2.0));
  CHECK(effectivity(-2e-3, 1e-3) == doctest::Approx(2.0));
  CHECK(effectivity(1.0, 0.0) == std::numeric_limits<double>::infinity());
}

TEST_CASE("splitting identity for the isotropic error part") {
  const Fixture fx(mixed_mesh(), mixed_time(), smooth_problem(0.05, {1.0, 0.5}, 0.2));
  const auto rep = compute_indicators(fx.input());
  const double scale = std::abs(rep.eta_h1) + std::abs(rep.eta_h2) + std::abs(rep.eta_e);
  CHECK(std::abs(rep.eta_h1 + rep.eta_h2 - rep.eta_e - rep.eta_h_iso) < 1e-10 * scale);
  // localized indicators add up to the totals
  CHECK(rep.eta_h_high.col(0).sum() == doctest::Approx(rep.eta_h1).epsilon(1e-12));
  CHECK(rep.eta_tau_high.sum() == doctest::Approx(rep.eta_tau).epsilon(1e-12));
  CHECK(rep.eta_total == doctest::Approx(rep.eta_h + rep.eta_tau).epsilon(1e-14));
  CHECK(rep.eta_h_high.rows() == static_cast<Eigen::Index>(fx.mesh.n_cells()));
  CHECK(rep.eta_tau_low.size() == 3);
}

TEST_CASE("discrete solutions are galerkin orthogonal") {
  const Fixture fx(mixed_mesh(), mixed_time(), smooth_problem(0.05, {1.0, 0.5}, 0.2));
  CHECK(galerkin_orthogonality(fx.input(), 20, 3u) < 1e-10);
  CHECK(galerkin_orthogonality(fx.input(), 20, 4u, true) < 1e-10);
}

TEST_CASE("residual is linear in the test field") {
  const Fixture fx(mixed_mesh(), mixed_time(), smooth_problem(0.05, {1.0, 0.5}, 0.2));
  const TimeMesh tu = shifted(fx.tm, 1);
  // the interpolant-free test: residual of the restricted field
  const auto ru = restrict_field(fx.ho, Restriction::to_p, embed_in_time(fx.tm, fx.u, 1));
  const auto r = primal_residual(fx.mass, fx.stiffness, tu, fx.f, ru);
  double rn = 0.0;
  for (const auto& m : r)
    rn += m.squaredNorm();
  CHECK(rn > 0.0);
  std::mt19937 rng(2);
  std::normal_distribution<double> n;
  SpaceTimeField w1, w2, comb;
  for (const auto& s : tu.slabs()) {
    Eigen::MatrixXd a(fx.ho.n_dofs, s.k + 1), b(fx.ho.n_dofs, s.k + 1);
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      a.data()[i] = n(rng);
      b.data()[i] = n(rng);
    }
    w1.push_back(a);
    w2.push_back(b);
    comb.push_back(2.5 * a + b);
  }
  const double lhs = pairing(r, comb), rhs = 2.5 * pairing(r, w1) + pairing(r, w2);
  CHECK(std::abs(lhs - rhs) < 1e-12 * (std::abs(lhs) + 1.0));
}

TEST_CASE("indicators vanish for an exactly represented constant") {
  const Fixture fx(mixed_mesh(), mixed_time(), constant_one());
  const auto rep = compute_indicators(fx.input());
  CHECK(rep.eta_h_high.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(rep.eta_h_low.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(rep.eta_tau_high.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(rep.eta_tau_low.cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs(rep.eta_e) < 1e-10);
}

TEST_CASE("isotropic remainder decays faster under uniform refinement") {
  auto run = [](int n) {
    const Fixture fx(Mesh(n, n), TimeMesh(1.0, 4, 1), smooth_problem(0.1, {1.0, 0.5}, 0.0));
    const auto rep = compute_indicators(fx.input());
    return std::pair{std::abs(rep.eta_e), std::abs(rep.eta_h)};
  };
  const auto [e1, h1] = run(2);
  const auto [e2, h2] = run(4);
  CHECK(e2 / e1 < h2 / h1);
}

TEST_CASE("restriction and lifting of fields") {
  const Fixture fx(mixed_mesh(), mixed_time(), smooth_problem(0.05, {1.0, 0.5}, 0.2));
  const auto r = restrict_field(fx.ho, Restriction::to_p, fx.u);
  const auto rr = restrict_field(fx.ho, Restriction::to_p, r);
  for (std::size_t n = 0; n < r.size(); ++n)
    CHECK((r[n] - rr[n]).norm() < 1e-12 * (1.0 + r[n].norm()));
  // lifting keeps the Radau values and adds one temporal degree
  const auto l = lift_field(fx.tm, fx.u, &fx.u0h);
  for (std::size_t n = 0; n < l.size(); ++n)
    CHECK(l[n].cols() == fx.tm[n].k + 2);
}
