#include "sthp/goals.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "sthp/quadrature.hpp"

namespace sthp {

GoalKind parse_goal(const std::string& id) {
  if (id == "l2-space-time" || id == "l2")
    return GoalKind::l2_space_time;
  if (id == "point-value" || id == "point")
    return GoalKind::point_value;
  throw std::invalid_argument("unknown goal '" + id + "'");
}

std::string goal_name(GoalKind kind) {
  return kind == GoalKind::l2_space_time ? "l2-space-time" : "point-value";
}

namespace {

double bump_shape(double r2) { return r2 >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - r2)); }

// Composite Gauss rule on a box, subdividing where resolve asks for it.
void box_rule(const Box& b, const QuadratureRule& g, const ResolvePredicate& resolve, int depth,
              std::vector<double>& x, std::vector<double>& y, std::vector<double>& w) {
  if (depth > 0 && resolve(b)) {
    const double xm = 0.5 * (b.x0 + b.x1), ym = 0.5 * (b.y0 + b.y1);
    box_rule({b.x0, xm, b.y0, ym}, g, resolve, depth - 1, x, y, w);
    box_rule({xm, b.x1, b.y0, ym}, g, resolve, depth - 1, x, y, w);
    box_rule({b.x0, xm, ym, b.y1}, g, resolve, depth - 1, x, y, w);
    box_rule({xm, b.x1, ym, b.y1}, g, resolve, depth - 1, x, y, w);
    return;
  }
  const double jx = 0.5 * (b.x1 - b.x0), jy = 0.5 * (b.y1 - b.y0);
  for (std::size_t j = 0; j < g.size(); ++j)
    for (std::size_t i = 0; i < g.size(); ++i) {
      x.push_back(b.x0 + jx * (g.nodes[i] + 1.0));
      y.push_back(b.y0 + jy * (g.nodes[j] + 1.0));
      w.push_back(jx * jy * g.weights[i] * g.weights[j]);
    }
}

ResolvePredicate either(const ResolvePredicate& a, const ResolvePredicate& b) {
  if (!a)
    return b;
  if (!b)
    return a;
  return [a, b](const Box& box) { return a(box) || b(box); };
}

// Values of a data field at points x times; separable fields are evaluated
// once in space.
Eigen::MatrixXd sample(const ScalarField& f, const std::function<double(double)>& profile,
                       double T, const std::vector<double>& x, const std::vector<double>& y,
                       const std::vector<double>& t) {
  const auto np = static_cast<Eigen::Index>(x.size());
  const auto nt = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd v(np, nt);
  if (profile) {
    Eigen::VectorXd s(np);
    for (Eigen::Index q = 0; q < np; ++q)
      s(q) = f(x[q], y[q], T);
    const double pT = profile(T);
    for (Eigen::Index j = 0; j < nt; ++j)
      v.col(j) = s * (profile(t[j]) / pT);
    return v;
  }
  for (Eigen::Index j = 0; j < nt; ++j)
    for (Eigen::Index q = 0; q < np; ++q)
      v(q, j) = f(x[q], y[q], t[j]);
  return v;
}

Eigen::MatrixXd time_basis(int k, const std::vector<double>& ref) {
  const LagrangeBasis1D b(temporal_nodes(k));
  Eigen::MatrixXd xi(ref.size(), k + 1);
  std::vector<double> vals(k + 1);
  for (std::size_t q = 0; q < ref.size(); ++q) {
    b.evaluate(ref[q], vals);
    for (int i = 0; i <= k; ++i)
      xi(q, i) = vals[i];
  }
  return xi;
}

int error_points(Degree p) { return std::max(std::max(p[0], p[1]) + 4, 6); }

} // namespace

Bump::Bump(double xc, double yc, double s, const Domain& domain) : xc_(xc), yc_(yc), s_(s) {
  if (!(s > 0.0))
    throw std::invalid_argument("Bump: radius must be positive");
  if (xc + s <= domain.x0 || xc - s >= domain.x1 || yc + s <= domain.y0 || yc - s >= domain.y1)
    throw std::invalid_argument("Bump: support lies outside the domain");
  double integral = 0.0;
  const bool inside = xc - s >= domain.x0 && xc + s <= domain.x1 && yc - s >= domain.y0 &&
                      yc + s <= domain.y1;
  if (inside) {
    const auto g = gauss_legendre(80).mapped(0.0, s);
    for (std::size_t q = 0; q < g.size(); ++q)
      integral += 2.0 * std::numbers::pi * g.weights[q] * g.nodes[q] *
                  bump_shape(g.nodes[q] * g.nodes[q] / (s * s));
  } else {
    std::vector<double> x, y, w;
    const Box b{std::max(xc - s, domain.x0), std::min(xc + s, domain.x1),
                std::max(yc - s, domain.y0), std::min(yc + s, domain.y1)};
    box_rule(b, gauss_legendre(16), [this](const Box& box) { return resolve(box); }, 8, x, y, w);
    for (std::size_t q = 0; q < w.size(); ++q)
      integral += w[q] * (*this)(x[q], y[q]);
  }
  alpha_ = 1.0 / integral;
}

double Bump::operator()(double x, double y) const {
  const double dx = x - xc_, dy = y - yc_;
  return alpha_ * bump_shape((dx * dx + dy * dy) / (s_ * s_));
}

bool Bump::resolve(const Box& b) const {
  const double cx = std::clamp(xc_, b.x0, b.x1), cy = std::clamp(yc_, b.y0, b.y1);
  const double dx = cx - xc_, dy = cy - yc_;
  if (dx * dx + dy * dy >= s_ * s_)
    return false;
  return std::max(b.x1 - b.x0, b.y1 - b.y0) > 0.25 * s_;
}

double point_goal_exact(const ProblemDefinition& problem, const Bump& bump) {
  if (!problem.has_exact())
    throw std::invalid_argument("point goal error needs an exact solution");
  const auto& d = problem.domain;
  const double s = bump.radius();
  const Box b{std::max(bump.xc() - s, d.x0), std::min(bump.xc() + s, d.x1),
              std::max(bump.yc() - s, d.y0), std::min(bump.yc() + s, d.y1)};
  std::vector<double> x, y, w;
  box_rule(b, gauss_legendre(16),
           either([&bump](const Box& box) { return bump.resolve(box); }, problem.resolve), 12,
           x, y, w);
  const double T = problem.end_time;
  double j = 0.0;
  for (std::size_t q = 0; q < w.size(); ++q)
    j += w[q] * bump(x[q], y[q]) * problem.exact(x[q], y[q], T);
  return j;
}

std::vector<Eigen::MatrixXd> point_goal_load(const Mesh& mesh, const DofMap& dofs,
                                             const TimeMesh& tm,
                                             const ProblemDefinition& problem,
                                             const Bump& bump) {
  dofs.check(mesh);
  std::vector<Eigen::MatrixXd> load;
  for (const auto& s : tm.slabs())
    load.push_back(Eigen::MatrixXd::Zero(dofs.n_dofs, s.k + 1));
  const auto resolve = either([&bump](const Box& box) { return bump.resolve(box); },
                              problem.resolve);
  const double r = bump.radius();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const double x0 = mesh.origin(c, 0), y0 = mesh.origin(c, 1);
    const Box box{x0, x0 + mesh.h(c, 0), y0, y0 + mesh.h(c, 1)};
    const double cx = std::clamp(bump.xc(), box.x0, box.x1);
    const double cy = std::clamp(bump.yc(), box.y0, box.y1);
    if (std::hypot(cx - bump.xc(), cy - bump.yc()) >= r)
      continue;
    const Degree p = dofs.degree[c];
    const auto cq = cell_data_quadrature(mesh, c, p, std::max(error_points(p), 12), resolve);
    Eigen::VectorXd v(cq.w.size());
    for (std::size_t q = 0; q < cq.w.size(); ++q)
      v(q) = cq.w[q] * bump(cq.x[q], cq.y[q]);
    load.back().col(tm.slabs().back().k).segment(dofs.offset[c], dofs.dofs(c)) =
        cq.phi.transpose() * v;
  }
  return load;
}

Eigen::MatrixXd evaluate_cell(const Eigen::MatrixXd& phi, const DofMap& dofs, std::size_t c,
                              const Eigen::MatrixXd& coeffs, int k,
                              const std::vector<double>& ref_times) {
  return phi * coeffs.middleRows(dofs.offset[c], dofs.dofs(c)) *
         time_basis(k, ref_times).transpose();
}

namespace {

// Exact solution at the quadrature points of one cell; the spatial factor of
// a separable field is evaluated once.
class CellSampler {
public:
  CellSampler(const ProblemDefinition& problem, const CellQuadrature& cq)
      : problem_(problem), cq_(cq) {
    if (problem.time_profile) {
      space_.resize(static_cast<Eigen::Index>(cq.x.size()));
      for (std::size_t q = 0; q < cq.x.size(); ++q)
        space_(q) = problem.exact(cq.x[q], cq.y[q], problem.end_time);
      space_ /= problem.time_profile(problem.end_time);
    }
  }
  Eigen::MatrixXd at(const std::vector<double>& t) const {
    if (!problem_.time_profile)
      return sample(problem_.exact, {}, problem_.end_time, cq_.x, cq_.y, t);
    Eigen::MatrixXd v(space_.size(), static_cast<Eigen::Index>(t.size()));
    for (std::size_t j = 0; j < t.size(); ++j)
      v.col(j) = space_ * problem_.time_profile(t[j]);
    return v;
  }

private:
  const ProblemDefinition& problem_;
  const CellQuadrature& cq_;
  Eigen::VectorXd space_;
};

// Squared space-time L2 error of v; with load set, also (u, phi xi) on ltm.
double l2_pass(const Mesh& mesh, const DofMap& dofs, const TimeMesh& vtm,
               const ProblemDefinition& problem, const std::vector<Eigen::MatrixXd>& v,
               const TimeMesh* ltm, std::vector<Eigen::MatrixXd>* load) {
  if (!problem.has_exact())
    throw std::invalid_argument("the L2 error needs an exact solution");
  dofs.check(mesh);
  double sum = 0.0;
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Degree p = dofs.degree[c];
    const auto cq = cell_data_quadrature(mesh, c, p, error_points(p), problem.resolve);
    const CellSampler exact(problem, cq);
    const Eigen::Map<const Eigen::VectorXd> w(cq.w.data(), cq.w.size());
    for (std::size_t n = 0; n < vtm.size(); ++n) {
      const auto& s = vtm[n];
      const auto ref = gauss_legendre(s.k + 4);
      const auto rule = ref.mapped(s.t0, s.t1);
      const Eigen::MatrixXd e = exact.at(rule.nodes) -
                                evaluate_cell(cq.phi, dofs, c, v[n], s.k, ref.nodes);
      const Eigen::Map<const Eigen::VectorXd> wt(rule.weights.data(), rule.weights.size());
      sum += w.transpose() * e.cwiseAbs2() * wt;
    }
    if (!load)
      continue;
    const Eigen::MatrixXd pw = cq.phi.transpose() * w.asDiagonal();
    for (std::size_t n = 0; n < ltm->size(); ++n) {
      const auto& s = (*ltm)[n];
      const auto ref = gauss_legendre(s.k + 4);
      const auto rule = ref.mapped(s.t0, s.t1);
      const Eigen::Map<const Eigen::VectorXd> wt(rule.weights.data(), rule.weights.size());
      (*load)[n].middleRows(dofs.offset[c], dofs.dofs(c)) +=
          pw * exact.at(rule.nodes) * wt.asDiagonal() * time_basis(s.k, ref.nodes);
    }
  }
  return sum;
}

} // namespace

double l2_error(const Mesh& mesh, const DofMap& dofs, const TimeMesh& vtm,
                const ProblemDefinition& problem, const std::vector<Eigen::MatrixXd>& v) {
  return std::sqrt(l2_pass(mesh, dofs, vtm, problem, v, nullptr, nullptr));
}

GoalData l2_goal(const Mesh& mesh, const DofMap& dofs, const TimeMesh& vtm,
                 const TimeMesh& ltm, const ProblemDefinition& problem,
                 const std::vector<Eigen::MatrixXd>& v) {
  GoalData g;
  for (const auto& s : ltm.slabs())
    g.load.push_back(Eigen::MatrixXd::Zero(dofs.n_dofs, s.k + 1));
  g.error = std::sqrt(l2_pass(mesh, dofs, vtm, problem, v, &ltm, &g.load));
  if (g.error < 1e-14) {
    g.saturated = true;
    for (auto& l : g.load)
      l.setZero();
    return g;
  }
  const SparseMatrix mass = assemble_mass(mesh, dofs);
  for (std::size_t n = 0; n < ltm.size(); ++n) {
    const auto& s = ltm[n];
    const Eigen::MatrixXd ve = v[n] * temporal_embedding(vtm[n].k, s.k).transpose();
    g.load[n] -= 0.5 * s.tau() * (mass * ve) * temporal_matrices(s.k).M;
    g.load[n] /= g.error;
  }
  return g;
}

TimeMesh shifted(const TimeMesh& tm, int shift) {
  auto slabs = tm.slabs();
  for (auto& s : slabs)
    s.k += shift;
  return TimeMesh(std::move(slabs));
}

std::vector<Eigen::MatrixXd> embed_in_time(const TimeMesh& tm,
                                           const std::vector<Eigen::MatrixXd>& v, int shift) {
  std::vector<Eigen::MatrixXd> out;
  out.reserve(v.size());
  for (std::size_t n = 0; n < v.size(); ++n)
    out.push_back(v[n] * temporal_embedding(tm[n].k, tm[n].k + shift).transpose());
  return out;
}

} // namespace sthp
