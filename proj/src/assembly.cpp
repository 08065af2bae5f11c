#include "sthp/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "sthp/quadrature.hpp"

namespace sthp {

double penalty_gamma(int dir, const std::vector<FaceSide>& sides, double c_pen) {
  if (sides.empty() || sides.size() > 2)
    throw std::invalid_argument("penalty_gamma: a face has one or two sides");
  double sum = 0.0;
  for (const auto& s : sides) {
    const int pf = std::max(1, s.degree[1 - dir]);
    sum += pf * (pf + 1.0) / s.h_normal;
  }
  return 0.5 * c_pen * sum;
}

void tabulate_cell(const Mesh& mesh, std::size_t c, Degree p, const std::vector<double>& x,
                   const std::vector<double>& y, Eigen::MatrixXd* phi, Eigen::MatrixXd* dx,
                   Eigen::MatrixXd* dy) {
  const auto& e = reference_element(p);
  const int n1 = p[0] + 1, n2 = p[1] + 1;
  const double h1 = mesh.h(c, 0), h2 = mesh.h(c, 1);
  const double o1 = mesh.origin(c, 0), o2 = mesh.origin(c, 1);
  const auto np = static_cast<Eigen::Index>(x.size());
  if (phi)
    phi->resize(np, n1 * n2);
  if (dx)
    dx->resize(np, n1 * n2);
  if (dy)
    dy->resize(np, n1 * n2);
  Eigen::VectorXd rx(np), ry(np);
  for (Eigen::Index q = 0; q < np; ++q) {
    rx(q) = 2.0 * (x[q] - o1) / h1 - 1.0;
    ry(q) = 2.0 * (y[q] - o2) / h2 - 1.0;
  }
  const bool grad = dx || dy;
  Eigen::MatrixXd vx, dvx, vy, dvy;
  e.basis[0].tabulate(rx, vx, grad ? &dvx : nullptr);
  e.basis[1].tabulate(ry, vy, grad ? &dvy : nullptr);
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      const int l = i + n1 * j;
      if (phi)
        phi->col(l) = vx.col(i).cwiseProduct(vy.col(j));
      if (dx)
        dx->col(l) = (2.0 / h1) * dvx.col(i).cwiseProduct(vy.col(j));
      if (dy)
        dy->col(l) = (2.0 / h2) * vx.col(i).cwiseProduct(dvy.col(j));
    }
}

namespace {

void subdivide(const Box& b, const QuadratureRule& g, const ResolvePredicate& resolve,
               int depth, std::vector<double>& x, std::vector<double>& y,
               std::vector<double>& w) {
  if (depth > 0 && resolve && resolve(b)) {
    const double xm = 0.5 * (b.x0 + b.x1), ym = 0.5 * (b.y0 + b.y1);
    subdivide({b.x0, xm, b.y0, ym}, g, resolve, depth - 1, x, y, w);
    subdivide({xm, b.x1, b.y0, ym}, g, resolve, depth - 1, x, y, w);
    subdivide({b.x0, xm, ym, b.y1}, g, resolve, depth - 1, x, y, w);
    subdivide({xm, b.x1, ym, b.y1}, g, resolve, depth - 1, x, y, w);
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

// Same on a face segment; the box is degenerate in the normal direction.
void subdivide_segment(int dir, double pos, double s0, double s1, const QuadratureRule& g,
                       const ResolvePredicate& resolve, int depth,
                       std::vector<double>& x, std::vector<double>& y,
                       std::vector<double>& w) {
  const Box b = dir == 0 ? Box{pos, pos, s0, s1} : Box{s0, s1, pos, pos};
  if (depth > 0 && resolve && resolve(b)) {
    const double sm = 0.5 * (s0 + s1);
    subdivide_segment(dir, pos, s0, sm, g, resolve, depth - 1, x, y, w);
    subdivide_segment(dir, pos, sm, s1, g, resolve, depth - 1, x, y, w);
    return;
  }
  const double js = 0.5 * (s1 - s0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double s = s0 + js * (g.nodes[i] + 1.0);
    x.push_back(dir == 0 ? pos : s);
    y.push_back(dir == 0 ? s : pos);
    w.push_back(js * g.weights[i]);
  }
}

int max_degree(Degree p) { return std::max(p[0], p[1]); }

int data_points(Degree p) { return std::max(max_degree(p) + 4, 6); }

struct FacePoints {
  std::vector<double> x, y, w;
};

FacePoints face_gauss(const Face& f, int n) {
  const auto g = gauss_legendre(n).mapped(f.s0, f.s1);
  FacePoints fp;
  for (std::size_t i = 0; i < g.size(); ++i) {
    fp.x.push_back(f.dir == 0 ? f.position : g.nodes[i]);
    fp.y.push_back(f.dir == 0 ? g.nodes[i] : f.position);
    fp.w.push_back(g.weights[i]);
  }
  return fp;
}

// Boundary face quantities used by both the bilinear form and the loads.
struct BoundaryData {
  int c;
  Eigen::MatrixXd phi, dn;
  Eigen::VectorXd eps, bn;
  double gamma_eps; // gamma_F * max eps
};

BoundaryData boundary_data(const Mesh& mesh, const DofMap& dofs, const Face& f,
                           const ProblemDefinition& problem, const FacePoints& fp,
                           double c_pen) {
  BoundaryData d;
  d.c = f.cell[0] >= 0 ? f.cell[0] : f.cell[1];
  const double o = f.cell[1] < 0 ? 1.0 : -1.0;
  const Degree p = dofs.degree[d.c];
  Eigen::MatrixXd dx, dy;
  tabulate_cell(mesh, d.c, p, fp.x, fp.y, &d.phi, &dx, &dy);
  d.dn = o * (f.dir == 0 ? dx : dy);
  const auto n = static_cast<Eigen::Index>(fp.w.size());
  d.eps.resize(n);
  d.bn.resize(n);
  for (Eigen::Index q = 0; q < n; ++q) {
    d.eps(q) = problem.epsilon(fp.x[q], fp.y[q], 0.0);
    d.bn(q) = o * problem.velocity(fp.x[q], fp.y[q], 0.0)[f.dir];
  }
  const double gamma = penalty_gamma(f.dir, {{p, mesh.h(d.c, f.dir)}}, c_pen);
  d.gamma_eps = gamma * d.eps.maxCoeff();
  return d;
}

Eigen::Map<const Eigen::VectorXd> as_vector(const std::vector<double>& v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

} // namespace

CellQuadrature cell_data_quadrature(const Mesh& mesh, std::size_t c, Degree p, int n,
                                    const ResolvePredicate& resolve, int max_depth) {
  CellQuadrature cq;
  const Box b{mesh.origin(c, 0), mesh.origin(c, 0) + mesh.h(c, 0), mesh.origin(c, 1),
              mesh.origin(c, 1) + mesh.h(c, 1)};
  subdivide(b, gauss_legendre(n), resolve, max_depth, cq.x, cq.y, cq.w);
  tabulate_cell(mesh, c, p, cq.x, cq.y, &cq.phi);
  return cq;
}

BlockPattern::BlockPattern(const Mesh& mesh, const DofMap& dofs, bool couple_neighbours)
    : dofs_(dofs) {
  dofs.check(mesh);
  const auto nc = mesh.n_cells();
  columns_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c)
    columns_[c].push_back(static_cast<int>(c));
  if (couple_neighbours)
    for (const auto& f : mesh.faces())
      if (!f.is_boundary()) {
        columns_[f.cell[0]].push_back(f.cell[1]);
        columns_[f.cell[1]].push_back(f.cell[0]);
      }
  prefix_.resize(nc);
  row_length_.resize(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    auto& cols = columns_[c];
    std::sort(cols.begin(), cols.end());
    cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
    int acc = 0;
    for (int k : cols) {
      prefix_[c].push_back(acc);
      acc += dofs.dofs(k);
    }
    row_length_[c] = acc;
  }
}

SparseMatrix BlockPattern::make_matrix() const {
  const int n = dofs_.n_dofs;
  SparseMatrix m(n, n);
  long nnz = 0;
  for (std::size_t c = 0; c < columns_.size(); ++c)
    nnz += static_cast<long>(dofs_.dofs(c)) * row_length_[c];
  m.resizeNonZeros(nnz);
  auto* outer = m.outerIndexPtr();
  auto* inner = m.innerIndexPtr();
  long pos = 0;
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const int rows = dofs_.dofs(c);
    for (int i = 0; i < rows; ++i) {
      outer[dofs_.offset[c] + i] = static_cast<int>(pos);
      for (int k : columns_[c]) {
        const int off = dofs_.offset[k];
        for (int j = 0; j < dofs_.dofs(k); ++j)
          inner[pos++] = off + j;
      }
    }
  }
  outer[n] = static_cast<int>(pos);
  std::fill(m.valuePtr(), m.valuePtr() + nnz, 0.0);
  return m;
}

void BlockPattern::add_block(SparseMatrix& m, int r, int c, const Eigen::MatrixXd& block) const {
  const auto& cols = columns_[r];
  const auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c)
    throw std::logic_error("BlockPattern: block outside the sparsity pattern");
  const int base = prefix_[r][it - cols.begin()];
  double* values = m.valuePtr();
  const int* outer = m.outerIndexPtr();
  for (Eigen::Index i = 0; i < block.rows(); ++i) {
    double* row = values + outer[dofs_.offset[r] + i] + base;
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      row[j] += block(i, j);
  }
}

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs) {
  BlockPattern pattern(mesh, dofs, false);
  SparseMatrix m = pattern.make_matrix();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Degree p = dofs.degree[c];
    const auto g = tensor(gauss_legendre(max_degree(p) + 2), gauss_legendre(max_degree(p) + 2));
    std::vector<double> x(g.size()), y(g.size());
    Eigen::VectorXd w(g.size());
    const double h1 = mesh.h(c, 0), h2 = mesh.h(c, 1);
    for (std::size_t q = 0; q < g.size(); ++q) {
      x[q] = mesh.origin(c, 0) + 0.5 * h1 * (g.x[q] + 1.0);
      y[q] = mesh.origin(c, 1) + 0.5 * h2 * (g.y[q] + 1.0);
      w(q) = 0.25 * h1 * h2 * g.w[q];
    }
    Eigen::MatrixXd phi;
    tabulate_cell(mesh, c, p, x, y, &phi);
    pattern.add_block(m, static_cast<int>(c), static_cast<int>(c),
                      phi.transpose() * w.asDiagonal() * phi);
  }
  return m;
}

SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const ProblemDefinition& problem, double t,
                                const PenaltyConfig& penalty) {
  BlockPattern pattern(mesh, dofs, true);
  SparseMatrix m = pattern.make_matrix();

  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Degree p = dofs.degree[c];
    const auto g = tensor(gauss_legendre(max_degree(p) + 2), gauss_legendre(max_degree(p) + 2));
    const auto nq = static_cast<Eigen::Index>(g.size());
    std::vector<double> x(nq), y(nq);
    Eigen::VectorXd w(nq), we(nq), wa(nq), wb1(nq), wb2(nq);
    const double h1 = mesh.h(c, 0), h2 = mesh.h(c, 1);
    for (Eigen::Index q = 0; q < nq; ++q) {
      x[q] = mesh.origin(c, 0) + 0.5 * h1 * (g.x[q] + 1.0);
      y[q] = mesh.origin(c, 1) + 0.5 * h2 * (g.y[q] + 1.0);
      w(q) = 0.25 * h1 * h2 * g.w[q];
      const auto b = problem.velocity(x[q], y[q], t);
      we(q) = w(q) * problem.epsilon(x[q], y[q], t);
      wa(q) = w(q) * problem.alpha(x[q], y[q], t);
      wb1(q) = w(q) * b[0];
      wb2(q) = w(q) * b[1];
    }
    Eigen::MatrixXd phi, dx, dy;
    tabulate_cell(mesh, c, p, x, y, &phi, &dx, &dy);
    Eigen::MatrixXd k = dx.transpose() * we.asDiagonal() * dx +
                        dy.transpose() * we.asDiagonal() * dy -
                        (wb1.asDiagonal() * dx + wb2.asDiagonal() * dy).transpose() * phi +
                        phi.transpose() * wa.asDiagonal() * phi;
    pattern.add_block(m, static_cast<int>(c), static_cast<int>(c), k);
  }

  for (const auto& f : mesh.faces()) {
    if (f.is_boundary()) {
      const int c = f.cell[0] >= 0 ? f.cell[0] : f.cell[1];
      const auto fp = face_gauss(f, max_degree(dofs.degree[c]) + 2);
      const auto d = boundary_data(mesh, dofs, f, problem, fp, penalty.c_pen);
      const auto w = as_vector(fp.w);
      Eigen::MatrixXd k;
      if (mesh.boundary_kind(f.side) == BoundaryKind::dirichlet) {
        const Eigen::VectorXd we = w.cwiseProduct(d.eps);
        const Eigen::VectorXd wp =
            w.cwiseProduct((d.gamma_eps + d.bn.array().max(0.0).matrix().array()).matrix());
        k = -d.phi.transpose() * we.asDiagonal() * d.dn -
            d.dn.transpose() * we.asDiagonal() * d.phi +
            d.phi.transpose() * wp.asDiagonal() * d.phi;
      } else {
        const Eigen::VectorXd wp = w.cwiseProduct(d.bn.cwiseMax(0.0));
        k = d.phi.transpose() * wp.asDiagonal() * d.phi;
      }
      pattern.add_block(m, c, c, k);
      continue;
    }

    const int n = std::max(max_degree(dofs.degree[f.cell[0]]),
                           max_degree(dofs.degree[f.cell[1]])) + 2;
    const auto fp = face_gauss(f, n);
    const auto w = as_vector(fp.w);
    std::array<Eigen::MatrixXd, 2> phi, dn;
    for (int s = 0; s < 2; ++s) {
      Eigen::MatrixXd dx, dy;
      tabulate_cell(mesh, f.cell[s], dofs.degree[f.cell[s]], fp.x, fp.y, &phi[s], &dx, &dy);
      dn[s] = f.dir == 0 ? dx : dy;
    }
    const auto nq = w.size();
    Eigen::VectorXd eps(nq), bn(nq);
    for (Eigen::Index q = 0; q < nq; ++q) {
      eps(q) = problem.epsilon(fp.x[q], fp.y[q], t);
      bn(q) = problem.velocity(fp.x[q], fp.y[q], t)[f.dir];
    }
    const double gamma = penalty_gamma(
        f.dir,
        {{dofs.degree[f.cell[0]], mesh.h(f.cell[0], f.dir)},
         {dofs.degree[f.cell[1]], mesh.h(f.cell[1], f.dir)}},
        penalty.c_pen);
    const Eigen::VectorXd sigma = (gamma * eps.maxCoeff() + 0.5 * bn.array().abs()).matrix();
    const Eigen::VectorXd we = w.cwiseProduct(eps);
    const double sign[2] = {1.0, -1.0};
    for (int b = 0; b < 2; ++b)
      for (int a = 0; a < 2; ++a) {
        const Eigen::VectorXd wv =
            w.cwiseProduct(sign[a] * sign[b] * sigma + 0.5 * sign[b] * bn);
        Eigen::MatrixXd k = phi[b].transpose() * wv.asDiagonal() * phi[a] -
                            0.5 * sign[b] * phi[b].transpose() * we.asDiagonal() * dn[a] -
                            0.5 * sign[a] * dn[b].transpose() * we.asDiagonal() * phi[a];
        pattern.add_block(m, f.cell[b], f.cell[a], k);
      }
  }
  return m;
}

Eigen::VectorXd assemble_initial_load(const Mesh& mesh, const DofMap& dofs,
                                      const ProblemDefinition& problem) {
  dofs.check(mesh);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dofs.n_dofs);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Degree p = dofs.degree[c];
    const auto cq = cell_data_quadrature(mesh, c, p, data_points(p), problem.resolve);
    Eigen::VectorXd v(cq.w.size());
    for (std::size_t q = 0; q < cq.w.size(); ++q)
      v(q) = cq.w[q] * problem.u0(cq.x[q], cq.y[q], 0.0);
    b.segment(dofs.offset[c], dofs.dofs(c)) = cq.phi.transpose() * v;
  }
  return b;
}

QuadratureRule slab_time_rule(const TimeSlab& slab) {
  return gauss_legendre(slab.k + 3).mapped(slab.t0, slab.t1);
}

std::vector<Eigen::MatrixXd> assemble_rhs(const Mesh& mesh, const DofMap& dofs,
                                          const ProblemDefinition& problem,
                                          const TimeMesh& time_mesh, int temporal_shift,
                                          const PenaltyConfig& penalty) {
  dofs.check(mesh);
  const bool separable = static_cast<bool>(problem.time_profile);
  const double T = time_mesh.end_time();

  // data evaluation times and, per slab, the weights mapping them to the
  // temporal test functions
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> weights;
  std::vector<std::size_t> first;
  for (const auto& slab : time_mesh.slabs()) {
    const int kk = slab.k + temporal_shift;
    const LagrangeBasis1D tb(temporal_nodes(kk));
    const auto rule = slab_time_rule(slab);
    const auto ref = gauss_legendre(slab.k + 3);
    Eigen::MatrixXd wn(separable ? 1 : rule.size(), kk + 1);
    wn.setZero();
    std::vector<double> xi(kk + 1);
    first.push_back(times.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      tb.evaluate(ref.nodes[q], xi);
      const double s = separable ? problem.time_profile(rule.nodes[q]) / problem.time_profile(T)
                                 : 1.0;
      const auto row = separable ? 0 : static_cast<Eigen::Index>(q);
      for (int i = 0; i <= kk; ++i)
        wn(row, i) += rule.weights[q] * s * xi[i];
      if (!separable)
        times.push_back(rule.nodes[q]);
    }
    weights.push_back(std::move(wn));
  }
  if (separable) {
    times = {T};
    std::fill(first.begin(), first.end(), 0);
  }
  const auto nt = static_cast<Eigen::Index>(times.size());

  Eigen::MatrixXd load = Eigen::MatrixXd::Zero(dofs.n_dofs, nt);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const Degree p = dofs.degree[c];
    const auto cq = cell_data_quadrature(mesh, c, p, data_points(p), problem.resolve);
    Eigen::MatrixXd v(cq.w.size(), nt);
    for (Eigen::Index j = 0; j < nt; ++j)
      for (std::size_t q = 0; q < cq.w.size(); ++q)
        v(q, j) = cq.w[q] * problem.f(cq.x[q], cq.y[q], times[j]);
    load.middleRows(dofs.offset[c], dofs.dofs(c)) += cq.phi.transpose() * v;
  }

  for (const auto& f : mesh.faces()) {
    if (!f.is_boundary())
      continue;
    const int c = f.cell[0] >= 0 ? f.cell[0] : f.cell[1];
    FacePoints fp;
    subdivide_segment(f.dir, f.position, f.s0, f.s1, gauss_legendre(data_points(dofs.degree[c])),
                      problem.resolve, 14, fp.x, fp.y, fp.w);
    const auto d = boundary_data(mesh, dofs, f, problem, fp, penalty.c_pen);
    const auto w = as_vector(fp.w);
    const auto nq = w.size();
    Eigen::MatrixXd data(nq, nt);
    const bool dirichlet = mesh.boundary_kind(f.side) == BoundaryKind::dirichlet;
    for (Eigen::Index j = 0; j < nt; ++j)
      for (Eigen::Index q = 0; q < nq; ++q)
        data(q, j) = dirichlet ? problem.g(fp.x[q], fp.y[q], times[j])
                               : problem.neumann(fp.x[q], fp.y[q], times[j]);
    Eigen::MatrixXd contrib;
    if (dirichlet) {
      const Eigen::VectorXd we = w.cwiseProduct(d.eps);
      const Eigen::VectorXd wp =
          w.cwiseProduct((d.gamma_eps + (-d.bn.array()).max(0.0)).matrix());
      contrib = -d.dn.transpose() * we.asDiagonal() * data +
                d.phi.transpose() * wp.asDiagonal() * data;
    } else {
      contrib = d.phi.transpose() * w.asDiagonal() * data;
    }
    load.middleRows(dofs.offset[c], dofs.dofs(c)) += contrib;
  }

  std::vector<Eigen::MatrixXd> out;
  out.reserve(time_mesh.size());
  for (std::size_t n = 0; n < time_mesh.size(); ++n)
    out.push_back(load.middleCols(first[n], weights[n].rows()) * weights[n]);
  return out;
}

} // namespace sthp
