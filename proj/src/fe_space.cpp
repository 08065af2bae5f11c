#include "sthp/fe_space.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <tuple>

namespace sthp {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& outer, const Eigen::MatrixXd& inner) {
  Eigen::MatrixXd out(outer.rows() * inner.rows(), outer.cols() * inner.cols());
  for (Eigen::Index j = 0; j < outer.rows(); ++j)
    for (Eigen::Index l = 0; l < outer.cols(); ++l)
      out.block(j * inner.rows(), l * inner.cols(), inner.rows(), inner.cols()) =
          outer(j, l) * inner;
  return out;
}

} // namespace

const ReferenceElement& reference_element(Degree p) {
  static std::mutex mutex;
  static std::map<Degree, std::unique_ptr<ReferenceElement>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[p];
  if (!slot) {
    auto e = std::make_unique<ReferenceElement>();
    e->degree = p;
    for (int i = 0; i < 2; ++i) {
      e->basis[i] = LagrangeBasis1D(spatial_nodes(p[i]));
      e->to_modal[i] = e->basis[i].modal_coefficients();
      e->to_nodal[i] = e->to_modal[i].inverse();
    }
    slot = std::move(e);
  }
  return *slot;
}

void DofMap::check(const Mesh& mesh) const {
  if (mesh.version() != mesh_version)
    throw std::logic_error("DofMap is stale: mesh changed since it was built");
}

DofMap build_dof_map(const Mesh& mesh, int shift) {
  DofMap map;
  map.mesh_version = mesh.version();
  map.shift = shift;
  map.offset.reserve(mesh.n_cells());
  for (const auto& cell : mesh.cells()) {
    const Degree p{cell.degree[0] + shift, cell.degree[1] + shift};
    map.offset.push_back(map.n_dofs);
    map.degree.push_back(p);
    map.n_dofs += dofs_per_cell(p);
  }
  return map;
}

Eigen::VectorXd to_modal(Degree p, const Eigen::VectorXd& nodal) {
  const auto& e = reference_element(p);
  const Eigen::Map<const Eigen::MatrixXd> v(nodal.data(), p[0] + 1, p[1] + 1);
  Eigen::MatrixXd b = e.to_modal[0] * v * e.to_modal[1].transpose();
  return Eigen::Map<Eigen::VectorXd>(b.data(), b.size());
}

Eigen::VectorXd from_modal(Degree p, const Eigen::VectorXd& modal) {
  const auto& e = reference_element(p);
  const Eigen::Map<const Eigen::MatrixXd> b(modal.data(), p[0] + 1, p[1] + 1);
  Eigen::MatrixXd v = e.to_nodal[0] * b * e.to_nodal[1].transpose();
  return Eigen::Map<Eigen::VectorXd>(v.data(), v.size());
}

Eigen::VectorXd truncate_modal(Degree q, const Eigen::VectorXd& nodal, int t1, int t2) {
  Eigen::VectorXd b = to_modal(q, nodal);
  for (int a2 = 0; a2 <= q[1]; ++a2)
    for (int a1 = 0; a1 <= q[0]; ++a1)
      if (a1 > t1 || a2 > t2)
        b(a1 + (q[0] + 1) * a2) = 0.0;
  return from_modal(q, b);
}

const Eigen::MatrixXd& restriction_matrix(Degree p, Restriction r) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<Eigen::MatrixXd>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{p[0], p[1], static_cast<int>(r)}];
  if (slot)
    return *slot;

  const Degree q{p[0] + 1, p[1] + 1};
  const auto& e = reference_element(q);
  const Eigen::MatrixXd forward = kron(e.to_modal[1], e.to_modal[0]);
  const Eigen::MatrixXd backward = kron(e.to_nodal[1], e.to_nodal[0]);
  auto projector = [&](int t1, int t2) {
    Eigen::VectorXd mask(dofs_per_cell(q));
    for (int a2 = 0; a2 <= q[1]; ++a2)
      for (int a1 = 0; a1 <= q[0]; ++a1)
        mask(a1 + (q[0] + 1) * a2) = (a1 <= t1 && a2 <= t2) ? 1.0 : 0.0;
    return Eigen::MatrixXd(backward * mask.asDiagonal() * forward);
  };

  Eigen::MatrixXd m;
  switch (r) {
  case Restriction::to_p:
    m = projector(p[0], p[1]);
    break;
  case Restriction::to_p_minus_1:
    m = projector(p[0] - 1, p[1] - 1);
    break;
  case Restriction::drop_x:
    m = projector(p[0], q[1]);
    break;
  case Restriction::drop_y:
    m = projector(q[0], p[1]);
    break;
  case Restriction::to_p_minus_ex:
    m = projector(p[0] - 1, p[1]);
    break;
  case Restriction::to_p_minus_ey:
    m = projector(p[0], p[1] - 1);
    break;
  case Restriction::iso_error: {
    const int n = dofs_per_cell(q);
    m = Eigen::MatrixXd::Identity(n, n) + projector(p[0], p[1]) -
        projector(p[0], q[1]) - projector(q[0], p[1]);
    break;
  }
  }
  slot = std::make_unique<Eigen::MatrixXd>(std::move(m));
  return *slot;
}

double beta_integral(int k) {
  if (k < 0)
    throw std::invalid_argument("beta_integral: negative exponent");
  // 2^(2k+1) (k!)^2 / (2k+1)!, built as a running product to avoid overflow.
  double v = 2.0;
  for (int j = 1; j <= k; ++j)
    v *= 4.0 * j * j / ((2.0 * j) * (2.0 * j + 1.0));
  return v;
}

double iso_error_constant(int p1, int p2) {
  const double n1 = 2.0 * p1 + 2.0, n2 = 2.0 * p2 + 2.0;
  const double c2 = beta_integral(p1 + 1) * beta_integral(p2 + 1) /
                    (4.0 * std::tgamma(n1 + 1.0) * std::tgamma(n2 + 1.0) *
                     std::pow(2.0, n1 + n2));
  return std::sqrt(c2);
}

} // namespace sthp
