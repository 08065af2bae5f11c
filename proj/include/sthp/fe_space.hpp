#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "sthp/mesh.hpp"
#include "sthp/polynomials.hpp"

namespace sthp {

using Degree = std::array<int, 2>;

inline int dofs_per_cell(Degree p) { return (p[0] + 1) * (p[1] + 1); }

/// Gauss-Lobatto tensor element of degree (p1, p2) on [-1,1]^2. Local
/// index i + (p1+1) j for node (x_i, y_j).
struct ReferenceElement {
  Degree degree{};
  std::array<LagrangeBasis1D, 2> basis;
  /// Nodal -> modal (Legendre) and back, per direction.
  std::array<Eigen::MatrixXd, 2> to_modal, to_nodal;

  int size() const { return dofs_per_cell(degree); }
};

/// Cached element for degree p (thread-safe, lives for the program).
const ReferenceElement& reference_element(Degree p);

/// Offsets of each cell's block of the global coefficient vector. The
/// space uses degree p_K + shift in both directions.
struct DofMap {
  std::uint64_t mesh_version = 0;
  int shift = 0;
  std::vector<int> offset;
  std::vector<Degree> degree;
  int n_dofs = 0;

  int dofs(std::size_t c) const { return dofs_per_cell(degree[c]); }
  void check(const Mesh& mesh) const;
};

DofMap build_dof_map(const Mesh& mesh, int shift = 0);

/// Modal coefficients b_(a1,a2) of a nodal cell vector (index a1 + n1 a2).
Eigen::VectorXd to_modal(Degree p, const Eigen::VectorXd& nodal);
Eigen::VectorXd from_modal(Degree p, const Eigen::VectorXd& modal);

/// Restriction operators acting on a degree-(p+1) nodal cell vector and
/// returning a degree-(p+1) nodal vector.
enum class Restriction {
  to_p,          ///< R: L2 projection onto Q_p
  to_p_minus_1,  ///< projection onto Q_{p-1}
  drop_x,        ///< R_{h,1}: drop the a1 = p1+1 band
  drop_y,        ///< R_{h,2}: drop the a2 = p2+1 band
  to_p_minus_ex, ///< projection onto Q_{p - e1}
  to_p_minus_ey, ///< projection onto Q_{p - e2}
  iso_error      ///< E = (d-1) I + R - R_{h,1} - R_{h,2}
};

/// Dense (p+2)^2 operator matrix for a cell of base degree p.
const Eigen::MatrixXd& restriction_matrix(Degree p, Restriction r);

/// Keep modal coefficients with a1 <= t1 and a2 <= t2 of a degree-q vector.
Eigen::VectorXd truncate_modal(Degree q, const Eigen::VectorXd& nodal, int t1, int t2);

/// int_{-1}^{1} (1 - x^2)^k dx in closed form.
double beta_integral(int k);

/// Constant C_{1,2} of ||E v|| = C ||d^{p1+1}_x d^{p2+1}_y v|| h1^{p1+1} h2^{p2+1}.
double iso_error_constant(int p1, int p2);

} // namespace sthp
