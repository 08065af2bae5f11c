#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "sthp/fe_space.hpp"
#include "sthp/mesh.hpp"
#include "sthp/problems.hpp"
#include "sthp/quadrature.hpp"
#include "sthp/time_disc.hpp"

namespace sthp {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct PenaltyConfig {
  double c_pen = 10.0;
};

/// One side of a face as seen by the penalty: degree and size normal to F.
struct FaceSide {
  Degree degree;
  double h_normal;
};

/// gamma_F = C_pen / 2 * sum_sides p_F (p_F + 1) / h_normal with
/// p_F = max(1, tangential degree). Boundary faces pass one side.
double penalty_gamma(int dir, const std::vector<FaceSide>& sides, double c_pen);

/// Quadrature points of one cell with tabulated basis values.
struct CellQuadrature {
  std::vector<double> x, y, w;
  Eigen::MatrixXd phi; ///< points x dofs
};

/// Composite Gauss rule with n points per direction on the cell, recursively
/// bisecting every box flagged by resolve (up to max_depth levels).
CellQuadrature cell_data_quadrature(const Mesh& mesh, std::size_t c, Degree p, int n,
                                    const ResolvePredicate& resolve, int max_depth = 14);

/// Basis values (and physical gradients) of cell c at physical points.
void tabulate_cell(const Mesh& mesh, std::size_t c, Degree p, const std::vector<double>& x,
                   const std::vector<double>& y, Eigen::MatrixXd* phi,
                   Eigen::MatrixXd* dx = nullptr, Eigen::MatrixXd* dy = nullptr);

SparseMatrix assemble_mass(const Mesh& mesh, const DofMap& dofs);

/// Spatial DG operator, row = test, column = trial, coefficients at time t.
SparseMatrix assemble_stiffness(const Mesh& mesh, const DofMap& dofs,
                                const ProblemDefinition& problem, double t,
                                const PenaltyConfig& penalty = {});

/// (u_0, phi_i).
Eigen::VectorXd assemble_initial_load(const Mesh& mesh, const DofMap& dofs,
                                      const ProblemDefinition& problem);

/// Gauss rule used for data integrals on a slab of base degree k.
QuadratureRule slab_time_rule(const TimeSlab& slab);

/// Per-slab load F_n (n_dofs x (k_n + temporal_shift + 1)) of the source and
/// boundary data, integrated against the degree-(k_n + temporal_shift)
/// Radau-Lagrange basis.
std::vector<Eigen::MatrixXd> assemble_rhs(const Mesh& mesh, const DofMap& dofs,
                                          const ProblemDefinition& problem,
                                          const TimeMesh& time_mesh, int temporal_shift,
                                          const PenaltyConfig& penalty = {});

/// Sparse pattern with dense cell-by-cell blocks (self plus face neighbours).
class BlockPattern {
public:
  BlockPattern(const Mesh& mesh, const DofMap& dofs, bool couple_neighbours);
  SparseMatrix make_matrix() const;
  /// Adds a dense block (rows of cell r, columns of cell c) into m.
  void add_block(SparseMatrix& m, int r, int c, const Eigen::MatrixXd& block) const;

private:
  const DofMap& dofs_;
  std::vector<std::vector<int>> columns_; // sorted neighbour cells per cell
  std::vector<std::vector<int>> prefix_;  // dof offset of each neighbour in a row
  std::vector<int> row_length_;
};

} // namespace sthp
