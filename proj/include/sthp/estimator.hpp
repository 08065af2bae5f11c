#pragma once

#include <vector>

#include <Eigen/Dense>

#include "sthp/solver.hpp"

namespace sthp {

using SpaceTimeField = std::vector<Eigen::MatrixXd>;

/// Everything the indicators need from one loop. The enriched pair u, z lives
/// on the degree-(p+1) spatial space `ho` with the temporal degrees of `tm`;
/// residuals are evaluated on the same spatial space with degrees k+1 in time.
struct EstimatorInput {
  const Mesh& mesh;
  const DofMap& ho;
  const TimeMesh& tm;
  const SparseMatrix& mass;
  const SparseMatrix& stiffness;
  const SpaceTimeField& f; ///< primal load on (ho, k+1), initial term included
  const SpaceTimeField& j; ///< goal load on (ho, k+1)
  const SpaceTimeField& u;
  const SpaceTimeField& z;
  /// L2 projection of u_0 on ho; the primal lifting starts from it. Null
  /// means no jump at t = 0.
  const Eigen::VectorXd* initial = nullptr;
};

struct EstimateReport {
  Eigen::MatrixXd eta_h_high; ///< cells x 2, directional indicators of the p+1 part
  Eigen::MatrixXd eta_h_low;  ///< cells x 2, directional indicators of the p part
  Eigen::VectorXd eta_tau_high, eta_tau_low; ///< per slab
  double eta_h1 = 0.0, eta_h2 = 0.0;
  double eta_h = 0.0;     ///< anisotropic spatial estimate, sum of eta_h_high
  double eta_tau = 0.0;   ///< sum of eta_tau_high
  double eta_total = 0.0; ///< eta_h + eta_tau
  double eta_e = 0.0;     ///< neglected isotropic remainder
  double eta_h_iso = 0.0; ///< isotropic spatial estimate
  double eta_tau_p = 0.0; ///< sum of eta_tau_low
};

/// Apply a cellwise restriction to every temporal column of a field on ho.
SpaceTimeField restrict_field(const DofMap& ho, Restriction r, const SpaceTimeField& v);

/// Radau lifting of every slab of a field. The jump at t = 0 is taken
/// against `initial` if given, else it is zero.
SpaceTimeField lift_field(const TimeMesh& tm, const SpaceTimeField& v,
                          const Eigen::VectorXd* initial = nullptr);

EstimateReport compute_indicators(const EstimatorInput& in);

/// |eta| / |error|, or infinity when the error vanishes.
double effectivity(double eta, double error);

/// Max over random discrete test fields w_h on (ho, k) of
/// |rho(u_h)(w_h)| / (|F_solve| |w_h|).
double galerkin_orthogonality(const EstimatorInput& in, int samples, unsigned seed,
                              bool adjoint = false);

} // namespace sthp
