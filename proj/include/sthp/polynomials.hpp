#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sthp {

/// Legendre polynomial L_k(x) via the three-term recurrence.
double legendre(int k, double x);
double legendre_derivative(int k, double x);

/// Values and derivatives of L_0..L_kmax at x.
void legendre_all(int kmax, double x, std::span<double> values,
                  std::span<double> derivatives);

/// Cardinal (Lagrange) polynomials on a node set. Stored in Legendre modal
/// form so evaluation is stable everywhere on [-1,1], nodes included.
class LagrangeBasis1D {
public:
  LagrangeBasis1D() = default;
  explicit LagrangeBasis1D(std::vector<double> nodes);

  int degree() const { return static_cast<int>(nodes_.size()) - 1; }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<double>& nodes() const { return nodes_; }

  double value(std::size_t i, double x) const;
  double derivative(std::size_t i, double x) const;

  /// All basis values (and derivatives) at x.
  void evaluate(double x, std::span<double> values,
                std::span<double> derivatives = {}) const;

  /// Values (and derivatives) at many points; row q belongs to x(q).
  void tabulate(const Eigen::VectorXd& x, Eigen::MatrixXd& values,
                Eigen::MatrixXd* derivatives = nullptr) const;

  /// Column i holds the Legendre coefficients of basis function i.
  const Eigen::MatrixXd& modal_coefficients() const { return coeffs_; }

private:
  std::vector<double> nodes_;
  Eigen::MatrixXd coeffs_;
};

/// Nodal set used for a spatial degree: Gauss-Lobatto for q >= 1, the
/// midpoint for q == 0.
std::vector<double> spatial_nodes(int degree);

/// Right Gauss-Radau nodes carrying the temporal degree-k basis.
std::vector<double> temporal_nodes(int degree);

} // namespace sthp
