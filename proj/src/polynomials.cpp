#include "sthp/polynomials.hpp"

#include <array>
#include <stdexcept>

#include "sthp/quadrature.hpp"

namespace sthp {

double legendre(int k, double x) {
  if (k == 0)
    return 1.0;
  double prev = 1.0, cur = x;
  for (int n = 1; n < k; ++n) {
    const double next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double legendre_derivative(int k, double x) {
  // L'_{n+1} = L'_{n-1} + (2n+1) L_n avoids the endpoint singularity.
  if (k == 0)
    return 0.0;
  double dprev = 0.0, dcur = 1.0;
  double lprev = 1.0, lcur = x;
  for (int n = 1; n < k; ++n) {
    const double dnext = dprev + (2.0 * n + 1.0) * lcur;
    const double lnext = ((2.0 * n + 1.0) * x * lcur - n * lprev) / (n + 1.0);
    dprev = dcur;
    dcur = dnext;
    lprev = lcur;
    lcur = lnext;
  }
  return dcur;
}

void legendre_all(int kmax, double x, std::span<double> values,
                  std::span<double> derivatives) {
  values[0] = 1.0;
  if (!derivatives.empty())
    derivatives[0] = 0.0;
  if (kmax == 0)
    return;
  values[1] = x;
  if (!derivatives.empty())
    derivatives[1] = 1.0;
  for (int n = 1; n < kmax; ++n) {
    values[n + 1] = ((2.0 * n + 1.0) * x * values[n] - n * values[n - 1]) / (n + 1.0);
    if (!derivatives.empty())
      derivatives[n + 1] = derivatives[n - 1] + (2.0 * n + 1.0) * values[n];
  }
}

LagrangeBasis1D::LagrangeBasis1D(std::vector<double> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty())
    throw std::invalid_argument("LagrangeBasis1D: empty node set");
  const int n = static_cast<int>(nodes_.size());
  Eigen::MatrixXd vandermonde(n, n);
  std::vector<double> vals(n);
  for (int a = 0; a < n; ++a) {
    legendre_all(n - 1, nodes_[a], vals, {});
    for (int k = 0; k < n; ++k)
      vandermonde(a, k) = vals[k];
  }
  // V * C = I: column i of C is the modal form of cardinal function i.
  coeffs_ = vandermonde.partialPivLu().inverse();
}

double LagrangeBasis1D::value(std::size_t i, double x) const {
  double s = 0.0;
  for (int k = 0; k < coeffs_.rows(); ++k)
    s += coeffs_(k, i) * legendre(k, x);
  return s;
}

double LagrangeBasis1D::derivative(std::size_t i, double x) const {
  double s = 0.0;
  for (int k = 1; k < coeffs_.rows(); ++k)
    s += coeffs_(k, i) * legendre_derivative(k, x);
  return s;
}

void LagrangeBasis1D::evaluate(double x, std::span<double> values,
                               std::span<double> derivatives) const {
  const int n = static_cast<int>(nodes_.size());
  std::array<double, 32> lv{}, ld{};
  if (n > 32)
    throw std::invalid_argument("LagrangeBasis1D: degree too high");
  legendre_all(n - 1, x, std::span(lv.data(), n), std::span(ld.data(), n));
  for (int i = 0; i < n; ++i) {
    double v = 0.0, d = 0.0;
    for (int k = 0; k < n; ++k) {
      v += coeffs_(k, i) * lv[k];
      d += coeffs_(k, i) * ld[k];
    }
    values[i] = v;
    if (!derivatives.empty())
      derivatives[i] = d;
  }
}

void LagrangeBasis1D::tabulate(const Eigen::VectorXd& x, Eigen::MatrixXd& values,
                               Eigen::MatrixXd* derivatives) const {
  const auto np = x.size();
  const int n = static_cast<int>(nodes_.size());
  Eigen::MatrixXd lv(np, n), ld(np, n);
  lv.col(0).setOnes();
  ld.col(0).setZero();
  if (n > 1) {
    lv.col(1) = x;
    ld.col(1).setOnes();
  }
  for (int k = 1; k + 1 < n; ++k) {
    lv.col(k + 1) = ((2.0 * k + 1.0) * x.cwiseProduct(lv.col(k)) - k * lv.col(k - 1)) / (k + 1.0);
    ld.col(k + 1) = ld.col(k - 1) + (2.0 * k + 1.0) * lv.col(k);
  }
  values.noalias() = lv * coeffs_;
  if (derivatives)
    derivatives->noalias() = ld * coeffs_;
}

std::vector<double> spatial_nodes(int degree) {
  if (degree < 0)
    throw std::invalid_argument("spatial_nodes: negative degree");
  if (degree == 0)
    return {0.0};
  return gauss_lobatto(degree + 1).nodes;
}

std::vector<double> temporal_nodes(int degree) {
  if (degree < 0)
    throw std::invalid_argument("temporal_nodes: negative degree");
  return gauss_radau_right(degree + 1).nodes;
}

} // namespace sthp
