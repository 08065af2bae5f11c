#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sthp {

inline constexpr int max_time_degree = 9;

/// One slab I_n = (t0, t1] carrying temporal degree k.
struct TimeSlab {
  double t0 = 0.0;
  double t1 = 1.0;
  int k = 0;
  double tau() const { return t1 - t0; }
};

class TimeMesh {
public:
  TimeMesh() = default;
  TimeMesh(double end_time, int n_slabs, int k);
  explicit TimeMesh(std::vector<TimeSlab> slabs);

  std::size_t size() const { return slabs_.size(); }
  const TimeSlab& operator[](std::size_t n) const { return slabs_[n]; }
  const std::vector<TimeSlab>& slabs() const { return slabs_; }
  double end_time() const { return slabs_.back().t1; }

  /// Sum of (k_n + 1): the number of temporal degrees of freedom.
  int temporal_dofs() const;
  int max_degree() const;

  void refine(std::size_t n);
  /// Merges slabs n and n+1, keeping the larger degree.
  void coarsen_pair(std::size_t n);
  /// Shifts k_n by delta, clamped to [kmin, kmax]; returns true if clamped.
  bool bump_degree(std::size_t n, int delta, int kmin = 0,
                   int kmax = max_time_degree);
  void set_degree(std::size_t n, int k);

  /// Throws std::logic_error unless the slabs tile (0, T] with k in range.
  void validate() const;

private:
  std::vector<TimeSlab> slabs_;
};

/// Reference-interval matrices of the DG(k) scheme on [-1, 1] for the
/// right-Radau Lagrange basis xi_0..xi_k. Traces are taken at -1.
struct TemporalMatrices {
  int k = 0;
  std::vector<double> nodes;
  Eigen::MatrixXd M; ///< int xi_j xi_i
  Eigen::MatrixXd A; ///< int xi_j' xi_i + xi_j(-1) xi_i(-1)
  Eigen::VectorXd m; ///< xi_i(-1)
};

TemporalMatrices build_temporal_matrices(int k);

/// Cached matrices for 0 <= k <= max_time_degree + 1.
const TemporalMatrices& temporal_matrices(int k);

/// Values of the degree-k basis at the degree-kto nodes: E(i, j) = xi^k_j(t_i).
/// Coefficients embed by U_to = U_from * E^T.
const Eigen::MatrixXd& temporal_embedding(int k, int kto);

/// Values of the lifting polynomial (1 at -1, zero at the k+1 Radau nodes)
/// at the k+2 Radau nodes of degree k+1.
Eigen::VectorXd lifting_polynomial_at_enriched_nodes(int k);

/// Evaluate lifting polynomial for degree k at reference time t.
double lifting_polynomial(int k, double t);

/// Lifts one slab. values: n_space x (k+1) nodal-in-time coefficients;
/// jump: value at t_{n-1}^+ minus value at t_{n-1}^- (length n_space).
/// Returns n_space x (k+2) coefficients on the degree-(k+1) Radau basis.
Eigen::MatrixXd radau_lift(const Eigen::MatrixXd& values,
                           const Eigen::VectorXd& jump);

} // namespace sthp
