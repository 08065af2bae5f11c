#include "sthp/time_disc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sthp/polynomials.hpp"
#include "sthp/quadrature.hpp"

namespace sthp {

namespace {

constexpr int cached_degrees = max_time_degree + 3;

} // namespace

TimeMesh::TimeMesh(double end_time, int n_slabs, int k) {
  if (n_slabs < 1 || end_time <= 0.0)
    throw std::invalid_argument("TimeMesh: need n_slabs >= 1 and T > 0");
  for (int n = 0; n < n_slabs; ++n)
    slabs_.push_back({end_time * n / n_slabs, end_time * (n + 1) / n_slabs, k});
  slabs_.back().t1 = end_time;
  validate();
}

TimeMesh::TimeMesh(std::vector<TimeSlab> slabs) : slabs_(std::move(slabs)) {
  validate();
}

int TimeMesh::temporal_dofs() const {
  int s = 0;
  for (const auto& slab : slabs_)
    s += slab.k + 1;
  return s;
}

int TimeMesh::max_degree() const {
  int k = 0;
  for (const auto& slab : slabs_)
    k = std::max(k, slab.k);
  return k;
}

void TimeMesh::refine(std::size_t n) {
  const TimeSlab s = slabs_.at(n);
  const double mid = 0.5 * (s.t0 + s.t1);
  slabs_[n] = {s.t0, mid, s.k};
  slabs_.insert(slabs_.begin() + static_cast<std::ptrdiff_t>(n) + 1,
                TimeSlab{mid, s.t1, s.k});
}

void TimeMesh::coarsen_pair(std::size_t n) {
  if (n + 1 >= slabs_.size())
    throw std::out_of_range("TimeMesh::coarsen_pair: slabs not adjacent");
  const TimeSlab a = slabs_[n], b = slabs_[n + 1];
  slabs_[n] = {a.t0, b.t1, std::max(a.k, b.k)};
  slabs_.erase(slabs_.begin() + static_cast<std::ptrdiff_t>(n) + 1);
}

bool TimeMesh::bump_degree(std::size_t n, int delta, int kmin, int kmax) {
  const int target = slabs_.at(n).k + delta;
  const int k = std::clamp(target, kmin, kmax);
  slabs_[n].k = k;
  return k != target;
}

void TimeMesh::set_degree(std::size_t n, int k) { slabs_.at(n).k = k; }

void TimeMesh::validate() const {
  if (slabs_.empty())
    throw std::logic_error("TimeMesh: no slabs");
  if (slabs_.front().t0 != 0.0)
    throw std::logic_error("TimeMesh: first slab must start at 0");
  for (std::size_t n = 0; n < slabs_.size(); ++n) {
    const auto& s = slabs_[n];
    if (!(s.t1 > s.t0))
      throw std::logic_error("TimeMesh: slab " + std::to_string(n) + " has tau <= 0");
    if (s.k < 0 || s.k > max_time_degree + 1)
      throw std::logic_error("TimeMesh: degree out of range");
    if (n > 0 && slabs_[n - 1].t1 != s.t0)
      throw std::logic_error("TimeMesh: slabs do not tile the interval");
  }
}

TemporalMatrices build_temporal_matrices(int k) {
  if (k < 0)
    throw std::invalid_argument("build_temporal_matrices: negative degree");
  TemporalMatrices tm;
  tm.k = k;
  tm.nodes = temporal_nodes(k);
  const LagrangeBasis1D basis(tm.nodes);
  const int n = k + 1;
  tm.M = Eigen::MatrixXd::Zero(n, n);
  tm.A = Eigen::MatrixXd::Zero(n, n);
  tm.m.resize(n);

  const QuadratureRule q = gauss_legendre(k + 2);
  std::vector<double> v(n), d(n);
  for (std::size_t a = 0; a < q.size(); ++a) {
    basis.evaluate(q.nodes[a], v, d);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        tm.M(i, j) += q.weights[a] * v[j] * v[i];
        tm.A(i, j) += q.weights[a] * d[j] * v[i];
      }
  }
  basis.evaluate(-1.0, v);
  for (int i = 0; i < n; ++i) {
    tm.m(i) = v[i];
    for (int j = 0; j < n; ++j)
      tm.A(i, j) += v[j] * v[i];
  }
  return tm;
}

const TemporalMatrices& temporal_matrices(int k) {
  static const std::vector<TemporalMatrices> cache = [] {
    std::vector<TemporalMatrices> c;
    for (int d = 0; d < cached_degrees; ++d)
      c.push_back(build_temporal_matrices(d));
    return c;
  }();
  if (k < 0 || k >= cached_degrees)
    throw std::out_of_range("temporal_matrices: degree out of range");
  return cache[static_cast<std::size_t>(k)];
}

const Eigen::MatrixXd& temporal_embedding(int k, int kto) {
  static const std::vector<Eigen::MatrixXd> cache = [] {
    std::vector<Eigen::MatrixXd> c(cached_degrees * cached_degrees);
    for (int a = 0; a < cached_degrees; ++a) {
      const LagrangeBasis1D basis(temporal_nodes(a));
      for (int b = 0; b < cached_degrees; ++b) {
        const auto to = temporal_nodes(b);
        Eigen::MatrixXd e(b + 1, a + 1);
        std::vector<double> v(a + 1);
        for (int i = 0; i <= b; ++i) {
          basis.evaluate(to[i], v);
          for (int j = 0; j <= a; ++j)
            e(i, j) = v[j];
        }
        c[a * cached_degrees + b] = std::move(e);
      }
    }
    return c;
  }();
  if (k < 0 || kto < 0 || k >= cached_degrees || kto >= cached_degrees)
    throw std::out_of_range("temporal_embedding: degree out of range");
  return cache[static_cast<std::size_t>(k * cached_degrees + kto)];
}

double lifting_polynomial(int k, double t) {
  double v = 1.0;
  for (double node : temporal_nodes(k))
    v *= (t - node) / (-1.0 - node);
  return v;
}

Eigen::VectorXd lifting_polynomial_at_enriched_nodes(int k) {
  const auto nodes = temporal_nodes(k + 1);
  Eigen::VectorXd out(k + 2);
  for (int i = 0; i < k + 2; ++i)
    out(i) = lifting_polynomial(k, nodes[i]);
  return out;
}

Eigen::MatrixXd radau_lift(const Eigen::MatrixXd& values,
                           const Eigen::VectorXd& jump) {
  const int k = static_cast<int>(values.cols()) - 1;
  const Eigen::MatrixXd& e = temporal_embedding(k, k + 1);
  Eigen::MatrixXd out = values * e.transpose();
  out.noalias() -= jump * lifting_polynomial_at_enriched_nodes(k).transpose();
  return out;
}

} // namespace sthp
