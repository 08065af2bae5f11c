#include "sthp/estimator.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "sthp/goals.hpp"

namespace sthp {

SpaceTimeField restrict_field(const DofMap& ho, Restriction r, const SpaceTimeField& v) {
  SpaceTimeField out;
  out.reserve(v.size());
  for (const auto& x : v) {
    Eigen::MatrixXd y(x.rows(), x.cols());
    for (std::size_t c = 0; c < ho.degree.size(); ++c) {
      const Degree p{ho.degree[c][0] - ho.shift, ho.degree[c][1] - ho.shift};
      const auto& m = restriction_matrix(p, r);
      y.middleRows(ho.offset[c], ho.dofs(c)).noalias() =
          m * x.middleRows(ho.offset[c], ho.dofs(c));
    }
    out.push_back(std::move(y));
  }
  return out;
}

SpaceTimeField lift_field(const TimeMesh& tm, const SpaceTimeField& v,
                          const Eigen::VectorXd* initial) {
  SpaceTimeField out;
  out.reserve(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    const int k = tm[n].k;
    const auto& m = temporal_matrices(k).m;
    Eigen::VectorXd jump = Eigen::VectorXd::Zero(v[n].rows());
    if (n > 0)
      jump = v[n] * m - v[n - 1].col(tm[n - 1].k);
    else if (initial)
      jump = v[n] * m - *initial;
    out.push_back(radau_lift(v[n], jump));
  }
  return out;
}

namespace {

SpaceTimeField minus(const SpaceTimeField& a, const SpaceTimeField& b) {
  SpaceTimeField c(a.size());
  for (std::size_t n = 0; n < a.size(); ++n)
    c[n] = a[n] - b[n];
  return c;
}

// Per-cell sums of r .* w over slabs and temporal columns.
Eigen::VectorXd by_cell(const DofMap& ho, const SpaceTimeField& r, const SpaceTimeField& w) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ho.degree.size()));
  for (std::size_t n = 0; n < r.size(); ++n) {
    const Eigen::VectorXd rows = r[n].cwiseProduct(w[n]).rowwise().sum();
    for (std::size_t c = 0; c < ho.degree.size(); ++c)
      out(c) += rows.segment(ho.offset[c], ho.dofs(c)).sum();
  }
  return out;
}

Eigen::VectorXd by_slab(const SpaceTimeField& r, const SpaceTimeField& w) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(r.size()));
  for (std::size_t n = 0; n < r.size(); ++n)
    out(n) = r[n].cwiseProduct(w[n]).sum();
  return out;
}

} // namespace

EstimateReport compute_indicators(const EstimatorInput& in) {
  const TimeMesh tu = shifted(in.tm, 1);
  auto rp = [&](const SpaceTimeField& v) {
    return primal_residual(in.mass, in.stiffness, tu, in.f, v);
  };
  auto ra = [&](const SpaceTimeField& v) {
    return adjoint_residual(in.mass, in.stiffness, tu, in.j, v);
  };
  const auto& ho = in.ho;

  // embedded enriched pair and its restrictions, all on (ho, k+1)
  const auto U = embed_in_time(in.tm, in.u, 1);
  const auto Z = embed_in_time(in.tm, in.z, 1);
  const auto RU = restrict_field(ho, Restriction::to_p, U);
  const auto RZ = restrict_field(ho, Restriction::to_p, Z);
  const auto R2U = restrict_field(ho, Restriction::to_p_minus_1, U);
  const auto R2Z = restrict_field(ho, Restriction::to_p_minus_1, Z);

  const auto r_RU = rp(RU);
  const auto rs_RZ = ra(RZ);
  const auto r_R2U = rp(R2U);
  const auto rs_R2Z = ra(R2Z);

  EstimateReport rep;
  const auto nc = static_cast<Eigen::Index>(ho.degree.size());
  rep.eta_h_high.resize(nc, 2);
  rep.eta_h_low.resize(nc, 2);
  const Restriction drop[2] = {Restriction::drop_x, Restriction::drop_y};
  const Restriction lower[2] = {Restriction::to_p_minus_ex, Restriction::to_p_minus_ey};
  for (int i = 0; i < 2; ++i) {
    const auto wz = minus(Z, restrict_field(ho, drop[i], Z));
    const auto wu = minus(U, restrict_field(ho, drop[i], U));
    rep.eta_h_high.col(i) = 0.5 * (by_cell(ho, r_RU, wz) + by_cell(ho, rs_RZ, wu));
    const auto lz = minus(RZ, restrict_field(ho, lower[i], Z));
    const auto lu = minus(RU, restrict_field(ho, lower[i], U));
    rep.eta_h_low.col(i) = 0.5 * (by_cell(ho, r_R2U, lz) + by_cell(ho, rs_R2Z, lu));
  }

  // temporal parts: lifted minus embedded
  const auto lift_diff = [&](const SpaceTimeField& v, const Eigen::VectorXd* initial) {
    return minus(lift_field(in.tm, v, initial), embed_in_time(in.tm, v, 1));
  };
  std::optional<Eigen::VectorXd> r_initial;
  if (in.initial)
    r_initial = restrict_field(ho, Restriction::to_p, {Eigen::MatrixXd(*in.initial)})[0];
  const auto r_U = rp(U);
  const auto rs_Z = ra(Z);
  rep.eta_tau_high =
      0.5 * (by_slab(r_U, lift_diff(in.z, nullptr)) + by_slab(rs_Z, lift_diff(in.u, in.initial)));
  const auto Ru = restrict_field(ho, Restriction::to_p, in.u);
  const auto Rz = restrict_field(ho, Restriction::to_p, in.z);
  rep.eta_tau_low =
      0.5 * (by_slab(r_RU, lift_diff(Rz, nullptr)) +
             by_slab(rs_RZ, lift_diff(Ru, r_initial ? &*r_initial : nullptr)));

  const auto EZ = restrict_field(ho, Restriction::iso_error, Z);
  const auto EU = restrict_field(ho, Restriction::iso_error, U);
  rep.eta_e = 0.5 * (pairing(r_RU, EZ) + pairing(rs_RZ, EU));
  rep.eta_h_iso = 0.5 * (pairing(r_RU, minus(Z, RZ)) + pairing(rs_RZ, minus(U, RU)));

  rep.eta_h1 = rep.eta_h_high.col(0).sum();
  rep.eta_h2 = rep.eta_h_high.col(1).sum();
  rep.eta_h = rep.eta_h1 + rep.eta_h2;
  rep.eta_tau = rep.eta_tau_high.sum();
  rep.eta_tau_p = rep.eta_tau_low.sum();
  rep.eta_total = rep.eta_h + rep.eta_tau;
  return rep;
}

double effectivity(double eta, double error) {
  if (std::abs(error) < 1e-14)
    return std::numeric_limits<double>::infinity();
  return std::abs(eta / error);
}

double galerkin_orthogonality(const EstimatorInput& in, int samples, unsigned seed,
                              bool adjoint) {
  const TimeMesh tu = shifted(in.tm, 1);
  const auto r = adjoint ? adjoint_residual(in.mass, in.stiffness, tu, in.j, embed_in_time(in.tm, in.z, 1))
                         : primal_residual(in.mass, in.stiffness, tu, in.f, embed_in_time(in.tm, in.u, 1));
  // load of the solve space: union load times the embedding
  double fnorm2 = 0.0;
  const auto& load = adjoint ? in.j : in.f;
  for (std::size_t n = 0; n < load.size(); ++n)
    fnorm2 += (load[n] * temporal_embedding(in.tm[n].k, in.tm[n].k + 1)).squaredNorm();
  const double fnorm = std::sqrt(fnorm2);
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal;
  double worst = 0.0;
  for (int s = 0; s < samples; ++s) {
    SpaceTimeField w(in.tm.size());
    double wn2 = 0.0;
    for (std::size_t n = 0; n < w.size(); ++n) {
      w[n].resize(in.ho.n_dofs, in.tm[n].k + 1);
      for (Eigen::Index q = 0; q < w[n].size(); ++q)
        w[n].data()[q] = normal(rng);
      wn2 += w[n].squaredNorm();
    }
    const double v = std::abs(pairing(r, embed_in_time(in.tm, w, 1)));
    worst = std::max(worst, v / (fnorm * std::sqrt(wn2)));
  }
  return worst;
}

} // namespace sthp
