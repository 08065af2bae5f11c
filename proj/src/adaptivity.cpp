#include "sthp/adaptivity.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <sstream>
#include <stdexcept>

namespace sthp {

void AdaptConfig::validate() const {
  auto in = [](double v, double lo, double hi) { return v >= lo && v <= hi; };
  if (!in(theta_h, 0.0, 2.0) || !in(theta_tau, 0.0, 1.0))
    throw std::invalid_argument("refinement fractions out of range");
  if (!in(theta_h_co, 0.0, 2.0 - theta_h) || !in(theta_tau_co, 0.0, 1.0 - theta_tau))
    throw std::invalid_argument("coarsening fractions out of range");
  if (!(gamma > 0.0 && gamma < 1.0))
    throw std::invalid_argument("saturation threshold must lie in (0,1)");
  if (p_min < 0 || p_min > p_max || p_max > max_space_degree || k_min < 0 || k_min > k_max ||
      k_max > max_time_degree)
    throw std::invalid_argument("degree bounds out of range");
}

int refine_count(double theta, std::size_t n) {
  return std::max(1, static_cast<int>(std::floor(theta * static_cast<double>(n) + 0.5)));
}

int coarsen_count(double theta, std::size_t n) {
  return static_cast<int>(std::floor(theta * static_cast<double>(n) + 0.5));
}

double saturation_ratio(double high, double low) {
  if (std::abs(low) < 1e-14)
    return 0.0;
  return std::abs(high) / std::abs(low);
}

MarkSet mark_space(const EstimateReport& report, const AdaptConfig& cfg) {
  struct Entry {
    double value;
    int cell, dir;
  };
  const auto nc = static_cast<int>(report.eta_h_high.rows());
  std::vector<Entry> pool;
  pool.reserve(2 * nc);
  for (int c = 0; c < nc; ++c)
    for (int i = 0; i < 2; ++i)
      pool.push_back({std::abs(report.eta_h_high(c, i)), c, i});
  std::stable_sort(pool.begin(), pool.end(), [](const Entry& a, const Entry& b) {
    if (a.value != b.value)
      return a.value > b.value;
    return std::tie(a.cell, a.dir) < std::tie(b.cell, b.dir);
  });
  MarkSet m;
  const int nr = std::min<int>(refine_count(cfg.theta_h, nc), static_cast<int>(pool.size()));
  const int nco = std::min<int>(coarsen_count(cfg.theta_h_co, nc),
                                static_cast<int>(pool.size()) - nr);
  for (int q = 0; q < nr; ++q) {
    const auto& e = pool[q];
    const double g = saturation_ratio(report.eta_h_high(e.cell, e.dir),
                                      report.eta_h_low(e.cell, e.dir));
    const MarkKind kind = cfg.h_only || g > cfg.gamma ? MarkKind::h : MarkKind::p;
    m.refine.push_back({e.cell, e.dir, kind, g});
  }
  for (int q = 0; q < nco; ++q) {
    const auto& e = pool[pool.size() - 1 - q];
    const double g = saturation_ratio(report.eta_h_high(e.cell, e.dir),
                                      report.eta_h_low(e.cell, e.dir));
    const MarkKind kind = cfg.h_only || g < cfg.gamma ? MarkKind::h : MarkKind::p;
    m.coarsen.push_back({e.cell, e.dir, kind, g});
  }
  return m;
}

MarkSet mark_time(const EstimateReport& report, const AdaptConfig& cfg) {
  const auto ns = static_cast<int>(report.eta_tau_low.size());
  std::vector<int> order(ns);
  for (int n = 0; n < ns; ++n)
    order[n] = n;
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double va = std::abs(report.eta_tau_low(a)), vb = std::abs(report.eta_tau_low(b));
    if (va != vb)
      return va > vb;
    return a < b;
  });
  MarkSet m;
  const int nr = std::min(refine_count(cfg.theta_tau, ns), ns);
  const int nco = std::min(coarsen_count(cfg.theta_tau_co, ns), ns - nr);
  for (int q = 0; q < nr; ++q) {
    const int n = order[q];
    const double g = saturation_ratio(report.eta_tau_high(n), report.eta_tau_low(n));
    m.refine_time.push_back({n, cfg.h_only || g > cfg.gamma ? MarkKind::h : MarkKind::p, g});
  }
  for (int q = 0; q < nco; ++q) {
    const int n = order[ns - 1 - q];
    const double g = saturation_ratio(report.eta_tau_high(n), report.eta_tau_low(n));
    m.coarsen_time.push_back({n, cfg.h_only || g < cfg.gamma ? MarkKind::h : MarkKind::p, g});
  }
  return m;
}

MarkSet mark(const EstimateReport& report, const AdaptConfig& cfg) {
  MarkSet m = mark_space(report, cfg);
  MarkSet t = mark_time(report, cfg);
  m.refine_time = std::move(t.refine_time);
  m.coarsen_time = std::move(t.coarsen_time);
  return m;
}

namespace {

int step_degree(int value, int delta, int lo, int hi, bool even, bool* clamped) {
  if (even) {
    lo += lo % 2;
    hi -= hi % 2;
  }
  const int target = value + delta;
  const int out = std::clamp(target, lo, hi);
  if (out != target && clamped)
    *clamped = true;
  return out;
}

} // namespace

AdaptSummary apply_marks(Mesh& mesh, TimeMesh& tm, const MarkSet& marks, const AdaptConfig& cfg) {
  AdaptSummary s;
  const int step = cfg.even_degrees ? 2 : 1;

  // degree changes first; they do not move cells
  for (const auto& m : marks.refine)
    if (m.kind == MarkKind::p) {
      auto p = mesh.cells()[m.cell].degree;
      bool clamped = false;
      p[m.dir] = step_degree(p[m.dir], step, cfg.p_min, cfg.p_max, cfg.even_degrees, &clamped);
      s.clamped += clamped;
      mesh.set_degree(m.cell, p);
      ++s.p_refined;
    }
  for (const auto& m : marks.coarsen)
    if (m.kind == MarkKind::p) {
      auto p = mesh.cells()[m.cell].degree;
      bool clamped = false;
      p[m.dir] = step_degree(p[m.dir], -step, cfg.p_min, cfg.p_max, cfg.even_degrees, &clamped);
      s.clamped += clamped;
      mesh.set_degree(m.cell, p);
      ++s.p_coarsened;
    }

  std::set<int> refined_cells;
  std::vector<std::pair<Mesh::Key, int>> refine_keys;
  for (const auto& m : marks.refine)
    if (m.kind == MarkKind::h) {
      refined_cells.insert(m.cell);
      refine_keys.push_back({mesh.key(m.cell), m.dir});
    }
  std::vector<std::pair<int, int>> coarsen;
  for (const auto& m : marks.coarsen)
    if (m.kind == MarkKind::h && !refined_cells.count(m.cell))
      coarsen.push_back({m.cell, m.dir});
  if (!coarsen.empty())
    s.h_coarsened = mesh.coarsen(coarsen);

  std::vector<std::pair<int, int>> refine;
  for (const auto& [key, dir] : refine_keys) {
    const int c = mesh.find(key);
    if (c >= 0)
      refine.push_back({c, dir});
  }
  if (!refine.empty())
    mesh.refine(refine);
  s.h_refined = static_cast<int>(refine.size());

  // time: degree changes, then one pass that merges and bisects
  const int kstep = cfg.even_degrees ? 2 : 1;
  std::vector<int> action(tm.size(), 0); // 1 bisect, -1 merge candidate
  for (const auto& m : marks.refine_time) {
    if (m.kind == MarkKind::p) {
      bool clamped = false;
      tm.set_degree(m.slab, step_degree(tm[m.slab].k, kstep, cfg.k_min, cfg.k_max,
                                        cfg.even_degrees, &clamped));
      s.clamped += clamped;
      ++s.k_refined;
    } else {
      action[m.slab] = 1;
    }
  }
  for (const auto& m : marks.coarsen_time) {
    if (m.kind == MarkKind::p) {
      bool clamped = false;
      tm.set_degree(m.slab, step_degree(tm[m.slab].k, -kstep, cfg.k_min, cfg.k_max,
                                        cfg.even_degrees, &clamped));
      s.clamped += clamped;
      ++s.k_coarsened;
    } else {
      action[m.slab] = -1;
    }
  }
  std::vector<TimeSlab> slabs;
  for (std::size_t n = 0; n < tm.size(); ++n) {
    const auto& sl = tm[n];
    if (action[n] == 1) {
      const double mid = 0.5 * (sl.t0 + sl.t1);
      slabs.push_back({sl.t0, mid, sl.k});
      slabs.push_back({mid, sl.t1, sl.k});
      ++s.tau_refined;
    } else if (action[n] == -1 && n + 1 < tm.size() && action[n + 1] == -1) {
      slabs.push_back({sl.t0, tm[n + 1].t1, std::max(sl.k, tm[n + 1].k)});
      ++s.tau_coarsened;
      ++n;
    } else {
      slabs.push_back(sl);
    }
  }
  tm = TimeMesh(std::move(slabs));
  return s;
}

std::string format_marks(const MarkSet& marks, const Mesh& mesh, int loop) {
  std::ostringstream out;
  out.precision(10);
  auto space = [&](const SpaceMark& m, const char* action) {
    out << loop << ",space," << action << ',' << (m.kind == MarkKind::h ? 'h' : 'p') << ','
        << m.cell << ',' << (m.dir == 0 ? 'x' : 'y') << ',' << mesh.origin(m.cell, 0) << ','
        << mesh.origin(m.cell, 1) << ',' << m.ratio << '\n';
  };
  auto time = [&](const TimeMark& m, const char* action) {
    out << loop << ",time," << action << ',' << (m.kind == MarkKind::h ? "tau" : "k") << ','
        << m.slab << ",t,,," << m.ratio << '\n';
  };
  for (const auto& m : marks.refine)
    space(m, "refine");
  for (const auto& m : marks.coarsen)
    space(m, "coarsen");
  for (const auto& m : marks.refine_time)
    time(m, "refine");
  for (const auto& m : marks.coarsen_time)
    time(m, "coarsen");
  return out.str();
}

} // namespace sthp
