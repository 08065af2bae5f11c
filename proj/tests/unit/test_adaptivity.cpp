#include <doctest.h>

#include <random>
#include <set>

#include "sthp/adaptivity.hpp"

using namespace sthp;

namespace {

EstimateReport space_report(const std::vector<std::array<double, 2>>& high,
                            const std::vector<std::array<double, 2>>& low) {
  EstimateReport r;
  r.eta_h_high.resize(static_cast<Eigen::Index>(high.size()), 2);
  r.eta_h_low.resize(static_cast<Eigen::Index>(high.size()), 2);
  for (std::size_t c = 0; c < high.size(); ++c)
    for (int i = 0; i < 2; ++i) {
      r.eta_h_high(c, i) = high[c][i];
      r.eta_h_low(c, i) = low[c][i];
    }
  return r;
}

EstimateReport time_report(const std::vector<double>& high, const std::vector<double>& low) {
  EstimateReport r;
  r.eta_tau_high = Eigen::Map<const Eigen::VectorXd>(high.data(), high.size());
  r.eta_tau_low = Eigen::Map<const Eigen::VectorXd>(low.data(), low.size());
  return r;
}

} // namespace

TEST_CASE("marking counts") {
  CHECK(refine_count(0.125, 16) == 2);
  CHECK(refine_count(0.125, 4) == 1);
  CHECK(refine_count(0.125, 1) == 1);
  CHECK(refine_count(0.5, 5) == 3);
  CHECK(coarsen_count(0.04, 10) == 0);
  CHECK(coarsen_count(0.04, 25) == 1);
  CHECK(saturation_ratio(1.0, 0.0) == 0.0);
  CHECK(saturation_ratio(-2.0, 4.0) == 0.5);
}

TEST_CASE("space marking picks the largest directional indicator") {
  AdaptConfig cfg;
  cfg.theta_h = 0.5; // one mark out of two cells
  cfg.theta_h_co = 0.0;
  const auto r = space_report({{8, 1}, {2, 1}}, {{10, 1}, {1, 1}});
  const auto m = mark_space(r, cfg);
  REQUIRE(m.refine.size() == 1);
  CHECK(m.refine[0].cell == 0);
  CHECK(m.refine[0].dir == 0);
  CHECK(m.coarsen.empty());
}

TEST_CASE("saturation decides between h and p") {
  AdaptConfig cfg;
  cfg.theta_h = 0.5;
  cfg.theta_h_co = 0.0;
  // ratio 0.9 -> h
  auto m = mark_space(space_report({{0.9, 0}}, {{1.0, 1}}), cfg);
  REQUIRE(m.refine.size() == 1);
  CHECK(m.refine[0].kind == MarkKind::h);
  CHECK(m.refine[0].ratio == doctest::Approx(0.9));
  // ratio 0.1 -> p
  m = mark_space(space_report({{0.1, 0}}, {{1.0, 1}}), cfg);
  CHECK(m.refine[0].kind == MarkKind::p);
  // h-only ignores the ratio
  cfg.h_only = true;
  m = mark_space(space_report({{0.1, 0}}, {{1.0, 1}}), cfg);
  CHECK(m.refine[0].kind == MarkKind::h);
}

TEST_CASE("time marking") {
  AdaptConfig cfg;
  cfg.theta_tau = 0.25;
  cfg.theta_tau_co = 0.0;
  // the dominant slab is chosen by the degree-p indicator
  auto m = mark_time(time_report({0.1, 0.1, 0.1, 0.1}, {0.1, 5.0, 0.2, 0.1}), cfg);
  REQUIRE(m.refine_time.size() == 1);
  CHECK(m.refine_time[0].slab == 1);
  m = mark_time(time_report({2.0}, {1.0}), cfg);
  CHECK(m.refine_time[0].kind == MarkKind::h);
  m = mark_time(time_report({0.2}, {1.0}), cfg);
  CHECK(m.refine_time[0].kind == MarkKind::p);
}

TEST_CASE("refine and coarsen sets are disjoint with the requested sizes") {
  std::mt19937 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  AdaptConfig cfg;
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t nc = 5 + trial * 7;
    std::vector<std::array<double, 2>> hi(nc), lo(nc);
    for (std::size_t c = 0; c < nc; ++c)
      for (int i = 0; i < 2; ++i) {
        hi[c][i] = u(rng);
        lo[c][i] = u(rng);
      }
    const auto m = mark_space(space_report(hi, lo), cfg);
    CHECK(static_cast<int>(m.refine.size()) == refine_count(cfg.theta_h, nc));
    CHECK(static_cast<int>(m.coarsen.size()) == coarsen_count(cfg.theta_h_co, nc));
    std::set<std::pair<int, int>> a;
    double smallest = 1e300;
    for (const auto& s : m.refine) {
      a.insert({s.cell, s.dir});
      smallest = std::min(smallest, std::abs(hi[s.cell][s.dir]));
    }
    for (const auto& s : m.coarsen) {
      CHECK_FALSE(a.count({s.cell, s.dir}));
      CHECK(std::abs(hi[s.cell][s.dir]) <= smallest);
    }
  }
}

TEST_CASE("applying marks") {
  AdaptConfig cfg;
  Mesh m(1, 2);
  m.set_degree(0, {9, 3});
  TimeMesh tm(1.0, 2, 1);
  MarkSet s;
  s.refine.push_back({0, 0, MarkKind::p, 0.1});
  s.refine.push_back({1, 1, MarkKind::h, 0.9});
  s.refine_time.push_back({0, MarkKind::p, 0.1});
  s.refine_time.push_back({1, MarkKind::h, 0.9});
  const auto sum = apply_marks(m, tm, s, cfg);
  CHECK(sum.clamped == 1);
  CHECK(m.cells()[m.locate(0.5, 0.25)].degree == std::array<int, 2>{9, 3});
  // the y-mark halves only h_2
  const auto c = static_cast<std::size_t>(m.locate(0.5, 0.9));
  CHECK(m.h(c, 0) == 1.0);
  CHECK(m.h(c, 1) == 0.25);
  REQUIRE(tm.size() == 3);
  CHECK(tm[0].k == 2);
  CHECK(tm[2].t0 == doctest::Approx(0.75));
}

TEST_CASE("even degree mode") {
  AdaptConfig cfg;
  cfg.even_degrees = true;
  cfg.p_min = 2;
  Mesh m(1, 1);
  m.set_degree(0, {2, 2});
  TimeMesh tm(1.0, 1, 2);
  MarkSet s;
  s.refine.push_back({0, 1, MarkKind::p, 0.1});
  s.refine_time.push_back({0, MarkKind::p, 0.1});
  apply_marks(m, tm, s, cfg);
  CHECK(m.cells()[0].degree == std::array<int, 2>{2, 4});
  CHECK(tm[0].k == 4);
}

TEST_CASE("invalid configurations") {
  AdaptConfig cfg;
  cfg.gamma = 1.0;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  cfg.p_max = 12;
  CHECK_THROWS(cfg.validate());
  cfg = {};
  CHECK_NOTHROW(cfg.validate());
}
