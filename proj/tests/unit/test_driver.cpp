#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sthp/driver.hpp"

using namespace sthp;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("sthp_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

RunConfig small_run() {
  RunConfig c;
  c.problem = "smooth";
  c.eps = 0.05;
  c.goal.kind = GoalKind::point_value;
  c.goal.xc = 0.4;
  c.goal.yc = 0.6;
  c.goal.s = 0.2;
  c.coarse_nx = c.coarse_ny = 2;
  c.orthogonality_samples = 0;
  return c;
}

} // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config("# comment\nproblem = smooth\neps=1e-3 # trailing\n"
                              "goal=point\ntheta_h=0.25\nstrategy=h\nmax_loops=3\n");
  CHECK(c.problem == "smooth");
  CHECK(c.eps == 1e-3);
  CHECK(c.goal.kind == GoalKind::point_value);
  CHECK(c.adapt.theta_h == 0.25);
  CHECK(c.adapt.h_only);
  CHECK(c.max_loops == 3);
  CHECK_THROWS(parse_config("unknown_key=1\n"));
  CHECK_THROWS(parse_config("eps\n"));
  CHECK_THROWS(parse_config("eps=abc\n"));
  CHECK_THROWS(parse_config("max_loops=2.5\n"));
  CHECK_THROWS(load_config("/nonexistent/config.txt"));

  RunConfig bad;
  bad.adapt.gamma = 1.5;
  CHECK_THROWS(bad.validate());
  bad = {};
  bad.eps = 0.0;
  CHECK_THROWS(bad.validate());
  bad = {};
  bad.p0 = 0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("config text round trip") {
  RunConfig c = small_run();
  c.adapt.even_degrees = true;
  c.adapt.p_min = 2;
  c.p0 = 2;
  c.solver.outer.tolerance = 3e-11;
  const auto again = parse_config(format_config(c));
  CHECK(format_config(again) == format_config(c));
}

TEST_CASE("table headers") {
  CHECK(loop_table_header() ==
        "l,cells,Nx_lo,Nx_ho,Nt,work,rho_max,eta_h1,eta_h2,eta_h_a,eta_tau,eta_tauh_a,e,I_eff");
  LoopRecord r;
  std::stringstream row(loop_table_row(r));
  int commas = 0;
  for (char ch : row.str())
    commas += ch == ',';
  CHECK(commas == 13);
}

TEST_CASE("zero loops gives one solve and no adaptation") {
  RunConfig c = small_run();
  c.max_loops = 0;
  const auto r = run_dwr(c);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].loop == 0);
  CHECK(r.records[0].cells == 4);
  CHECK(r.records[0].nx_lo == 16);
  CHECK(r.records[0].nx_ho == 36);
  CHECK(r.records[0].nt == 2);
  CHECK(r.records[0].n_tot == 32);
  CHECK(std::isfinite(r.records[0].i_eff));
  REQUIRE(r.final_state);
  CHECK(r.final_state->mesh.n_cells() == 4);
}

TEST_CASE("work column is recomputable from the iteration log") {
  RunConfig c = small_run();
  c.max_loops = 0;
  const auto r = run_dwr(c);
  CHECK(r.records[0].work == work_metric(r.iterations));
  double w = 0.0;
  for (const auto& it : r.iterations)
    w += (it.k + 1.0) * it.n_space * it.outer;
  CHECK(r.records[0].work == w);
}

TEST_CASE("files and checkpoint resume reproduce the rows") {
  RunConfig c = small_run();
  c.max_loops = 3;
  const auto full_dir = scratch("full");
  c.out_dir = full_dir.string();
  run_dwr(c);
  const auto full = read_file(full_dir / "loops.csv");
  CHECK(full.rfind(loop_table_header() + "\n", 0) == 0);
  CHECK(std::filesystem::exists(full_dir / "diagnostics.csv"));
  CHECK(std::filesystem::exists(full_dir / "marks.csv"));
  CHECK(std::filesystem::exists(full_dir / "mesh_3.csv"));
  CHECK(read_file(full_dir / "mesh_0.csv").rfind("x0,y0,h1,h2,p1,p2,eta1,eta2\n", 0) == 0);

  const auto part_dir = scratch("part");
  RunConfig first = c;
  first.out_dir = part_dir.string();
  first.max_loops = 1;
  first.checkpoint = true;
  run_dwr(first);
  auto [cfg, state] = load_checkpoint((part_dir / "checkpoint.json").string());
  CHECK(state.next_loop == 2);
  CHECK(state.records.size() == 2);
  cfg.max_loops = 3;
  cfg.checkpoint = false;
  run_dwr(cfg, std::move(state));
  CHECK(read_file(part_dir / "loops.csv") == full);
  std::filesystem::remove_all(full_dir);
  std::filesystem::remove_all(part_dir);
}

TEST_CASE("the L2 goal needs an exact solution") {
  RunConfig c;
  c.problem = "nonexistent";
  CHECK_THROWS(run_dwr(c));
}
