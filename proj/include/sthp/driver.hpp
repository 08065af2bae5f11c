#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sthp/adaptivity.hpp"
#include "sthp/goals.hpp"

namespace sthp {

struct RunConfig {
  std::string problem = "interior_layer";
  double eps = 1e-6;
  GoalConfig goal;
  AdaptConfig adapt;
  SolverConfig solver;
  PenaltyConfig penalty;
  int max_loops = 10;
  double eta_target = 0.0;   ///< stop when |eta_total| drops below
  double error_target = 0.0; ///< stop when |e| drops below (if known)
  long max_dofs = 0;         ///< stop once N_tot exceeds this (0: no limit)
  double time_budget = 0.0;  ///< seconds, checked between loops (0: no limit)
  int coarse_nx = 4, coarse_ny = 4;
  int p0 = 1, k0 = 1, slabs0 = 1;
  std::string out_dir;       ///< empty: no files
  bool checkpoint = false;
  int orthogonality_samples = 20;

  void validate() const;
};

/// Parses flat key=value text ('#' comments). Unknown keys throw.
RunConfig parse_config(const std::string& text, RunConfig base = {});
RunConfig load_config(const std::string& path, RunConfig base = {});
std::string format_config(const RunConfig& cfg);

/// One row of the loop table.
struct LoopRecord {
  int loop = 0;
  int cells = 0;
  long nx_lo = 0, nx_ho = 0, nt = 0;
  double work = 0.0;
  double rho_max = 1.0;
  double eta_h1 = 0.0, eta_h2 = 0.0, eta_h = 0.0, eta_tau = 0.0, eta_total = 0.0;
  double error = 0.0;  ///< NaN when unknown
  double i_eff = 0.0;  ///< NaN when unknown
  // diagnostics
  long n_tot = 0;
  int slabs = 0;
  int max_p = 0, max_k = 0;
  int max_outer = 0;
  double orthogonality = 0.0; ///< NaN when not checked
  double eta_e = 0.0, eta_h_iso = 0.0;
  double seconds = 0.0;
};

/// Discretization state between loops.
struct RunState {
  Mesh mesh;
  TimeMesh time_mesh;
  int next_loop = 0;
  std::vector<LoopRecord> records;
  double elapsed = 0.0;
};

struct RunResult {
  std::vector<LoopRecord> records;
  std::vector<IterationRecord> iterations;
  std::vector<std::string> warnings;
  double max_lu_residual = 0.0, max_eigen_residual = 0.0;
  std::vector<int> degrees_seen; ///< temporal degrees whose factors were used
  bool solver_failed = false;
  std::string failure;
  std::optional<RunState> final_state;
};

RunState initial_state(const RunConfig& cfg);

using LoopCallback = std::function<void(const LoopRecord&)>;

/// Estimate/mark/refine loop. Writes CSV, mark log, mesh dumps and
/// checkpoints into cfg.out_dir if it is set.
RunResult run_dwr(const RunConfig& cfg, std::optional<RunState> resume = std::nullopt,
                  const LoopCallback& on_loop = {});

/// Header of the loop table.
std::string loop_table_header();
std::string loop_table_row(const LoopRecord& r);
std::string diagnostics_header();
std::string diagnostics_row(const LoopRecord& r);

/// Per-cell CSV: x0,y0,h1,h2,p1,p2,eta1,eta2.
std::string mesh_dump(const Mesh& mesh, const EstimateReport* report);

/// Checkpoints as JSON.
void save_checkpoint(const std::string& path, const RunConfig& cfg, const RunState& state);
std::pair<RunConfig, RunState> load_checkpoint(const std::string& path);

} // namespace sthp
