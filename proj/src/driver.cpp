#include "sthp/driver.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <stdexcept>

namespace sthp {

void RunConfig::validate() const {
  if (!(eps > 0.0))
    throw std::invalid_argument("eps must be positive");
  if (max_loops < 0)
    throw std::invalid_argument("max_loops must be >= 0");
  if (coarse_nx < 1 || coarse_ny < 1)
    throw std::invalid_argument("coarse grid needs at least one cell per direction");
  if (p0 < adapt.p_min || p0 > adapt.p_max || k0 < adapt.k_min || k0 > adapt.k_max)
    throw std::invalid_argument("initial degrees outside the degree bounds");
  if (slabs0 < 1)
    throw std::invalid_argument("need at least one time slab");
  if (!(goal.s > 0.0))
    throw std::invalid_argument("goal cutoff s must be positive");
  if (!(solver.outer.tolerance > 0.0) || solver.outer.max_iterations < 1 ||
      solver.outer.restart < 1 || !(solver.inner.tolerance > 0.0) ||
      solver.inner.max_iterations < 1 || solver.inner.restart < 1)
    throw std::invalid_argument("solver settings must be positive");
  if (!(penalty.c_pen > 0.0))
    throw std::invalid_argument("penalty constant must be positive");
  adapt.validate();
}

RunState initial_state(const RunConfig& cfg) {
  const auto problem = make_problem(cfg.problem, cfg.eps);
  Mesh mesh(cfg.coarse_nx, cfg.coarse_ny, problem.domain);
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    mesh.set_degree(c, {cfg.p0, cfg.p0});
  for (int side = 0; side < 4; ++side)
    mesh.set_boundary_kind(side, problem.boundary[side]);
  return RunState{std::move(mesh), TimeMesh(problem.end_time, cfg.slabs0, cfg.k0), 0, {}, 0.0};
}

namespace {

double feature_scale(const RunConfig& cfg) {
  return cfg.problem == "interior_layer" ? std::sqrt(5.0 * cfg.eps) : 1.0;
}

SpaceTimeField times_embedding(const TimeMesh& tm, const SpaceTimeField& load) {
  SpaceTimeField out;
  for (std::size_t n = 0; n < load.size(); ++n)
    out.push_back(load[n] * temporal_embedding(tm[n].k, tm[n].k + 1));
  return out;
}

} // namespace

RunResult run_dwr(const RunConfig& cfg, std::optional<RunState> resume,
                  const LoopCallback& on_loop) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  RunResult result;
  RunState state = resume ? std::move(*resume) : initial_state(cfg);
  result.records = state.records;
  const double elapsed0 = state.elapsed;

  const auto problem = make_problem(cfg.problem, cfg.eps);
  if (problem.has_exact()) {
    const double r = manufactured_residual(problem, 20, 7u, feature_scale(cfg));
    if (r > 1e-6)
      throw std::runtime_error("manufactured source fails the finite-difference check: " +
                               std::to_string(r));
  }
  if (!problem.has_exact() && cfg.goal.kind == GoalKind::l2_space_time)
    throw std::invalid_argument("the L2 goal needs a problem with exact solution");
  std::optional<Bump> bump;
  if (cfg.goal.kind == GoalKind::point_value)
    bump.emplace(cfg.goal.xc, cfg.goal.yc, cfg.goal.s, problem.domain);
  const double j_exact =
      bump && problem.has_exact() ? point_goal_exact(problem, *bump)
                                  : std::numeric_limits<double>::quiet_NaN();

  std::ofstream table, diag, marks_log;
  const bool files = !cfg.out_dir.empty();
  if (files) {
    std::filesystem::create_directories(cfg.out_dir);
    const bool append = resume.has_value();
    const auto mode = append ? std::ios::app : std::ios::trunc;
    table.open(cfg.out_dir + "/loops.csv", std::ios::out | mode);
    diag.open(cfg.out_dir + "/diagnostics.csv", std::ios::out | mode);
    marks_log.open(cfg.out_dir + "/marks.csv", std::ios::out | mode);
    if (!append) {
      table << loop_table_header() << '\n';
      diag << diagnostics_header() << '\n';
      marks_log << "loop,where,action,kind,index,dir,x0,y0,ratio\n";
    }
  }

  std::set<int> degrees;
  const int first_loop = state.next_loop;
  for (int loop = first_loop; loop <= cfg.max_loops; ++loop) {
    const auto loop_start = clock::now();
    Mesh& mesh = state.mesh;
    TimeMesh& tm = state.time_mesh;
    const DofMap ho = build_dof_map(mesh, 1);
    const TimeMesh tu = shifted(tm, 1);

    const SparseMatrix mass = assemble_mass(mesh, ho);
    const SparseMatrix stiffness = assemble_stiffness(mesh, ho, problem, 0.0, cfg.penalty);
    SpaceTimeField f_union = assemble_rhs(mesh, ho, problem, tm, 1, cfg.penalty);
    const Eigen::VectorXd b0 = assemble_initial_load(mesh, ho, problem);
    const SpaceTimeField f_solve = times_embedding(tm, f_union);
    add_initial_term(f_union, tu, b0);

    SpaceTimeSolver solver(mass, stiffness, cfg.solver);
    LoopRecord rec;
    rec.loop = loop;
    SpaceTimeField u, z, j_union;
    GoalData goal;
    try {
      u = solver.solve_primal(tm, f_solve, b0);
      const auto ru = restrict_field(ho, Restriction::to_p, u);
      if (bump) {
        j_union = point_goal_load(mesh, ho, tu, problem, *bump);
        goal.error = j_exact - pairing(j_union, embed_in_time(tm, ru, 1));
      } else {
        goal = l2_goal(mesh, ho, tm, tu, problem, ru);
        j_union = goal.load;
      }
      z = solver.solve_adjoint(tm, times_embedding(tm, j_union));
    } catch (const SolverError& e) {
      result.solver_failed = true;
      result.failure = e.what();
      break;
    }
    for (const auto& it : solver.log()) {
      result.iterations.push_back(it);
      rec.max_outer = std::max(rec.max_outer, it.outer);
      degrees.insert(it.k);
    }
    for (const auto& w : solver.warnings())
      result.warnings.push_back(w);

    const Eigen::VectorXd u0h = l2_projection(mass, b0);
    const EstimatorInput in{mesh, ho, tm, mass, stiffness, f_union, j_union, u, z, &u0h};
    rec.orthogonality = loop == first_loop && cfg.orthogonality_samples > 0
                            ? galerkin_orthogonality(in, cfg.orthogonality_samples, 11u)
                            : std::numeric_limits<double>::quiet_NaN();
    const EstimateReport rep = compute_indicators(in);

    rec.cells = static_cast<int>(mesh.n_cells());

    rec.nx_ho = ho.n_dofs;
    rec.nx_lo = build_dof_map(mesh, 0).n_dofs;
    rec.nt = tm.temporal_dofs();
    rec.n_tot = rec.nx_lo * rec.nt;
    rec.work = work_metric(solver.log());
    rec.rho_max = mesh.max_aspect_ratio();
    rec.eta_h1 = rep.eta_h1;
    rec.eta_h2 = rep.eta_h2;
    rec.eta_h = rep.eta_h;
    rec.eta_tau = rep.eta_tau;
    rec.eta_total = rep.eta_total;
    rec.eta_e = rep.eta_e;
    rec.eta_h_iso = rep.eta_h_iso;
    rec.slabs = static_cast<int>(tm.size());
    rec.max_k = tm.max_degree();
    for (const auto& c : mesh.cells())
      rec.max_p = std::max({rec.max_p, c.degree[0], c.degree[1]});
    if (problem.has_exact()) {
      rec.error = goal.error;
      rec.i_eff = effectivity(rep.eta_total, goal.error);
    } else {
      rec.error = rec.i_eff = std::numeric_limits<double>::quiet_NaN();
    }
    rec.seconds = std::chrono::duration<double>(clock::now() - loop_start).count();
    result.records.push_back(rec);
    if (files) {
      table << loop_table_row(rec) << '\n' << std::flush;
      diag << diagnostics_row(rec) << '\n' << std::flush;
      std::ofstream(cfg.out_dir + "/mesh_" + std::to_string(loop) + ".csv")
          << mesh_dump(mesh, &rep);
    }
    if (on_loop)
      on_loop(rec);

    const double elapsed =
        elapsed0 + std::chrono::duration<double>(clock::now() - start).count();
    const bool done = loop == cfg.max_loops ||
                      std::abs(rep.eta_total) < cfg.eta_target ||
                      (cfg.error_target > 0.0 && std::abs(rec.error) < cfg.error_target) ||
                      (cfg.max_dofs > 0 && rec.n_tot > cfg.max_dofs) ||
                      (cfg.time_budget > 0.0 && elapsed > cfg.time_budget);
    const bool save = files && cfg.checkpoint;
    if (done && !save)
      break;

    const MarkSet marks = mark(rep, cfg.adapt);
    if (files)
      marks_log << format_marks(marks, mesh, loop) << std::flush;
    // a stopped run still checkpoints the adapted state so a resume
    // continues with the next loop; the returned state stays unadapted
    std::optional<RunState> copy;
    if (done)
      copy = state;
    RunState& target = copy ? *copy : state;
    apply_marks(target.mesh, target.time_mesh, marks, cfg.adapt);
    target.next_loop = loop + 1;
    target.records = result.records;
    target.elapsed = elapsed;
    if (save)
      save_checkpoint(cfg.out_dir + "/checkpoint.json", cfg, target);
    if (done)
      break;
  }

  for (int k : degrees) {
    for (bool adj : {false, true}) {
      const auto& f = preconditioner_factors(k, adj);
      result.max_lu_residual = std::max(result.max_lu_residual, f.lu_residual);
      result.max_eigen_residual = std::max(result.max_eigen_residual, f.eigen_residual);
    }
    result.degrees_seen.push_back(k);
  }
  state.records = result.records;
  result.final_state = std::move(state);
  return result;
}

} // namespace sthp
