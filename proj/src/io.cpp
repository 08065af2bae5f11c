#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "sthp/driver.hpp"

namespace sthp {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos)
    return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size())
    throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  return d;
}

long to_long(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d))
    throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  return static_cast<long>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on")
    return true;
  if (v == "0" || v == "false" || v == "no" || v == "off")
    return false;
  throw std::invalid_argument("config: '" + key + "' expects a boolean, got '" + v + "'");
}

void set_key(RunConfig& c, const std::string& key, const std::string& v) {
  auto i = [&] { return static_cast<int>(to_long(key, v)); };
  auto d = [&] { return to_double(key, v); };
  if (key == "problem") c.problem = v;
  else if (key == "eps") c.eps = d();
  else if (key == "goal") c.goal.kind = parse_goal(v);
  else if (key == "goal_x") c.goal.xc = d();
  else if (key == "goal_y") c.goal.yc = d();
  else if (key == "goal_s") c.goal.s = d();
  else if (key == "theta_h") c.adapt.theta_h = d();
  else if (key == "theta_tau") c.adapt.theta_tau = d();
  else if (key == "theta_h_co") c.adapt.theta_h_co = d();
  else if (key == "theta_tau_co") c.adapt.theta_tau_co = d();
  else if (key == "gamma") c.adapt.gamma = d();
  else if (key == "p_min") c.adapt.p_min = i();
  else if (key == "p_max") c.adapt.p_max = i();
  else if (key == "k_min") c.adapt.k_min = i();
  else if (key == "k_max") c.adapt.k_max = i();
  else if (key == "even_degrees") c.adapt.even_degrees = to_bool(key, v);
  else if (key == "strategy") {
    if (v != "hp" && v != "h")
      throw std::invalid_argument("config: strategy must be 'hp' or 'h'");
    c.adapt.h_only = v == "h";
  }
  else if (key == "max_loops") c.max_loops = i();
  else if (key == "eta_target") c.eta_target = d();
  else if (key == "error_target") c.error_target = d();
  else if (key == "max_dofs") c.max_dofs = to_long(key, v);
  else if (key == "time_budget") c.time_budget = d();
  else if (key == "coarse_nx") c.coarse_nx = i();
  else if (key == "coarse_ny") c.coarse_ny = i();
  else if (key == "p0") c.p0 = i();
  else if (key == "k0") c.k0 = i();
  else if (key == "slabs0") c.slabs0 = i();
  else if (key == "out_dir") c.out_dir = v;
  else if (key == "checkpoint") c.checkpoint = to_bool(key, v);
  else if (key == "gmres_tol") c.solver.outer.tolerance = d();
  else if (key == "gmres_max_iter") c.solver.outer.max_iterations = i();
  else if (key == "gmres_restart") c.solver.outer.restart = i();
  else if (key == "inner_tol") c.solver.inner.tolerance = d();
  else if (key == "inner_max_iter") c.solver.inner.max_iterations = c.solver.inner.restart = i();
  else if (key == "precondition") c.solver.precondition = to_bool(key, v);
  else if (key == "c_pen") c.penalty.c_pen = d();
  else if (key == "orthogonality_samples") c.orthogonality_samples = i();
  else throw std::invalid_argument("config: unknown key '" + key + "'");
}

std::string num(double v) {
  if (std::isnan(v))
    return "nan";
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

std::string sci(double v) {
  if (std::isnan(v))
    return "nan";
  std::ostringstream s;
  s.precision(6);
  s << std::scientific << v;
  return s.str();
}

} // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos)
      line.resize(hash);
    line = trim(line);
    if (line.empty())
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key=value");
    set_key(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::string& path, RunConfig base) {
  std::ifstream f(path);
  if (!f)
    throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const RunConfig& c) {
  std::ostringstream o;
  o << "problem=" << c.problem << '\n'
    << "eps=" << num(c.eps) << '\n'
    << "goal=" << goal_name(c.goal.kind) << '\n'
    << "goal_x=" << num(c.goal.xc) << '\n'
    << "goal_y=" << num(c.goal.yc) << '\n'
    << "goal_s=" << num(c.goal.s) << '\n'
    << "theta_h=" << num(c.adapt.theta_h) << '\n'
    << "theta_tau=" << num(c.adapt.theta_tau) << '\n'
    << "theta_h_co=" << num(c.adapt.theta_h_co) << '\n'
    << "theta_tau_co=" << num(c.adapt.theta_tau_co) << '\n'
    << "gamma=" << num(c.adapt.gamma) << '\n'
    << "p_min=" << c.adapt.p_min << '\n'
    << "p_max=" << c.adapt.p_max << '\n'
    << "k_min=" << c.adapt.k_min << '\n'
    << "k_max=" << c.adapt.k_max << '\n'
    << "even_degrees=" << c.adapt.even_degrees << '\n'
    << "strategy=" << (c.adapt.h_only ? "h" : "hp") << '\n'
    << "max_loops=" << c.max_loops << '\n'
    << "eta_target=" << num(c.eta_target) << '\n'
    << "error_target=" << num(c.error_target) << '\n'
    << "max_dofs=" << c.max_dofs << '\n'
    << "time_budget=" << num(c.time_budget) << '\n'
    << "coarse_nx=" << c.coarse_nx << '\n'
    << "coarse_ny=" << c.coarse_ny << '\n'
    << "p0=" << c.p0 << '\n'
    << "k0=" << c.k0 << '\n'
    << "slabs0=" << c.slabs0 << '\n'
    << "out_dir=" << c.out_dir << '\n'
    << "checkpoint=" << c.checkpoint << '\n'
    << "gmres_tol=" << num(c.solver.outer.tolerance) << '\n'
    << "gmres_max_iter=" << c.solver.outer.max_iterations << '\n'
    << "gmres_restart=" << c.solver.outer.restart << '\n'
    << "inner_tol=" << num(c.solver.inner.tolerance) << '\n'
    << "inner_max_iter=" << c.solver.inner.max_iterations << '\n'
    << "precondition=" << c.solver.precondition << '\n'
    << "c_pen=" << num(c.penalty.c_pen) << '\n'
    << "orthogonality_samples=" << c.orthogonality_samples << '\n';
  return o.str();
}

std::string loop_table_header() {
  return "l,cells,Nx_lo,Nx_ho,Nt,work,rho_max,eta_h1,eta_h2,eta_h_a,eta_tau,eta_tauh_a,e,I_eff";
}

std::string loop_table_row(const LoopRecord& r) {
  std::ostringstream o;
  o << r.loop << ',' << r.cells << ',' << r.nx_lo << ',' << r.nx_ho << ',' << r.nt << ','
    << sci(r.work) << ',' << sci(r.rho_max) << ',' << sci(r.eta_h1) << ',' << sci(r.eta_h2)
    << ',' << sci(r.eta_h) << ',' << sci(r.eta_tau) << ',' << sci(r.eta_total) << ','
    << sci(r.error) << ',' << sci(r.i_eff);
  return o.str();
}

std::string diagnostics_header() {
  return "l,N_tot,slabs,max_p,max_k,max_outer,orthogonality,eta_E,eta_h_iso,seconds";
}

std::string diagnostics_row(const LoopRecord& r) {
  std::ostringstream o;
  o << r.loop << ',' << r.n_tot << ',' << r.slabs << ',' << r.max_p << ',' << r.max_k << ','
    << r.max_outer << ',' << sci(r.orthogonality) << ',' << sci(r.eta_e) << ','
    << sci(r.eta_h_iso) << ',' << sci(r.seconds);
  return o.str();
}

std::string mesh_dump(const Mesh& mesh, const EstimateReport* report) {
  std::ostringstream o;
  o.precision(12);
  o << "x0,y0,h1,h2,p1,p2,eta1,eta2\n";
  for (std::size_t c = 0; c < mesh.n_cells(); ++c) {
    const auto& cell = mesh.cells()[c];
    o << mesh.origin(c, 0) << ',' << mesh.origin(c, 1) << ',' << mesh.h(c, 0) << ','
      << mesh.h(c, 1) << ',' << cell.degree[0] << ',' << cell.degree[1] << ',';
    if (report && static_cast<Eigen::Index>(c) < report->eta_h_high.rows())
      o << report->eta_h_high(c, 0) << ',' << report->eta_h_high(c, 1);
    else
      o << ',';
    o << '\n';
  }
  return o.str();
}

namespace {

nlohmann::json record_json(const LoopRecord& r) {
  auto nan_safe = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
  return {{"loop", r.loop}, {"cells", r.cells}, {"nx_lo", r.nx_lo}, {"nx_ho", r.nx_ho},
          {"nt", r.nt}, {"work", r.work}, {"rho_max", r.rho_max}, {"eta_h1", r.eta_h1},
          {"eta_h2", r.eta_h2}, {"eta_h", r.eta_h}, {"eta_tau", r.eta_tau},
          {"eta_total", r.eta_total}, {"error", nan_safe(r.error)}, {"i_eff", nan_safe(r.i_eff)},
          {"n_tot", r.n_tot}, {"slabs", r.slabs}, {"max_p", r.max_p}, {"max_k", r.max_k},
          {"max_outer", r.max_outer}, {"orthogonality", nan_safe(r.orthogonality)},
          {"eta_e", r.eta_e}, {"eta_h_iso", r.eta_h_iso}, {"seconds", r.seconds}};
}

LoopRecord record_from(const nlohmann::json& j) {
  auto d = [&](const char* k) {
    return j.at(k).is_null() ? std::nan("") : j.at(k).get<double>();
  };
  LoopRecord r;
  r.loop = j.at("loop");
  r.cells = j.at("cells");
  r.nx_lo = j.at("nx_lo");
  r.nx_ho = j.at("nx_ho");
  r.nt = j.at("nt");
  r.work = d("work");
  r.rho_max = d("rho_max");
  r.eta_h1 = d("eta_h1");
  r.eta_h2 = d("eta_h2");
  r.eta_h = d("eta_h");
  r.eta_tau = d("eta_tau");
  r.eta_total = d("eta_total");
  r.error = d("error");
  r.i_eff = d("i_eff");
  r.n_tot = j.at("n_tot");
  r.slabs = j.at("slabs");
  r.max_p = j.at("max_p");
  r.max_k = j.at("max_k");
  r.max_outer = j.at("max_outer");
  r.orthogonality = d("orthogonality");
  r.eta_e = d("eta_e");
  r.eta_h_iso = d("eta_h_iso");
  r.seconds = d("seconds");
  return r;
}

} // namespace

void save_checkpoint(const std::string& path, const RunConfig& cfg, const RunState& state) {
  nlohmann::json j;
  j["config"] = format_config(cfg);
  j["next_loop"] = state.next_loop;
  j["elapsed"] = state.elapsed;
  const auto& m = state.mesh;
  j["coarse"] = {m.coarse_dims()[0], m.coarse_dims()[1]};
  const auto& d = m.domain();
  j["domain"] = {d.x0, d.x1, d.y0, d.y1};
  std::vector<int> boundary;
  for (int s = 0; s < 4; ++s)
    boundary.push_back(m.boundary_kind(s) == BoundaryKind::dirichlet ? 0 : 1);
  j["boundary"] = boundary;
  auto& cells = j["cells"] = nlohmann::json::array();
  for (const auto& c : m.cells())
    cells.push_back({c.level[0], c.index[0], c.level[1], c.index[1], c.degree[0], c.degree[1]});
  auto& slabs = j["slabs"] = nlohmann::json::array();
  for (const auto& s : state.time_mesh.slabs())
    slabs.push_back({s.t0, s.t1, s.k});
  auto& recs = j["records"] = nlohmann::json::array();
  for (const auto& r : state.records)
    recs.push_back(record_json(r));
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp);
    if (!f)
      throw std::runtime_error("cannot write checkpoint '" + tmp + "'");
    f << j.dump(1) << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

std::pair<RunConfig, RunState> load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f)
    throw std::invalid_argument("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed checkpoint: ") + e.what());
  }
  const RunConfig cfg = parse_config(j.at("config").get<std::string>());
  std::vector<Cell> cells;
  for (const auto& c : j.at("cells")) {
    Cell cell;
    cell.level = {c[0].get<int>(), c[2].get<int>()};
    cell.index = {c[1].get<std::int64_t>(), c[3].get<std::int64_t>()};
    cell.degree = {c[4].get<int>(), c[5].get<int>()};
    cells.push_back(cell);
  }
  const auto& dom = j.at("domain");
  Mesh mesh(j.at("coarse")[0], j.at("coarse")[1],
            Domain{dom[0], dom[1], dom[2], dom[3]}, std::move(cells));
  const auto& b = j.at("boundary");
  for (int s = 0; s < 4; ++s)
    mesh.set_boundary_kind(s, b[s].get<int>() == 0 ? BoundaryKind::dirichlet
                                                   : BoundaryKind::neumann);
  std::vector<TimeSlab> slabs;
  for (const auto& s : j.at("slabs"))
    slabs.push_back({s[0].get<double>(), s[1].get<double>(), s[2].get<int>()});
  std::vector<LoopRecord> records;
  for (const auto& r : j.at("records"))
    records.push_back(record_from(r));
  RunState state{std::move(mesh), TimeMesh(std::move(slabs)), j.at("next_loop").get<int>(),
                 std::move(records), j.at("elapsed").get<double>()};
  return {cfg, std::move(state)};
}

} // namespace sthp
