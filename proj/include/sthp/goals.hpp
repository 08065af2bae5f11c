#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sthp/assembly.hpp"

namespace sthp {

enum class GoalKind { l2_space_time, point_value };

GoalKind parse_goal(const std::string& id);
std::string goal_name(GoalKind kind);

struct GoalConfig {
  GoalKind kind = GoalKind::l2_space_time;
  double xc = 0.5, yc = 0.5;
  double s = 1.0 / 16.0;
};

/// Regularized Dirac delta alpha exp(1 - 1/(1 - r^2/s^2)) normalized to unit
/// integral over the domain.
class Bump {
public:
  Bump(double xc, double yc, double s, const Domain& domain);
  double operator()(double x, double y) const;
  double radius() const { return s_; }
  double xc() const { return xc_; }
  double yc() const { return yc_; }
  double scale() const { return alpha_; }
  /// Subdivide boxes that meet the support and are larger than s/4.
  bool resolve(const Box& b) const;

private:
  double xc_, yc_, s_, alpha_ = 1.0;
};

/// Goal functional of one DWR loop. Loads live on the residual space: the
/// spatial dofs passed in and the temporal degrees of the time mesh passed in.
struct GoalData {
  std::vector<Eigen::MatrixXd> load;
  /// Goal error J(u) - J(u_h) of the reference discrete solution.
  double error = 0.0;
  bool saturated = false;
};

/// int (u(T), delta).
double point_goal_exact(const ProblemDefinition& problem, const Bump& bump);

/// Load of J(v) = int_Omega delta v(T): nonzero only on the terminal node of
/// the last slab.
std::vector<Eigen::MatrixXd> point_goal_load(const Mesh& mesh, const DofMap& dofs,
                                             const TimeMesh& tm,
                                             const ProblemDefinition& problem,
                                             const Bump& bump);

/// Values of a discrete field (slab coefficients on dofs) at the points of
/// cell c for the given reference times of slab degree k.
Eigen::MatrixXd evaluate_cell(const Eigen::MatrixXd& phi, const DofMap& dofs, std::size_t c,
                              const Eigen::MatrixXd& coeffs, int k,
                              const std::vector<double>& ref_times);

/// Space-time L2 norm of u_exact - v; v lives on (dofs, vtm).
double l2_error(const Mesh& mesh, const DofMap& dofs, const TimeMesh& vtm,
                const ProblemDefinition& problem, const std::vector<Eigen::MatrixXd>& v);

/// Frozen L2 goal J(w) = int (w, e) / |e| with e = u_exact - v. The load is
/// built for the time mesh ltm (degrees >= those of vtm).
GoalData l2_goal(const Mesh& mesh, const DofMap& dofs, const TimeMesh& vtm,
                 const TimeMesh& ltm, const ProblemDefinition& problem,
                 const std::vector<Eigen::MatrixXd>& v);

/// Time mesh with every slab degree raised by shift.
TimeMesh shifted(const TimeMesh& tm, int shift);

/// Raise the temporal degree of every slab of a field from tm to tm + shift.
std::vector<Eigen::MatrixXd> embed_in_time(const TimeMesh& tm,
                                           const std::vector<Eigen::MatrixXd>& v, int shift);

} // namespace sthp
