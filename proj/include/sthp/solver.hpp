#pragma once

#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sthp/assembly.hpp"
#include "sthp/time_disc.hpp"

namespace sthp {

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct GmresConfig {
  double tolerance = 1e-10; ///< relative to |b|
  int max_iterations = 200;
  int restart = 60;
};

struct SolverConfig {
  GmresConfig outer;
  GmresConfig inner{1e-2, 20, 20};
  bool precondition = true;
};

struct GmresResult {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

using LinearOperator = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Restarted GMRES with right preconditioning. With flexible = true the
/// preconditioned directions are stored (FGMRES), so the preconditioner may
/// change between iterations. x holds the initial guess on entry.
GmresResult gmres(const LinearOperator& a, const LinearOperator* precondition,
                  const Eigen::VectorXd& b, Eigen::VectorXd& x, const GmresConfig& cfg,
                  bool flexible = true);

/// Zero fill-in incomplete LU on the pattern of a.
class Ilu0 {
public:
  Ilu0() = default;
  explicit Ilu0(const SparseMatrix& a);
  void solve(const Eigen::VectorXd& b, Eigen::VectorXd& x) const;

private:
  SparseMatrix lu_;
  std::vector<int> diag_;
};

/// Action of (tau/2) M (x) A_h + A (x) M_h on a slab field X (n_space x (k+1)),
/// or of its transpose. Y = (tau/2) A_h X M^T + M_h X A^T.
class SlabSystem {
public:
  SlabSystem(const SparseMatrix& mass, const SparseMatrix& stiffness, int k, double tau,
             bool adjoint);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  int k() const { return k_; }
  double tau() const { return tau_; }

private:
  const SparseMatrix& mass_;
  const SparseMatrix& stiffness_; // already transposed for the adjoint
  const TemporalMatrices& tm_;
  int k_;
  double tau_;
  bool adjoint_;
};

/// G = M^{-1} A (or M^{-1} A^T), G = L U with unit diagonal U, L = S diag(lambda) S^{-1}.
struct PreconditionerFactors {
  int k = 0;
  bool adjoint = false;
  Eigen::MatrixXd m_inv, g, l, u, s, s_inv;
  Eigen::VectorXd lambda;
  bool ok = false;
  double lu_residual = 0.0;
  double eigen_residual = 0.0;
};

PreconditionerFactors build_preconditioner_factors(int k, bool adjoint);
const PreconditionerFactors& preconditioner_factors(int k, bool adjoint);

/// Per-slab record of the outer and summed inner iteration counts.
struct IterationRecord {
  int slab = 0;
  bool adjoint = false;
  int k = 0;
  int n_space = 0;
  int outer = 0;
  int inner = 0;
  double residual = 0.0;
};

/// Sum of (k+1) N_x N_it over the records.
double work_metric(const std::vector<IterationRecord>& log);

/// Forward march and backward substitution over all slabs on one spatial space.
class SpaceTimeSolver {
public:
  SpaceTimeSolver(const SparseMatrix& mass, const SparseMatrix& stiffness,
                  SolverConfig cfg = {});

  /// F: per-slab loads; initial: (u_0, phi) added on the first slab.
  std::vector<Eigen::MatrixXd> solve_primal(const TimeMesh& tm,
                                            const std::vector<Eigen::MatrixXd>& f,
                                            const Eigen::VectorXd& initial);
  /// Backward substitution with z_{N+1} = 0.
  std::vector<Eigen::MatrixXd> solve_adjoint(const TimeMesh& tm,
                                             const std::vector<Eigen::MatrixXd>& j);

  /// One slab system solve (primal or adjoint) with the preconditioner.
  Eigen::MatrixXd solve_slab(int k, double tau, bool adjoint, const Eigen::MatrixXd& rhs,
                             IterationRecord* record = nullptr);

  /// Apply the Kronecker preconditioner P^{-1} (M^{-1} (x) I).
  Eigen::MatrixXd apply_preconditioner(int k, double tau, bool adjoint,
                                       const Eigen::MatrixXd& v, int* inner = nullptr);

  const std::vector<IterationRecord>& log() const { return log_; }
  std::vector<std::string> warnings() const { return warnings_; }
  const SolverConfig& config() const { return cfg_; }

private:
  struct BlockSolver {
    SparseMatrix matrix;
    Ilu0 ilu;
  };
  const BlockSolver& block(int k, double tau, bool adjoint, int l);

  const SparseMatrix& mass_;
  const SparseMatrix& stiffness_;
  SparseMatrix stiffness_t_;
  SolverConfig cfg_;
  std::vector<IterationRecord> log_;
  std::vector<std::string> warnings_;
  // blocks for the most recent (k, tau, adjoint)
  int cached_k_ = -1;
  double cached_tau_ = 0.0;
  bool cached_adjoint_ = false;
  std::vector<std::unique_ptr<BlockSolver>> blocks_;
};

/// Residual r_n = F_n + coupling - slab(V_n) of a primal field V on the time
/// mesh tm (whose degrees describe V). f must include the initial term.
std::vector<Eigen::MatrixXd> primal_residual(const SparseMatrix& mass,
                                             const SparseMatrix& stiffness,
                                             const TimeMesh& tm,
                                             const std::vector<Eigen::MatrixXd>& f,
                                             const std::vector<Eigen::MatrixXd>& v);

/// Residual r*_n = J_n + coupling - slab^T(Z_n) of an adjoint field Z.
std::vector<Eigen::MatrixXd> adjoint_residual(const SparseMatrix& mass,
                                              const SparseMatrix& stiffness,
                                              const TimeMesh& tm,
                                              const std::vector<Eigen::MatrixXd>& j,
                                              const std::vector<Eigen::MatrixXd>& z);

/// Global operator action (block lower bidiagonal) and its transpose.
std::vector<Eigen::MatrixXd> apply_global(const SparseMatrix& mass,
                                          const SparseMatrix& stiffness,
                                          const TimeMesh& tm,
                                          const std::vector<Eigen::MatrixXd>& v,
                                          bool adjoint);

/// Adds m (x) b to the first slab load.
void add_initial_term(std::vector<Eigen::MatrixXd>& f, const TimeMesh& tm,
                      const Eigen::VectorXd& initial);

/// Coefficients of the L2 projection with load b: M x = b.
Eigen::VectorXd l2_projection(const SparseMatrix& mass, const Eigen::VectorXd& b);

/// Sum over slabs of the Frobenius inner products.
double pairing(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b);

} // namespace sthp
