#include "sthp/solver.hpp"

#include <cmath>
#include <mutex>

#include <Eigen/SparseCholesky>
#include <sstream>

namespace sthp {

GmresResult gmres(const LinearOperator& a, const LinearOperator* precondition,
                  const Eigen::VectorXd& b, Eigen::VectorXd& x, const GmresConfig& cfg,
                  bool flexible) {
  GmresResult res;
  const auto n = b.size();
  if (x.size() != n)
    x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    x.setZero();
    res.converged = true;
    return res;
  }
  const double target = cfg.tolerance * bnorm;
  const int m = std::max(1, cfg.restart);

  Eigen::VectorXd r(n), w(n), tmp(n);
  a(x, tmp);
  r = b - tmp;
  double beta = r.norm();
  std::vector<Eigen::VectorXd> v, z;
  Eigen::MatrixXd h(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g(m + 1);

  while (beta > target && res.iterations < cfg.max_iterations) {
    v.assign(1, r / beta);
    z.clear();
    h.setZero();
    g.setZero();
    g(0) = beta;
    int j = 0;
    for (; j < m && res.iterations < cfg.max_iterations; ++j) {
      if (precondition) {
        Eigen::VectorXd zj(n);
        (*precondition)(v[j], zj);
        a(zj, w);
        if (flexible)
          z.push_back(std::move(zj));
      } else {
        a(v[j], w);
      }
      for (int i = 0; i <= j; ++i) {
        h(i, j) = v[i].dot(w);
        w -= h(i, j) * v[i];
      }
      // one reorthogonalization pass keeps the basis clean at tight tolerances
      for (int i = 0; i <= j; ++i) {
        const double c = v[i].dot(w);
        h(i, j) += c;
        w -= c * v[i];
      }
      h(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const double t = cs(i) * h(i, j) + sn(i) * h(i + 1, j);
        h(i + 1, j) = -sn(i) * h(i, j) + cs(i) * h(i + 1, j);
        h(i, j) = t;
      }
      const double d = std::hypot(h(j, j), h(j + 1, j));
      cs(j) = d == 0.0 ? 1.0 : h(j, j) / d;
      sn(j) = d == 0.0 ? 0.0 : h(j + 1, j) / d;
      const double hj1 = h(j + 1, j);
      h(j, j) = d;
      h(j + 1, j) = 0.0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = cs(j) * g(j);
      ++res.iterations;
      if (hj1 == 0.0 || std::abs(g(j + 1)) <= target) {
        ++j;
        break;
      }
      v.push_back(w / hj1);
    }
    const Eigen::VectorXd y =
        h.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    if (precondition && flexible) {
      for (int i = 0; i < j; ++i)
        x += y(i) * z[i];
    } else {
      Eigen::VectorXd s = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < j; ++i)
        s += y(i) * v[i];
      if (precondition) {
        (*precondition)(s, tmp);
        x += tmp;
      } else {
        x += s;
      }
    }
    a(x, tmp);
    r = b - tmp;
    const double previous = beta;
    beta = r.norm();
    if (beta > target && beta >= previous * (1.0 - 1e-14) && j < m)
      break; // stagnation: the Krylov space is exhausted
  }
  res.relative_residual = beta / bnorm;
  res.converged = beta <= target;
  return res;
}

Ilu0::Ilu0(const SparseMatrix& a) : lu_(a) {
  lu_.makeCompressed();
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  double* val = lu_.valuePtr();
  diag_.assign(n, -1);
  std::vector<int> pos(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int p = outer[i]; p < outer[i + 1]; ++p)
      pos[inner[p]] = p;
    for (int p = outer[i]; p < outer[i + 1] && inner[p] < i; ++p) {
      const int k = inner[p];
      val[p] /= val[diag_[k]];
      const double lik = val[p];
      for (int q = diag_[k] + 1; q < outer[k + 1]; ++q) {
        const int jpos = pos[inner[q]];
        if (jpos >= 0)
          val[jpos] -= lik * val[q];
      }
    }
    for (int p = outer[i]; p < outer[i + 1]; ++p) {
      if (inner[p] == i)
        diag_[i] = p;
      pos[inner[p]] = -1;
    }
    if (diag_[i] < 0 || val[diag_[i]] == 0.0)
      throw SolverError("ILU(0): zero pivot in row " + std::to_string(i));
  }
}

void Ilu0::solve(const Eigen::VectorXd& b, Eigen::VectorXd& x) const {
  const int n = static_cast<int>(lu_.rows());
  const int* outer = lu_.outerIndexPtr();
  const int* inner = lu_.innerIndexPtr();
  const double* val = lu_.valuePtr();
  x = b;
  for (int i = 0; i < n; ++i) {
    double s = x(i);
    for (int p = outer[i]; p < diag_[i]; ++p)
      s -= val[p] * x(inner[p]);
    x(i) = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = x(i);
    for (int p = diag_[i] + 1; p < outer[i + 1]; ++p)
      s -= val[p] * x(inner[p]);
    x(i) = s / val[diag_[i]];
  }
}

SlabSystem::SlabSystem(const SparseMatrix& mass, const SparseMatrix& stiffness, int k,
                       double tau, bool adjoint)
    : mass_(mass), stiffness_(stiffness), tm_(temporal_matrices(k)), k_(k), tau_(tau),
      adjoint_(adjoint) {}

Eigen::MatrixXd SlabSystem::apply(const Eigen::MatrixXd& x) const {
  const Eigen::MatrixXd ax = stiffness_ * x;
  const Eigen::MatrixXd mx = mass_ * x;
  if (adjoint_)
    return 0.5 * tau_ * ax * tm_.M + mx * tm_.A;
  return 0.5 * tau_ * ax * tm_.M.transpose() + mx * tm_.A.transpose();
}

PreconditionerFactors build_preconditioner_factors(int k, bool adjoint) {
  const auto& tm = temporal_matrices(k);
  PreconditionerFactors f;
  f.k = k;
  f.adjoint = adjoint;
  const int n = k + 1;
  f.m_inv = tm.M.inverse();
  f.g = f.m_inv * (adjoint ? Eigen::MatrixXd(tm.A.transpose()) : tm.A);

  // Crout: G = L U with unit diagonal U
  f.l = Eigen::MatrixXd::Zero(n, n);
  f.u = Eigen::MatrixXd::Identity(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = j; i < n; ++i)
      f.l(i, j) = f.g(i, j) - f.l.row(i).head(j).dot(f.u.col(j).head(j));
    if (f.l(j, j) == 0.0)
      return f;
    for (int i = j + 1; i < n; ++i)
      f.u(j, i) = (f.g(j, i) - f.l.row(j).head(j).dot(f.u.col(i).head(j))) / f.l(j, j);
  }
  f.lu_residual = (f.l * f.u - f.g).cwiseAbs().maxCoeff() / f.g.cwiseAbs().maxCoeff();

  // L is lower triangular: eigenvalues are its diagonal, eigenvectors by
  // forward substitution.
  f.lambda = f.l.diagonal();
  f.s = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    f.s(j, j) = 1.0;
    for (int i = j + 1; i < n; ++i) {
      const double d = f.l(i, i) - f.lambda(j);
      if (std::abs(d) < 1e-12 * std::max(1.0, std::abs(f.lambda(j))))
        return f;
      double s = 0.0;
      for (int q = j; q < i; ++q)
        s += f.l(i, q) * f.s(q, j);
      f.s(i, j) = -s / d;
    }
    f.s.col(j).normalize();
  }
  f.s_inv = f.s.inverse();
  f.eigen_residual = (f.s * f.lambda.asDiagonal() * f.s_inv - f.l).cwiseAbs().maxCoeff() /
                     f.l.cwiseAbs().maxCoeff();
  f.ok = std::isfinite(f.eigen_residual);
  return f;
}

const PreconditionerFactors& preconditioner_factors(int k, bool adjoint) {
  static std::mutex mutex;
  static std::map<std::pair<int, bool>, std::unique_ptr<PreconditionerFactors>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{k, adjoint}];
  if (!slot)
    slot = std::make_unique<PreconditionerFactors>(build_preconditioner_factors(k, adjoint));
  return *slot;
}

double work_metric(const std::vector<IterationRecord>& log) {
  double w = 0.0;
  for (const auto& r : log)
    w += (r.k + 1.0) * r.n_space * r.outer;
  return w;
}

SpaceTimeSolver::SpaceTimeSolver(const SparseMatrix& mass, const SparseMatrix& stiffness,
                                 SolverConfig cfg)
    : mass_(mass), stiffness_(stiffness), stiffness_t_(stiffness.transpose()),
      cfg_(cfg) {}

const SpaceTimeSolver::BlockSolver& SpaceTimeSolver::block(int k, double tau, bool adjoint,
                                                           int l) {
  if (k != cached_k_ || tau != cached_tau_ || adjoint != cached_adjoint_) {
    blocks_.clear();
    blocks_.resize(k + 1);
    cached_k_ = k;
    cached_tau_ = tau;
    cached_adjoint_ = adjoint;
  }
  auto& slot = blocks_[l];
  if (!slot) {
    const double lambda = preconditioner_factors(k, adjoint).lambda(l);
    slot = std::make_unique<BlockSolver>();
    slot->matrix = 0.5 * tau * (adjoint ? stiffness_t_ : stiffness_) + lambda * mass_;
    slot->ilu = Ilu0(slot->matrix);
  }
  return *slot;
}

Eigen::MatrixXd SpaceTimeSolver::apply_preconditioner(int k, double tau, bool adjoint,
                                                      const Eigen::MatrixXd& v, int* inner) {
  const auto& f = preconditioner_factors(k, adjoint);
  const Eigen::MatrixXd w = v * f.m_inv.transpose() * f.s_inv.transpose();
  Eigen::MatrixXd z(w.rows(), w.cols());
  for (int l = 0; l <= k; ++l) {
    const auto& b = block(k, tau, adjoint, l);
    const LinearOperator op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      y = b.matrix * x;
    };
    const LinearOperator pc = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      b.ilu.solve(x, y);
    };
    Eigen::VectorXd x = Eigen::VectorXd::Zero(w.rows());
    const auto r = gmres(op, &pc, w.col(l), x, cfg_.inner, false);
    if (inner)
      *inner += r.iterations;
    z.col(l) = x;
  }
  return z * f.s.transpose();
}

Eigen::MatrixXd SpaceTimeSolver::solve_slab(int k, double tau, bool adjoint,
                                            const Eigen::MatrixXd& rhs,
                                            IterationRecord* record) {
  const SlabSystem sys(mass_, adjoint ? stiffness_t_ : stiffness_, k, tau, adjoint);
  const auto rows = rhs.rows(), cols = rhs.cols();
  const LinearOperator op = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const Eigen::MatrixXd r = sys.apply(Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, cols));
    y = Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
  };
  int inner = 0;
  const LinearOperator pc = [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
    const Eigen::MatrixXd r = apply_preconditioner(
        k, tau, adjoint, Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, cols), &inner);
    y = Eigen::Map<const Eigen::VectorXd>(r.data(), r.size());
  };
  bool use_pc = cfg_.precondition;
  if (use_pc && !preconditioner_factors(k, adjoint).ok) {
    use_pc = false;
    warnings_.push_back("preconditioner factorization failed for k=" + std::to_string(k) +
                        "; using unpreconditioned GMRES");
  }
  const Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(rhs.data(), rhs.size());
  Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
  const auto res = gmres(op, use_pc ? &pc : nullptr, b, x, cfg_.outer, true);
  if (record) {
    record->k = k;
    record->adjoint = adjoint;
    record->n_space = static_cast<int>(rows);
    record->outer = res.iterations;
    record->inner = inner;
    record->residual = res.relative_residual;
  }
  if (!res.converged) {
    std::ostringstream msg;
    msg << (adjoint ? "adjoint" : "primal") << " slab solve did not converge: k=" << k
        << " tau=" << tau << " iterations=" << res.iterations
        << " relative residual=" << res.relative_residual;
    throw SolverError(msg.str());
  }
  return Eigen::Map<const Eigen::MatrixXd>(x.data(), rows, cols);
}

std::vector<Eigen::MatrixXd> SpaceTimeSolver::solve_primal(const TimeMesh& tm,
                                                           const std::vector<Eigen::MatrixXd>& f,
                                                           const Eigen::VectorXd& initial) {
  std::vector<Eigen::MatrixXd> u(tm.size());
  Eigen::VectorXd carry = initial;
  for (std::size_t n = 0; n < tm.size(); ++n) {
    const auto& s = tm[n];
    const auto& m = temporal_matrices(s.k).m;
    Eigen::MatrixXd rhs = f[n] + carry * m.transpose();
    IterationRecord rec;
    rec.slab = static_cast<int>(n);
    u[n] = solve_slab(s.k, s.tau(), false, rhs, &rec);
    log_.push_back(rec);
    carry = mass_ * u[n].col(s.k);
  }
  return u;
}

std::vector<Eigen::MatrixXd> SpaceTimeSolver::solve_adjoint(const TimeMesh& tm,
                                                            const std::vector<Eigen::MatrixXd>& j) {
  std::vector<Eigen::MatrixXd> z(tm.size());
  for (std::size_t n = tm.size(); n-- > 0;) {
    const auto& s = tm[n];
    Eigen::MatrixXd rhs = j[n];
    if (n + 1 < tm.size())
      rhs.col(s.k) += mass_ * (z[n + 1] * temporal_matrices(tm[n + 1].k).m);
    IterationRecord rec;
    rec.slab = static_cast<int>(n);
    z[n] = solve_slab(s.k, s.tau(), true, rhs, &rec);
    log_.push_back(rec);
  }
  return z;
}

std::vector<Eigen::MatrixXd> apply_global(const SparseMatrix& mass,
                                          const SparseMatrix& stiffness,
                                          const TimeMesh& tm,
                                          const std::vector<Eigen::MatrixXd>& v,
                                          bool adjoint) {
  std::vector<Eigen::MatrixXd> y(tm.size());
  const SparseMatrix at = adjoint ? SparseMatrix(stiffness.transpose()) : SparseMatrix();
  for (std::size_t n = 0; n < tm.size(); ++n) {
    const auto& s = tm[n];
    const SlabSystem sys(mass, adjoint ? at : stiffness, s.k, s.tau(), adjoint);
    y[n] = sys.apply(v[n]);
    if (!adjoint && n > 0) {
      y[n] -= (mass * v[n - 1].col(tm[n - 1].k)) * temporal_matrices(s.k).m.transpose();
    }
    if (adjoint && n + 1 < tm.size())
      y[n].col(s.k) -= mass * (v[n + 1] * temporal_matrices(tm[n + 1].k).m);
  }
  return y;
}

std::vector<Eigen::MatrixXd> primal_residual(const SparseMatrix& mass,
                                             const SparseMatrix& stiffness,
                                             const TimeMesh& tm,
                                             const std::vector<Eigen::MatrixXd>& f,
                                             const std::vector<Eigen::MatrixXd>& v) {
  auto r = apply_global(mass, stiffness, tm, v, false);
  for (std::size_t n = 0; n < r.size(); ++n)
    r[n] = f[n] - r[n];
  return r;
}

std::vector<Eigen::MatrixXd> adjoint_residual(const SparseMatrix& mass,
                                              const SparseMatrix& stiffness,
                                              const TimeMesh& tm,
                                              const std::vector<Eigen::MatrixXd>& j,
                                              const std::vector<Eigen::MatrixXd>& z) {
  auto r = apply_global(mass, stiffness, tm, z, true);
  for (std::size_t n = 0; n < r.size(); ++n)
    r[n] = j[n] - r[n];
  return r;
}

void add_initial_term(std::vector<Eigen::MatrixXd>& f, const TimeMesh& tm,
                      const Eigen::VectorXd& initial) {
  f[0] += initial * temporal_matrices(tm[0].k).m.transpose();
}

Eigen::VectorXd l2_projection(const SparseMatrix& mass, const Eigen::VectorXd& b) {
  const Eigen::SparseMatrix<double> m = mass;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(m);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("mass matrix factorization failed");
  return ldlt.solve(b);
}

double pairing(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
  double s = 0.0;
  for (std::size_t n = 0; n < a.size(); ++n)
    s += a[n].cwiseProduct(b[n]).sum();
  return s;
}

} // namespace sthp
