#include "blockmpc/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace blockmpc {

void DenseQp::validate() const {
  const int nv = n();
  if (H.rows() != nv || H.cols() != nv) throw std::invalid_argument("DenseQp: H must be n x n");
  if (C.rows() != m() || (m() > 0 && C.cols() != nv)) throw std::invalid_argument("DenseQp: C must be m x n");
  if (lb.size() != nv || ub.size() != nv) throw std::invalid_argument("DenseQp: bounds must have n entries");
  if (!(lb.array() <= ub.array()).all()) throw std::invalid_argument("DenseQp: lb must be <= ub");
}

bool WorkingSet::contains(const ConstraintId& id) const {
  return std::find(active.begin(), active.end(), id) != active.end();
}

const char* to_string(QpStatus s) {
  switch (s) {
    case QpStatus::Solved:
      return "solved";
    case QpStatus::MaxIterations:
      return "max-iterations";
    case QpStatus::Infeasible:
      return "infeasible";
  }
  return "unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class ActiveSetCore {
 public:
  ActiveSetCore(const DenseQp& qp, const QpOptions& opt) : qp_(qp), opt_(opt), llt_(qp.H) {
    if (llt_.info() != Eigen::Success) throw std::invalid_argument("solve_qp: H is not positive definite");
    row_norm_.resize(qp.m());
    for (int r = 0; r < qp.m(); ++r) row_norm_[r] = qp.C.row(r).norm();
  }

  int n() const { return qp_.n(); }
  int m() const { return qp_.m(); }

  bool usable(const ConstraintId& id) const {
    switch (id.kind) {
      case ConstraintKind::Row:
        return id.index >= 0 && id.index < m();
      case ConstraintKind::Lower:
        return id.index >= 0 && id.index < n() && std::isfinite(qp_.lb[id.index]);
      case ConstraintKind::Upper:
        return id.index >= 0 && id.index < n() && std::isfinite(qp_.ub[id.index]);
    }
    return false;
  }

  // Constraint value a'z + b; feasible when <= 0.
  double value(const ConstraintId& id, const Vector& z) const {
    switch (id.kind) {
      case ConstraintKind::Row:
        return qp_.C.row(id.index).dot(z) + qp_.c[id.index];
      case ConstraintKind::Lower:
        return qp_.lb[id.index] - z[id.index];
      case ConstraintKind::Upper:
        return z[id.index] - qp_.ub[id.index];
    }
    return 0.0;
  }

  double offset(const ConstraintId& id) const {
    switch (id.kind) {
      case ConstraintKind::Row:
        return qp_.c[id.index];
      case ConstraintKind::Lower:
        return qp_.lb[id.index];
      case ConstraintKind::Upper:
        return -qp_.ub[id.index];
    }
    return 0.0;
  }

  double normal_dot(const ConstraintId& id, const Vector& p) const {
    switch (id.kind) {
      case ConstraintKind::Row:
        return qp_.C.row(id.index).dot(p);
      case ConstraintKind::Lower:
        return -p[id.index];
      case ConstraintKind::Upper:
        return p[id.index];
    }
    return 0.0;
  }

  double normal_norm(const ConstraintId& id) const {
    return id.kind == ConstraintKind::Row ? row_norm_[id.index] : 1.0;
  }

  Vector normal(const ConstraintId& id) const {
    if (id.kind == ConstraintKind::Row) return qp_.C.row(id.index).transpose();
    Vector a = Vector::Zero(n());
    a[id.index] = id.kind == ConstraintKind::Lower ? -1.0 : 1.0;
    return a;
  }

  Matrix normals(const std::vector<ConstraintId>& W) const {
    Matrix A(static_cast<Eigen::Index>(W.size()), n());
    for (std::size_t i = 0; i < W.size(); ++i) A.row(static_cast<Eigen::Index>(i)) = normal(W[i]).transpose();
    return A;
  }

  double max_violation(const Vector& z) const {
    double v = 0.0;
    for (int r = 0; r < m(); ++r) v = std::max(v, value({ConstraintKind::Row, r}, z));
    for (int i = 0; i < n(); ++i) {
      if (std::isfinite(qp_.lb[i])) v = std::max(v, qp_.lb[i] - z[i]);
      if (std::isfinite(qp_.ub[i])) v = std::max(v, z[i] - qp_.ub[i]);
    }
    return v;
  }

  double objective(const Vector& z) const { return 0.5 * z.dot(qp_.H * z) + qp_.g.dot(z); }

  Vector unconstrained_minimizer() const { return -llt_.solve(qp_.g); }

  // Keeps the ids of W whose normals are linearly independent, in order.
  std::vector<ConstraintId> independent_subset(const std::vector<ConstraintId>& W) const {
    std::vector<ConstraintId> kept;
    std::vector<Vector> basis;
    const auto L = llt_.matrixL();
    for (const auto& id : W) {
      if (!usable(id) || std::find(kept.begin(), kept.end(), id) != kept.end()) continue;
      if (kept.size() >= static_cast<std::size_t>(n())) break;
      Vector v = L.solve(normal(id));
      const double norm0 = v.norm();
      if (norm0 == 0.0) continue;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& b : basis) v -= b.dot(v) * b;
      }
      const double norm1 = v.norm();
      if (norm1 <= 1e-9 * norm0) continue;
      basis.push_back(v / norm1);
      kept.push_back(id);
    }
    return kept;
  }

  // Minimizer of the objective with the constraints of W as equalities.
  // Returns false when the working set is numerically dependent.
  bool equality_minimizer(const std::vector<ConstraintId>& W, Vector& z) const {
    const Vector h = llt_.solve(qp_.g);
    if (W.empty()) {
      z = -h;
      return true;
    }
    const Matrix A = normals(W);
    const Matrix Y = llt_.solve(A.transpose());
    const Matrix S = A * Y;
    Eigen::LDLT<Matrix> ldlt(S);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) return false;
    Vector b(static_cast<Eigen::Index>(W.size()));
    for (std::size_t i = 0; i < W.size(); ++i) b[static_cast<Eigen::Index>(i)] = offset(W[i]);
    const Vector lambda = ldlt.solve(b - A * h);
    z = -h - Y * lambda;
    return true;
  }

  struct Outcome {
    Vector z;
    Vector lambda;  // aligned with W
    std::vector<ConstraintId> W;
    int iterations = 0;
    bool converged = false;
    bool infeasible = false;
  };

  // Dual active-set method started from the unconstrained minimizer. Every
  // iterate is optimal for the constraints in W; the most violated remaining
  // constraint is added next, dropping members whose multiplier would turn
  // negative. No feasible start is needed, and an unbounded dual step proves
  // infeasibility.
  Outcome dual(int budget, double feas_tol) const {
    const int nv = n();
    Outcome out;
    Vector z = unconstrained_minimizer();
    std::vector<ConstraintId> W;
    Vector u(0);

    auto most_violated = [&](ConstraintId& best) {
      double worst = feas_tol;
      bool found = false;
      auto check = [&](const ConstraintId& id) {
        if (std::find(W.begin(), W.end(), id) != W.end()) return;
        const double v = value(id, z) / normal_norm(id);
        if (v > worst) {
          worst = v;
          best = id;
          found = true;
        }
      };
      for (int r = 0; r < m(); ++r) {
        if (row_norm_[r] > 0.0) check({ConstraintKind::Row, r});
      }
      for (int i = 0; i < nv; ++i) {
        if (std::isfinite(qp_.lb[i])) check({ConstraintKind::Lower, i});
        if (std::isfinite(qp_.ub[i])) check({ConstraintKind::Upper, i});
      }
      return found;
    };

    ConstraintId add{};
    while (most_violated(add)) {
      const Vector np = normal(add);
      double up = 0.0;  // multiplier of the constraint being added
      for (;;) {
        if (out.iterations >= budget) {
          out.z = std::move(z);
          out.W = std::move(W);
          out.lambda = std::move(u);
          return out;
        }
        ++out.iterations;
        // Primal direction d keeps W active; r is the rate at which the
        // multipliers of W decrease per unit of up.
        const Vector Hn = llt_.solve(np);
        Vector d = Hn;
        Vector r(static_cast<Eigen::Index>(W.size()));
        if (!W.empty()) {
          const Matrix A = normals(W);
          const Matrix Y = llt_.solve(A.transpose());
          Eigen::LDLT<Matrix> ldlt(A * Y);
          r = ldlt.solve(A * Hn);
          d.noalias() -= Y * r;
        }
        const double curvature = np.dot(d);
        const double viol = value(add, z);

        double t1 = kInf;
        int drop = -1;
        for (Eigen::Index i = 0; i < r.size(); ++i) {
          if (r[i] > 1e-12 * (1.0 + r.lpNorm<Eigen::Infinity>())) {
            const double ti = u[i] / r[i];
            if (ti < t1 || (ti == t1 && W[static_cast<std::size_t>(i)] < W[static_cast<std::size_t>(drop)])) {
              t1 = ti;
              drop = static_cast<int>(i);
            }
          }
        }
        const bool dependent = d.norm() <= 1e-10 * Hn.norm() || curvature <= 0.0;
        const double t2 = dependent ? kInf : viol / curvature;

        if (drop < 0 && dependent) {
          out.infeasible = true;
          out.z = std::move(z);
          out.W = std::move(W);
          out.lambda = std::move(u);
          return out;
        }
        const double t = std::min(t1, t2);
        if (!dependent) z -= t * d;
        if (r.size() > 0) u -= t * r;
        up += t;
        if (t2 <= t1) {
          W.push_back(add);
          u.conservativeResize(u.size() + 1);
          u[u.size() - 1] = up;
          break;
        }
        W.erase(W.begin() + drop);
        Vector shrunk(u.size() - 1);
        for (Eigen::Index i = 0, k = 0; i < u.size(); ++i) {
          if (i != drop) shrunk[k++] = u[i];
        }
        u = std::move(shrunk);
      }
    }
    out.converged = true;
    out.z = std::move(z);
    out.W = std::move(W);
    out.lambda = std::move(u);
    return out;
  }

  // Primal active-set iterations from a feasible z.
  Outcome run(Vector z, std::vector<ConstraintId> W, int budget, std::vector<double>* trace) const {
    const int nv = n();
    const int nm = m();
    std::vector<char> in_rows(static_cast<std::size_t>(nm), 0);
    std::vector<char> in_bounds(static_cast<std::size_t>(2 * nv), 0);
    auto flag = [&](const ConstraintId& id) -> char& {
      if (id.kind == ConstraintKind::Row) return in_rows[static_cast<std::size_t>(id.index)];
      return in_bounds[static_cast<std::size_t>(2 * id.index + (id.kind == ConstraintKind::Upper ? 1 : 0))];
    };
    for (const auto& id : W) flag(id) = 1;

    Outcome out;
    Vector lambda;
    // After an unblocked full step z is the minimizer on the current working
    // set by construction; recomputing the step there only produces round-off.
    bool stationary = false;
    while (out.iterations < budget) {
      ++out.iterations;

      const Vector grad = qp_.H * z + qp_.g;
      const Vector h = llt_.solve(grad);
      Vector p;
      if (W.empty()) {
        p = -h;
        lambda.resize(0);
      } else {
        const Matrix A = normals(W);
        const Matrix Y = llt_.solve(A.transpose());
        Eigen::LDLT<Matrix> ldlt(A * Y);
        lambda = -ldlt.solve(A * h);
        p = -h - Y * lambda;
      }

      const double step_tol = 1e-3 * opt_.tol * (1.0 + z.lpNorm<Eigen::Infinity>());
      if (stationary || p.lpNorm<Eigen::Infinity>() <= step_tol) {
        stationary = true;
        int worst = -1;
        double worst_val = -opt_.tol;
        for (std::size_t i = 0; i < W.size(); ++i) {
          const double li = lambda[static_cast<Eigen::Index>(i)];
          if (li < worst_val ||
              (worst >= 0 && li == worst_val && W[i] < W[static_cast<std::size_t>(worst)])) {
            worst = static_cast<int>(i);
            worst_val = li;
          }
        }
        if (worst < 0) {
          out.converged = true;
          break;
        }
        flag(W[static_cast<std::size_t>(worst)]) = 0;
        W.erase(W.begin() + worst);
        stationary = false;
      } else {
        const double pnorm = p.lpNorm<Eigen::Infinity>();
        double alpha = 1.0;
        ConstraintId blocking{};
        bool blocked = false;
        auto consider = [&](const ConstraintId& id) {
          if (flag(id)) return;
          const double ap = normal_dot(id, p);
          if (ap <= 1e-11 * pnorm * normal_norm(id)) return;
          const double step = std::max(0.0, -value(id, z)) / ap;
          if (step < alpha) {
            alpha = step;
            blocking = id;
            blocked = true;
          }
        };
        for (int r = 0; r < nm; ++r) consider({ConstraintKind::Row, r});
        for (int i = 0; i < nv; ++i) {
          if (std::isfinite(qp_.lb[i])) consider({ConstraintKind::Lower, i});
          if (std::isfinite(qp_.ub[i])) consider({ConstraintKind::Upper, i});
        }
        z += alpha * p;
        if (blocked) {
          W.push_back(blocking);
          flag(blocking) = 1;
        } else {
          stationary = true;
        }
      }
      if (trace) trace->push_back(objective(z));
    }

    out.z = std::move(z);
    out.lambda = std::move(lambda);
    out.W = std::move(W);
    return out;
  }

  const DenseQp& qp() const { return qp_; }
  const QpOptions& options() const { return opt_; }

 private:
  const DenseQp& qp_;
  const QpOptions& opt_;
  Eigen::LLT<Matrix> llt_;
  Vector row_norm_;
};

Vector clamp(const Vector& z, const Vector& lb, const Vector& ub) { return z.cwiseMax(lb).cwiseMin(ub); }

std::vector<ConstraintId> clamped_bounds(const Vector& raw, const Vector& lb, const Vector& ub) {
  std::vector<ConstraintId> W;
  for (Eigen::Index i = 0; i < raw.size(); ++i) {
    if (raw[i] < lb[i]) W.push_back({ConstraintKind::Lower, static_cast<int>(i)});
    if (raw[i] > ub[i]) W.push_back({ConstraintKind::Upper, static_cast<int>(i)});
  }
  return W;
}

QpSolution finish(const ActiveSetCore& core, ActiveSetCore::Outcome&& run, QpStatus status, int iterations) {
  const DenseQp& qp = core.qp();
  QpSolution sol;
  sol.lambda_rows = Vector::Zero(qp.m());
  sol.lambda_lower = Vector::Zero(qp.n());
  sol.lambda_upper = Vector::Zero(qp.n());
  if (run.lambda.size() == static_cast<Eigen::Index>(run.W.size())) {
    for (std::size_t i = 0; i < run.W.size(); ++i) {
      const double li = run.lambda[static_cast<Eigen::Index>(i)];
      const ConstraintId& id = run.W[i];
      switch (id.kind) {
        case ConstraintKind::Row:
          sol.lambda_rows[id.index] = li;
          break;
        case ConstraintKind::Lower:
          sol.lambda_lower[id.index] = li;
          break;
        case ConstraintKind::Upper:
          sol.lambda_upper[id.index] = li;
          break;
      }
    }
  }
  sol.objective = core.objective(run.z);
  sol.z = std::move(run.z);
  sol.ws.active = std::move(run.W);
  sol.iterations = iterations;
  sol.status = status;
  return sol;
}

}  // namespace

QpSolution solve_qp(const DenseQp& qp, const WorkingSet* warm, const QpOptions& options) {
  qp.validate();
  const int n = qp.n();
  const int m = qp.m();
  const int max_iter = options.max_iter > 0 ? options.max_iter : 100 * (n + m);
  ActiveSetCore core(qp, options);
  const double feas_tol = options.tol * (1.0 + (m > 0 ? qp.c.lpNorm<Eigen::Infinity>() : 0.0));
  std::vector<double> trace;
  std::vector<double>* trace_ptr = options.trace ? &trace : nullptr;

  auto complete = [&](ActiveSetCore::Outcome&& run, int used) {
    const QpStatus status = run.converged ? QpStatus::Solved : QpStatus::MaxIterations;
    QpSolution sol = finish(core, std::move(run), status, used);
    sol.objective_trace = std::move(trace);
    return sol;
  };

  if (warm && !warm->active.empty()) {
    std::vector<ConstraintId> W = core.independent_subset(warm->active);
    Vector z;
    if (core.equality_minimizer(W, z) && core.max_violation(z) <= feas_tol) {
      auto run = core.run(std::move(z), std::move(W), max_iter, trace_ptr);
      const int used = run.iterations;
      return complete(std::move(run), used);
    }
  }

  const Vector unconstrained = core.unconstrained_minimizer();
  Vector z0 = clamp(unconstrained, qp.lb, qp.ub);
  if (core.max_violation(z0) <= feas_tol) {
    auto run = core.run(std::move(z0), clamped_bounds(unconstrained, qp.lb, qp.ub), max_iter, trace_ptr);
    const int used = run.iterations;
    return complete(std::move(run), used);
  }

  auto run = core.dual(max_iter, feas_tol);
  const int used = run.iterations;
  if (run.infeasible) {
    QpSolution sol = finish(core, std::move(run), QpStatus::Infeasible, used);
    return sol;
  }
  return complete(std::move(run), used);
}

QpKktError qp_kkt_error(const DenseQp& qp, const QpSolution& sol) {
  QpKktError e;
  Vector grad = qp.H * sol.z + qp.g - sol.lambda_lower + sol.lambda_upper;
  if (qp.m() > 0) grad += qp.C.transpose() * sol.lambda_rows;
  e.stationarity = grad.lpNorm<Eigen::Infinity>();

  auto absorb = [&](double value, double lambda) {
    e.primal = std::max(e.primal, value);
    e.complementarity = std::max(e.complementarity, std::abs(lambda * value));
    e.dual_sign = std::max(e.dual_sign, -lambda);
  };
  for (int r = 0; r < qp.m(); ++r) absorb(qp.C.row(r).dot(sol.z) + qp.c[r], sol.lambda_rows[r]);
  for (int i = 0; i < qp.n(); ++i) {
    if (std::isfinite(qp.lb[i])) absorb(qp.lb[i] - sol.z[i], sol.lambda_lower[i]);
    if (std::isfinite(qp.ub[i])) absorb(sol.z[i] - qp.ub[i], sol.lambda_upper[i]);
  }
  return e;
}

}  // namespace blockmpc
