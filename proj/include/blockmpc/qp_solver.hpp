#pragma once

#include <compare>
#include <vector>

#include "blockmpc/model.hpp"

namespace blockmpc {

/// Strictly convex QP
///   min 1/2 z'Hz + g'z   s.t.  C z + c <= 0,  lb <= z <= ub.
/// Infinite bounds are ignored.
struct DenseQp {
  Matrix H;
  Vector g;
  Matrix C;
  Vector c;
  Vector lb;
  Vector ub;

  int n() const { return static_cast<int>(g.size()); }
  int m() const { return static_cast<int>(c.size()); }
  void validate() const;
};

enum class ConstraintKind { Row = 0, Lower = 1, Upper = 2 };

/// A general row or one side of a simple bound. Ordering (rows first, then
/// bounds by variable, lower before upper) is the tie-breaking order.
struct ConstraintId {
  ConstraintKind kind = ConstraintKind::Row;
  int index = 0;

  friend bool operator==(const ConstraintId&, const ConstraintId&) = default;
  friend auto operator<=>(const ConstraintId& a, const ConstraintId& b) {
    const bool ra = a.kind == ConstraintKind::Row;
    const bool rb = b.kind == ConstraintKind::Row;
    if (ra != rb) return ra ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.index != b.index) return a.index <=> b.index;
    return static_cast<int>(a.kind) <=> static_cast<int>(b.kind);
  }
};

struct WorkingSet {
  std::vector<ConstraintId> active;

  bool contains(const ConstraintId& id) const;
  std::size_t size() const { return active.size(); }
};

enum class QpStatus { Solved, MaxIterations, Infeasible };

const char* to_string(QpStatus s);

struct QpOptions {
  double tol = 1e-8;
  int max_iter = 0;    // 0 selects 100 (n + m)
  bool trace = false;  // record the objective after every primal iteration
};

struct QpSolution {
  Vector z;
  Vector lambda_rows;   // one per general row, >= 0
  Vector lambda_lower;  // one per variable, >= 0
  Vector lambda_upper;
  WorkingSet ws;
  int iterations = 0;
  QpStatus status = QpStatus::Solved;
  double objective = 0.0;
  std::vector<double> objective_trace;
};

/// Primal active-set method with a fresh range-space factorization at every
/// working-set change. A warm working set is used if its equality-constrained
/// minimizer is feasible, and so is the clamped unconstrained minimizer.
/// Otherwise a dual active-set phase solves the problem from the unconstrained
/// minimizer; it also detects infeasibility.
QpSolution solve_qp(const DenseQp& qp, const WorkingSet* warm = nullptr, const QpOptions& options = {});

/// Infinity norms of the KKT conditions of `qp` at `sol`.
struct QpKktError {
  double stationarity = 0.0;
  double primal = 0.0;
  double complementarity = 0.0;
  double dual_sign = 0.0;
};

QpKktError qp_kkt_error(const DenseQp& qp, const QpSolution& sol);

}  // namespace blockmpc
