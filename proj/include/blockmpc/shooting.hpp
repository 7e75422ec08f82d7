#pragma once

#include <vector>

#include "blockmpc/blocking.hpp"
#include "blockmpc/integrator.hpp"
#include "blockmpc/model.hpp"

namespace blockmpc {

/// Multiple-shooting discretization of the OCP on a (possibly nonuniform) grid.
///
/// `intervals[k]` integrates shooting interval k. `stage_weights[k]` scales the
/// stage cost of interval k (empty means all ones); the terminal cost is never
/// scaled.
struct ShootingProblem {
  Dynamics dynamics;
  QuadraticCost cost;
  StageBounds bounds;
  std::vector<IntegratorConfig> intervals;
  std::vector<double> stage_weights;

  static ShootingProblem uniform(Dynamics dynamics, QuadraticCost cost, StageBounds bounds, double Ts, int N);

  int N() const { return static_cast<int>(intervals.size()); }
  int nx() const { return dynamics.nx; }
  int nu() const { return dynamics.nu; }
  double weight(int k) const { return stage_weights.empty() ? 1.0 : stage_weights[static_cast<std::size_t>(k)]; }
  void validate() const;
};

/// Linearization point: N+1 node states and M blocked inputs.
struct Trajectory {
  std::vector<Vector> xs;
  std::vector<Vector> us;

  void validate(const BlockStructure& bs, int nx, int nu) const;
};

/// Stage-wise QP data at the current linearization point, in increments
/// (dx, du) relative to the trajectory:
///
///   min  sum_k 1/2 [dx_k; du_j]' [Q_k S_k; S_k' R_k] [dx_k; du_j] + q_k'dx_k + r_k'du_j
///        + 1/2 dx_N' Q_N dx_N + q_N'dx_N
///   s.t. dx_0 = dx0,  dx_{k+1} = A_k dx_k + B_k du_j + d_k,
///        C_k [dx_k; du_j] + c_k <= 0,  C_N dx_N + c_N <= 0,
///        du_lo_j <= du_j <= du_hi_j,
///
/// with j = block_of(k). Q, q, C, c carry N+1 entries (index N is terminal,
/// C_N has nx columns); the remaining per-interval fields carry N.
struct StageData {
  int nx = 0;
  int nu = 0;
  std::vector<Matrix> A, B;
  std::vector<Vector> d;
  std::vector<Matrix> Q, S, R;
  std::vector<Vector> q, r;
  std::vector<Matrix> C;
  std::vector<Vector> c;
  Vector dx0;
  std::vector<Vector> du_lo, du_hi;  // one entry per input block

  int N() const { return static_cast<int>(A.size()); }
  int M() const { return static_cast<int>(du_lo.size()); }
  int rows(int k) const { return static_cast<int>(c[static_cast<std::size_t>(k)].size()); }
  int total_rows() const;
};

/// Blocked forward simulation: xs_0 = x0, xs_{k+1} = phi(xs_k, us_{block_of(k)}).
Trajectory forward_simulate(const ShootingProblem& problem, const BlockStructure& bs, const Vector& x0,
                            const std::vector<Vector>& us);

/// Builds the stage-wise QP around `traj`. Every interval inside block j is
/// integrated with the same input us_j. State bounds become one row set per
/// node k >= 1; input bounds become simple bounds on each block increment.
StageData evaluate(const ShootingProblem& problem, const BlockStructure& bs, const Trajectory& traj,
                   const Vector& x0);

}  // namespace blockmpc
