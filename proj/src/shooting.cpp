#include "blockmpc/shooting.hpp"

#include <cmath>
#include <string>

namespace blockmpc {

ShootingProblem ShootingProblem::uniform(Dynamics dynamics, QuadraticCost cost, StageBounds bounds, double Ts, int N) {
  ShootingProblem p{std::move(dynamics), std::move(cost), std::move(bounds),
                    std::vector<IntegratorConfig>(static_cast<std::size_t>(N), IntegratorConfig{Ts, 1}), {}};
  return p;
}

void ShootingProblem::validate() const {
  ProblemDims{dynamics.nx, dynamics.nu, 0, 0}.validate();
  if (!dynamics.rhs || !dynamics.jacobian) throw std::invalid_argument("ShootingProblem: dynamics not set");
  if (intervals.empty()) throw std::invalid_argument("ShootingProblem: horizon has no intervals");
  for (const auto& iv : intervals) iv.validate();
  if (!stage_weights.empty() && stage_weights.size() != intervals.size()) {
    throw std::invalid_argument("ShootingProblem: stage_weights must have one entry per interval");
  }
  for (double w : stage_weights) {
    if (!(w > 0.0)) throw std::invalid_argument("ShootingProblem: stage weights must be > 0");
  }
  cost.validate(nx(), nu());
  bounds.validate(nx(), nu());
}

void Trajectory::validate(const BlockStructure& bs, int nx, int nu) const {
  if (static_cast<int>(xs.size()) != bs.N() + 1) throw std::invalid_argument("Trajectory: expected N+1 states");
  if (static_cast<int>(us.size()) != bs.M()) throw std::invalid_argument("Trajectory: expected M blocked inputs");
  for (const auto& x : xs) {
    if (x.size() != nx || !x.allFinite()) throw std::invalid_argument("Trajectory: bad state entry");
  }
  for (const auto& u : us) {
    if (u.size() != nu || !u.allFinite()) throw std::invalid_argument("Trajectory: bad input entry");
  }
}

int StageData::total_rows() const {
  int n = 0;
  for (const auto& ck : c) n += static_cast<int>(ck.size());
  return n;
}

Trajectory forward_simulate(const ShootingProblem& problem, const BlockStructure& bs, const Vector& x0,
                            const std::vector<Vector>& us) {
  if (bs.N() != problem.N()) throw std::invalid_argument("forward_simulate: block structure horizon mismatch");
  if (static_cast<int>(us.size()) != bs.M()) throw std::invalid_argument("forward_simulate: expected M inputs");
  Trajectory traj;
  traj.us = us;
  traj.xs.reserve(static_cast<std::size_t>(bs.N()) + 1);
  traj.xs.push_back(x0);
  for (int k = 0; k < bs.N(); ++k) {
    const auto& u = us[static_cast<std::size_t>(bs.block_of(k))];
    traj.xs.push_back(integrate_state(problem.intervals[static_cast<std::size_t>(k)], problem.dynamics,
                                      traj.xs.back(), u, k));
  }
  return traj;
}

namespace {

// Rows of the box [lo, hi] on the state, written as C x + c <= 0 in increments.
void state_bound_rows(const StageBounds& b, const Vector& x, int ncols, Matrix& C, Vector& c) {
  const auto nx = static_cast<int>(x.size());
  const int rows = b.finite_state_bounds();
  C = Matrix::Zero(rows, ncols);
  c.resize(rows);
  int r = 0;
  for (int i = 0; i < nx; ++i) {
    if (std::isfinite(b.x_lo[i])) {
      C(r, i) = -1.0;
      c[r] = b.x_lo[i] - x[i];
      ++r;
    }
    if (std::isfinite(b.x_hi[i])) {
      C(r, i) = 1.0;
      c[r] = x[i] - b.x_hi[i];
      ++r;
    }
  }
}

}  // namespace

StageData evaluate(const ShootingProblem& problem, const BlockStructure& bs, const Trajectory& traj,
                   const Vector& x0) {
  const int N = bs.N();
  const int nx = problem.nx();
  const int nu = problem.nu();
  if (N != problem.N()) throw std::invalid_argument("evaluate: block structure horizon mismatch");
  traj.validate(bs, nx, nu);

  StageData sd;
  sd.nx = nx;
  sd.nu = nu;
  const auto n = static_cast<std::size_t>(N);
  sd.A.resize(n);
  sd.B.resize(n);
  sd.d.resize(n);
  sd.S.resize(n);
  sd.R.resize(n);
  sd.r.resize(n);
  sd.Q.resize(n + 1);
  sd.q.resize(n + 1);
  sd.C.resize(n + 1);
  sd.c.resize(n + 1);

  for (int k = 0; k < N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vector& u = traj.us[static_cast<std::size_t>(bs.block_of(k))];
    StepResult step = integrate_interval(problem.intervals[kk], problem.dynamics, traj.xs[kk], u, k);
    sd.d[kk] = step.x - traj.xs[kk + 1];
    sd.A[kk] = std::move(step.A);
    sd.B[kk] = std::move(step.B);

    StageCost sc = stage_cost_terms(traj.xs[kk], u, problem.cost, k);
    const double w = problem.weight(k);
    sd.Q[kk] = w * sc.Q;
    sd.S[kk] = w * sc.S;
    sd.R[kk] = w * sc.R;
    sd.q[kk] = w * sc.q;
    sd.r[kk] = w * sc.r;

    if (k == 0) {
      // dx_0 is fixed by the initial-value embedding; state rows there are constants.
      sd.C[kk] = Matrix::Zero(0, nx + nu);
      sd.c[kk] = Vector::Zero(0);
    } else {
      state_bound_rows(problem.bounds, traj.xs[kk], nx + nu, sd.C[kk], sd.c[kk]);
    }
  }

  TerminalCost tc = terminal_cost_terms(traj.xs[n], problem.cost, N);
  sd.Q[n] = std::move(tc.Q);
  sd.q[n] = std::move(tc.q);
  state_bound_rows(problem.bounds, traj.xs[n], nx, sd.C[n], sd.c[n]);

  sd.dx0 = x0 - traj.xs.front();
  sd.du_lo.reserve(static_cast<std::size_t>(bs.M()));
  sd.du_hi.reserve(static_cast<std::size_t>(bs.M()));
  for (const auto& u : traj.us) {
    sd.du_lo.push_back(problem.bounds.u_lo - u);
    sd.du_hi.push_back(problem.bounds.u_hi - u);
  }
  return sd;
}

}  // namespace blockmpc
