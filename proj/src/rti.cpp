#include "blockmpc/rti.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

namespace blockmpc {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

}  // namespace

Multipliers Multipliers::zero(const StageData& sd) {
  Multipliers mu;
  for (int k = 0; k <= sd.N(); ++k) mu.rows.push_back(Vector::Zero(sd.rows(k)));
  mu.lower.assign(static_cast<std::size_t>(sd.M()), Vector::Zero(sd.nu));
  mu.upper.assign(static_cast<std::size_t>(sd.M()), Vector::Zero(sd.nu));
  return mu;
}

Multipliers map_multipliers(const StageData& sd, const CondensedQp& qp, const QpSolution& sol) {
  Multipliers mu = Multipliers::zero(sd);
  if (sol.lambda_rows.size() == static_cast<Eigen::Index>(qp.row_map.size())) {
    for (std::size_t r = 0; r < qp.row_map.size(); ++r) {
      const RowRef& ref = qp.row_map[r];
      mu.rows[static_cast<std::size_t>(ref.node)][ref.row] = sol.lambda_rows[static_cast<Eigen::Index>(r)];
    }
  }
  const int nu = sd.nu;
  if (sol.lambda_lower.size() == sd.M() * nu) {
    for (int j = 0; j < sd.M(); ++j) {
      mu.lower[static_cast<std::size_t>(j)] = sol.lambda_lower.segment(j * nu, nu);
      mu.upper[static_cast<std::size_t>(j)] = sol.lambda_upper.segment(j * nu, nu);
    }
  }
  return mu;
}

KktReport kkt_residual(const StageData& sd, const BlockStructure& bs, const std::vector<Vector>& dx,
                       const Vector& du, const Multipliers& mu) {
  const int N = sd.N();
  const int nx = sd.nx;
  const int nu = sd.nu;
  if (static_cast<int>(dx.size()) != N + 1 || du.size() != bs.M() * nu) {
    throw std::invalid_argument("kkt_residual: increment sizes do not match the stage data");
  }
  auto du_of = [&](int k) { return du.segment(bs.block_of(k) * nu, nu); };

  KktReport rep;

  // Equality residuals of the linearized dynamics and the initial-value embedding.
  rep.eq_residual = (dx[0] - sd.dx0).lpNorm<Eigen::Infinity>();
  for (int k = 0; k < N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vector res = sd.A[kk] * dx[kk] + sd.B[kk] * du_of(k) + sd.d[kk] - dx[kk + 1];
    rep.eq_residual = std::max(rep.eq_residual, res.lpNorm<Eigen::Infinity>());
  }

  // Inequality violations.
  for (int k = 0; k <= N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    if (sd.rows(k) == 0) continue;
    Vector val = sd.c[kk] + sd.C[kk].leftCols(nx) * dx[kk];
    if (k < N) val.noalias() += sd.C[kk].rightCols(nu) * du_of(k);
    rep.ineq_violation = std::max(rep.ineq_violation, std::max(0.0, val.maxCoeff()));
  }
  for (int j = 0; j < bs.M(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    const auto u = du.segment(j * nu, nu);
    rep.ineq_violation = std::max(rep.ineq_violation, std::max(0.0, (u - sd.du_hi[jj]).maxCoeff()));
    rep.ineq_violation = std::max(rep.ineq_violation, std::max(0.0, (sd.du_lo[jj] - u).maxCoeff()));
  }

  // Costates lambda_{k+1} by backward recursion; input stationarity per block.
  Vector stat = Vector::Zero(bs.M() * nu);
  Vector lam = sd.q[static_cast<std::size_t>(N)] + sd.Q[static_cast<std::size_t>(N)] * dx[static_cast<std::size_t>(N)];
  if (sd.rows(N) > 0) lam.noalias() += sd.C[static_cast<std::size_t>(N)].transpose() * mu.rows[static_cast<std::size_t>(N)];
  for (int k = N - 1; k >= 0; --k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto uk = du_of(k);
    auto sj = stat.segment(bs.block_of(k) * nu, nu);
    sj += sd.r[kk];
    sj.noalias() += sd.R[kk] * uk;
    sj.noalias() += sd.S[kk].transpose() * dx[kk];
    sj.noalias() += sd.B[kk].transpose() * lam;
    if (sd.rows(k) > 0) sj.noalias() += sd.C[kk].rightCols(nu).transpose() * mu.rows[kk];
    if (k > 0) {
      Vector next = sd.q[kk] + sd.Q[kk] * dx[kk];
      next.noalias() += sd.S[kk] * uk;
      next.noalias() += sd.A[kk].transpose() * lam;
      if (sd.rows(k) > 0) next.noalias() += sd.C[kk].leftCols(nx).transpose() * mu.rows[kk];
      lam = std::move(next);
    }
  }
  for (int j = 0; j < bs.M(); ++j) {
    const auto jj = static_cast<std::size_t>(j);
    stat.segment(j * nu, nu) += mu.upper[jj] - mu.lower[jj];
  }
  rep.stationarity = stat.lpNorm<Eigen::Infinity>();
  rep.total = rep.stationarity + rep.eq_residual + rep.ineq_violation;
  return rep;
}

RtiController::RtiController(ShootingProblem problem, BlockStructure bs, RtiOptions options)
    : problem_(std::move(problem)), bs_(std::move(bs)), options_(options) {
  problem_.validate();
  if (bs_.N() != problem_.N()) throw std::invalid_argument("RtiController: block structure horizon mismatch");
}

void RtiController::initialize(const Vector& x0, const std::vector<Vector>& us) {
  state_ = RtiState{};
  state_.traj = forward_simulate(problem_, bs_, x0, us);
  state_.resimulate = false;
}

void RtiController::set_trajectory(Trajectory traj) {
  traj.validate(bs_, problem_.nx(), problem_.nu());
  state_.traj = std::move(traj);
  state_.resimulate = false;
}

Preparation RtiController::prepare(const Vector& x0) {
  if (state_.traj.xs.empty()) throw std::logic_error("RtiController: prepare called before initialize");
  Preparation prep;
  prep.x0 = x0;

  const auto t0 = Clock::now();
  if (state_.resimulate && options_.state_init == StateInit::Resimulate) {
    state_.traj = forward_simulate(problem_, bs_, x0, state_.traj.us);
  }
  state_.resimulate = false;
  prep.sd = evaluate(problem_, bs_, state_.traj, x0);
  prep.timings.shooting_ms = ms_since(t0);

  const auto t1 = Clock::now();
  prep.condensed = condense(prep.sd, bs_);
  prep.timings.condensing_ms = ms_since(t1);
  prep.timings.total_ms = ms_since(t0);
  return prep;
}

FeedbackResult RtiController::feedback(Preparation&& prep) {
  const auto t0 = Clock::now();
  FeedbackResult fb;
  fb.qp = solve_qp(prep.condensed.qp, &state_.ws, options_.qp);
  fb.du = fb.qp.z;
  fb.dx = expand(prep.condensed.chain, prep.sd.dx0, fb.du);

  // Full Newton step, no globalization.
  Trajectory& traj = state_.traj;
  for (std::size_t k = 0; k < traj.xs.size(); ++k) traj.xs[k] += fb.dx[k];
  const int nu = problem_.nu();
  for (int j = 0; j < bs_.M(); ++j) traj.us[static_cast<std::size_t>(j)] += fb.du.segment(j * nu, nu);
  fb.u = traj.us.front();
  state_.ws = fb.qp.ws;

  PhaseTimings t = prep.timings;
  t.qp_ms = ms_since(t0);
  t.total_ms = prep.timings.total_ms + t.qp_ms;
  state_.timings = t;

  fb.multipliers = map_multipliers(prep.sd, prep.condensed.qp, fb.qp);
  if (options_.compute_kkt) {
    // Re-linearize at the new iterate; the QP multipliers are kept.
    const StageData at_new = evaluate(problem_, bs_, traj, prep.x0);
    std::vector<Vector> zero_dx(traj.xs.size(), Vector::Zero(problem_.nx()));
    fb.kkt = kkt_residual(at_new, bs_, zero_dx, Vector::Zero(bs_.M() * nu), fb.multipliers);
    state_.last_kkt = fb.kkt;
  }
  return fb;
}

void RtiController::advance() {
  if (options_.shift && bs_.is_unit() && bs_.N() >= 2) {
    auto& us = state_.traj.us;
    std::rotate(us.begin(), us.begin() + 1, us.end());
    us.back() = us[us.size() - 2];
    auto& xs = state_.traj.xs;
    std::rotate(xs.begin(), xs.begin() + 1, xs.end());
    xs.back() = xs[xs.size() - 2];
  }
  state_.resimulate = true;
}

}  // namespace blockmpc
