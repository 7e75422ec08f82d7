#pragma once

#include <vector>

#include "blockmpc/blocking.hpp"
#include "blockmpc/condensing.hpp"
#include "blockmpc/qp_solver.hpp"
#include "blockmpc/shooting.hpp"

namespace blockmpc {

/// Infinity norms of the optimality conditions of the stage-wise problem.
struct KktReport {
  double stationarity = 0.0;
  double eq_residual = 0.0;
  double ineq_violation = 0.0;
  double total = 0.0;
};

/// Inequality multipliers in stage-wise layout: `rows[k]` matches the rows
/// of C_k, `lower`/`upper` hold the input-bound multipliers per block.
struct Multipliers {
  std::vector<Vector> rows;
  std::vector<Vector> lower;
  std::vector<Vector> upper;

  static Multipliers zero(const StageData& sd);
};

/// Scatters the condensed QP multipliers back onto nodes and blocks.
Multipliers map_multipliers(const StageData& sd, const CondensedQp& qp, const QpSolution& sol);

/// KKT residual of the stage-wise QP at increments (dx, du). Costates come
/// from the backward recursion, so only the input stationarity (summed over
/// each block) remains. With dx = du = 0 this is the residual of the
/// nonlinear problem at the linearization point of `sd`.
KktReport kkt_residual(const StageData& sd, const BlockStructure& bs, const std::vector<Vector>& dx,
                       const Vector& du, const Multipliers& mu);

struct PhaseTimings {
  double shooting_ms = 0.0;
  double condensing_ms = 0.0;
  double qp_ms = 0.0;
  double total_ms = 0.0;
};

enum class StateInit {
  Resimulate,  // node states re-simulated from the new measurement at each prepare
  Keep,        // node states carried over, measurement enters through dx_0
};

struct RtiOptions {
  QpOptions qp;
  StateInit state_init = StateInit::Keep;
  bool shift = false;  // classical shift, only honoured for unit blocks
  bool compute_kkt = true;
};

struct RtiState {
  Trajectory traj;
  WorkingSet ws;
  KktReport last_kkt;
  PhaseTimings timings;
  bool resimulate = true;
};

struct Preparation {
  Vector x0;
  StageData sd;
  Condensed condensed;
  PhaseTimings timings;
};

struct FeedbackResult {
  Vector u;  // first blocked input of the updated trajectory
  Vector du;
  std::vector<Vector> dx;
  QpSolution qp;
  Multipliers multipliers;
  KktReport kkt;
};

/// Real-time iteration: one linearization and one full-step QP per sample.
class RtiController {
 public:
  RtiController(ShootingProblem problem, BlockStructure bs, RtiOptions options = {});

  /// Sets the linearization point by blocked forward simulation of `us`.
  void initialize(const Vector& x0, const std::vector<Vector>& us);
  void set_trajectory(Trajectory traj);

  /// Shooting and condensing at the current linearization point.
  Preparation prepare(const Vector& x0);

  /// Solves the condensed QP (warm-started), expands it and takes the full
  /// Newton step. The returned KKT report is evaluated at the new iterate.
  FeedbackResult feedback(Preparation&& prep);

  /// Warm start for the next sample.
  void advance();

  const RtiState& state() const { return state_; }
  const ShootingProblem& problem() const { return problem_; }
  const BlockStructure& blocks() const { return bs_; }
  const RtiOptions& options() const { return options_; }

 private:
  ShootingProblem problem_;
  BlockStructure bs_;
  RtiOptions options_;
  RtiState state_;
};

}  // namespace blockmpc
