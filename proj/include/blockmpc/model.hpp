#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace blockmpc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct ProblemDims {
  int nx = 0;
  int nu = 0;
  int nc = 0;   // stage path-constraint rows
  int ncN = 0;  // terminal constraint rows

  void validate() const;
};

/// Cart-pole parameters: pendulum mass m1, cart mass m2, pole length l.
struct PendulumParams {
  double m1 = 0.1;
  double m2 = 1.0;
  double l = 0.8;
  double g = 9.81;

  void validate() const;
};

/// Continuous-time explicit ODE xdot = f(x, u) together with its Jacobians.
///
/// `jacobian` writes df/dx (nx x nx) and df/du (nx x nu) into the given
/// matrices, which are already sized by the caller.
struct Dynamics {
  int nx = 0;
  int nu = 0;
  std::function<Vector(const Vector&, const Vector&)> rhs;
  std::function<void(const Vector&, const Vector&, Matrix&, Matrix&)> jacobian;
};

struct Jacobians {
  Matrix dfdx;
  Matrix dfdu;
};

/// State is [p, theta, pdot, thetadot], input is the horizontal force on the cart.
Vector pendulum_rhs(const Vector& x, double u, const PendulumParams& params);
Jacobians pendulum_jacobians(const Vector& x, double u, const PendulumParams& params);
Dynamics make_pendulum_dynamics(const PendulumParams& params);

/// Least-squares tracking cost sum_k |x_k - xr_k|_Q^2 + |u_k - ur_k|_R^2 + |x_N - xr_N|_QN^2.
///
/// References may be empty (zero), hold a single entry (constant) or one entry
/// per node.
struct QuadraticCost {
  Matrix Q;
  Matrix R;
  Matrix QN;
  std::vector<Vector> x_ref;
  std::vector<Vector> u_ref;

  Vector state_ref(int k, int nx) const;
  Vector input_ref(int k, int nu) const;
  void validate(int nx, int nu) const;
};

/// Gradient and Gauss-Newton Hessian blocks of one stage.
struct StageCost {
  Vector q;  // state gradient
  Vector r;  // input gradient
  Matrix Q;
  Matrix S;  // nx x nu cross term
  Matrix R;
};

StageCost stage_cost_terms(const Vector& x, const Vector& u, const QuadraticCost& cost, int k);

struct TerminalCost {
  Vector q;
  Matrix Q;
};

TerminalCost terminal_cost_terms(const Vector& x, const QuadraticCost& cost, int N);

/// Box bounds; +-infinity marks an unconstrained component.
struct StageBounds {
  Vector x_lo;
  Vector x_hi;
  Vector u_lo;
  Vector u_hi;

  static StageBounds unbounded(int nx, int nu);
  void validate(int nx, int nu) const;
  int finite_state_bounds() const;
};

}  // namespace blockmpc
