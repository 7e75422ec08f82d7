#include "blockmpc/model.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace blockmpc {

namespace {

bool is_symmetric(const Matrix& m) {
  return m.rows() == m.cols() && (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + m.cwiseAbs().maxCoeff());
}

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

}  // namespace

void ProblemDims::validate() const {
  require(nx >= 1, "ProblemDims: nx must be >= 1");
  require(nu >= 1, "ProblemDims: nu must be >= 1");
  require(nc >= 0 && ncN >= 0, "ProblemDims: constraint counts must be >= 0");
}

void PendulumParams::validate() const {
  require(m1 > 0 && m2 > 0 && l > 0 && g > 0, "PendulumParams: all parameters must be strictly positive");
}

Vector pendulum_rhs(const Vector& x, double u, const PendulumParams& pp) {
  const double s = std::sin(x[1]);
  const double c = std::cos(x[1]);
  const double w = x[3];
  const double den = pp.m2 + pp.m1 - pp.m1 * c * c;

  Vector dx(4);
  dx[0] = x[2];
  dx[1] = w;
  dx[2] = (-pp.m1 * pp.l * s * w * w + pp.m1 * pp.g * c * s + u) / den;
  dx[3] = (u * c - pp.m1 * pp.l * c * s * w * w + (pp.m2 + pp.m1) * pp.g * s) / (pp.l * den);
  return dx;
}

Jacobians pendulum_jacobians(const Vector& x, double u, const PendulumParams& pp) {
  const double s = std::sin(x[1]);
  const double c = std::cos(x[1]);
  const double w = x[3];
  const double den = pp.m2 + pp.m1 - pp.m1 * c * c;
  const double dden = 2.0 * pp.m1 * s * c;  // d(den)/dtheta
  const double cc_ss = c * c - s * s;

  const double np = -pp.m1 * pp.l * s * w * w + pp.m1 * pp.g * c * s + u;
  const double np_th = -pp.m1 * pp.l * c * w * w + pp.m1 * pp.g * cc_ss;
  const double np_w = -2.0 * pp.m1 * pp.l * s * w;

  const double nt = u * c - pp.m1 * pp.l * c * s * w * w + (pp.m2 + pp.m1) * pp.g * s;
  const double nt_th = -u * s - pp.m1 * pp.l * cc_ss * w * w + (pp.m2 + pp.m1) * pp.g * c;
  const double nt_w = -2.0 * pp.m1 * pp.l * c * s * w;

  Jacobians jac{Matrix::Zero(4, 4), Matrix::Zero(4, 1)};
  jac.dfdx(0, 2) = 1.0;
  jac.dfdx(1, 3) = 1.0;
  jac.dfdx(2, 1) = (np_th * den - np * dden) / (den * den);
  jac.dfdx(2, 3) = np_w / den;
  jac.dfdx(3, 1) = (nt_th * den - nt * dden) / (pp.l * den * den);
  jac.dfdx(3, 3) = nt_w / (pp.l * den);
  jac.dfdu(2, 0) = 1.0 / den;
  jac.dfdu(3, 0) = c / (pp.l * den);
  return jac;
}

Dynamics make_pendulum_dynamics(const PendulumParams& params) {
  params.validate();
  Dynamics dyn;
  dyn.nx = 4;
  dyn.nu = 1;
  dyn.rhs = [params](const Vector& x, const Vector& u) { return pendulum_rhs(x, u[0], params); };
  dyn.jacobian = [params](const Vector& x, const Vector& u, Matrix& fx, Matrix& fu) {
    Jacobians j = pendulum_jacobians(x, u[0], params);
    fx = std::move(j.dfdx);
    fu = std::move(j.dfdu);
  };
  return dyn;
}

Vector QuadraticCost::state_ref(int k, int nx) const {
  if (x_ref.empty()) return Vector::Zero(nx);
  if (x_ref.size() == 1) return x_ref.front();
  return x_ref.at(static_cast<std::size_t>(k));
}

Vector QuadraticCost::input_ref(int k, int nu) const {
  if (u_ref.empty()) return Vector::Zero(nu);
  if (u_ref.size() == 1) return u_ref.front();
  return u_ref.at(static_cast<std::size_t>(k));
}

void QuadraticCost::validate(int nx, int nu) const {
  require(Q.rows() == nx && Q.cols() == nx, "QuadraticCost: Q must be nx x nx");
  require(QN.rows() == nx && QN.cols() == nx, "QuadraticCost: QN must be nx x nx");
  require(R.rows() == nu && R.cols() == nu, "QuadraticCost: R must be nu x nu");
  require(is_symmetric(Q) && is_symmetric(QN) && is_symmetric(R), "QuadraticCost: weights must be symmetric");
  require(Eigen::SelfAdjointEigenSolver<Matrix>(Q).eigenvalues().minCoeff() >= -1e-12, "QuadraticCost: Q must be PSD");
  require(Eigen::SelfAdjointEigenSolver<Matrix>(QN).eigenvalues().minCoeff() >= -1e-12, "QuadraticCost: QN must be PSD");
  require(R.llt().info() == Eigen::Success, "QuadraticCost: R must be positive definite");
  for (const auto& r : x_ref) require(r.size() == nx, "QuadraticCost: state reference has wrong size");
  for (const auto& r : u_ref) require(r.size() == nu, "QuadraticCost: input reference has wrong size");
}

StageCost stage_cost_terms(const Vector& x, const Vector& u, const QuadraticCost& cost, int k) {
  const auto nx = static_cast<int>(x.size());
  const auto nu = static_cast<int>(u.size());
  StageCost sc;
  sc.Q = cost.Q;
  sc.R = cost.R;
  sc.S = Matrix::Zero(nx, nu);
  sc.q = cost.Q * (x - cost.state_ref(k, nx));
  sc.r = cost.R * (u - cost.input_ref(k, nu));
  return sc;
}

TerminalCost terminal_cost_terms(const Vector& x, const QuadraticCost& cost, int N) {
  const auto nx = static_cast<int>(x.size());
  return {cost.QN * (x - cost.state_ref(N, nx)), cost.QN};
}

StageBounds StageBounds::unbounded(int nx, int nu) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vector::Constant(nx, -inf), Vector::Constant(nx, inf), Vector::Constant(nu, -inf), Vector::Constant(nu, inf)};
}

void StageBounds::validate(int nx, int nu) const {
  require(x_lo.size() == nx && x_hi.size() == nx, "StageBounds: state bounds must have nx entries");
  require(u_lo.size() == nu && u_hi.size() == nu, "StageBounds: input bounds must have nu entries");
  require((x_lo.array() <= x_hi.array()).all(), "StageBounds: x_lo must be <= x_hi");
  require((u_lo.array() <= u_hi.array()).all(), "StageBounds: u_lo must be <= u_hi");
}

int StageBounds::finite_state_bounds() const {
  int n = 0;
  for (Eigen::Index i = 0; i < x_lo.size(); ++i) {
    if (std::isfinite(x_lo[i])) ++n;
    if (std::isfinite(x_hi[i])) ++n;
  }
  return n;
}

}  // namespace blockmpc
