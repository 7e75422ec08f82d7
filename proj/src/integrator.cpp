#include "blockmpc/integrator.hpp"

namespace blockmpc {

namespace {

void check_finite(const Vector& x, int node) {
  if (!x.allFinite()) throw IntegrationDiverged(node);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(h > 0.0)) throw std::invalid_argument("IntegratorConfig: h must be > 0");
  if (n_sub < 1) throw std::invalid_argument("IntegratorConfig: n_sub must be >= 1");
}

StepResult rk4_step(const Dynamics& dyn, const Vector& x, const Vector& u, double h, int node) {
  const int nx = dyn.nx;
  const int nu = dyn.nu;
  Matrix fx(nx, nx), fu(nx, nu);

  // Stage i evaluates f at x_i = x + a_i h k_{i-1}; its sensitivities are
  // dk_i/dx = fx(x_i) (I + a_i h dk_{i-1}/dx) and dk_i/du = fx(x_i) a_i h dk_{i-1}/du + fu(x_i).
  Matrix kx(nx, nx), ku(nx, nu), kx_next(nx, nx), ku_next(nx, nu);
  StepResult out;
  out.A = Matrix::Identity(nx, nx);
  out.B = Matrix::Zero(nx, nu);
  out.x = x;

  const double a[4] = {0.0, 0.5 * h, 0.5 * h, h};
  const double b[4] = {h / 6.0, h / 3.0, h / 3.0, h / 6.0};
  Vector xi = x;
  Vector k;
  for (int i = 0; i < 4; ++i) {
    if (i > 0) xi = x + a[i] * k;
    k = dyn.rhs(xi, u);
    dyn.jacobian(xi, u, fx, fu);
    if (i == 0) {
      kx = fx;
      ku = fu;
    } else {
      kx_next = fx;
      kx_next.noalias() += a[i] * fx * kx;
      ku_next = fu;
      ku_next.noalias() += a[i] * fx * ku;
      kx.swap(kx_next);
      ku.swap(ku_next);
    }
    out.x += b[i] * k;
    out.A += b[i] * kx;
    out.B += b[i] * ku;
  }
  check_finite(out.x, node);
  return out;
}

StepResult integrate_interval(const IntegratorConfig& cfg, const Dynamics& dyn, const Vector& x, const Vector& u,
                              int node) {
  StepResult acc = rk4_step(dyn, x, u, cfg.h, node);
  for (int s = 1; s < cfg.n_sub; ++s) {
    StepResult step = rk4_step(dyn, acc.x, u, cfg.h, node);
    // B <- A_step B + B_step must use the old A, so B is updated first.
    Matrix B = step.B;
    B.noalias() += step.A * acc.B;
    Matrix A(dyn.nx, dyn.nx);
    A.noalias() = step.A * acc.A;
    acc.x = std::move(step.x);
    acc.A = std::move(A);
    acc.B = std::move(B);
  }
  return acc;
}

Vector integrate_state(const IntegratorConfig& cfg, const Dynamics& dyn, const Vector& x, const Vector& u, int node) {
  Vector xs = x;
  const double h = cfg.h;
  for (int s = 0; s < cfg.n_sub; ++s) {
    const Vector k1 = dyn.rhs(xs, u);
    const Vector k2 = dyn.rhs(xs + 0.5 * h * k1, u);
    const Vector k3 = dyn.rhs(xs + 0.5 * h * k2, u);
    const Vector k4 = dyn.rhs(xs + h * k3, u);
    xs += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_finite(xs, node);
  }
  return xs;
}

}  // namespace blockmpc
