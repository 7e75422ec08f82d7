#pragma once

#include <stdexcept>
#include <string>

#include "blockmpc/model.hpp"

namespace blockmpc {

/// Thrown when integration produces a non-finite state. `node()` is the
/// shooting interval that failed, or -1 when not known at the throw site.
class IntegrationDiverged : public std::runtime_error {
 public:
  explicit IntegrationDiverged(int node)
      : std::runtime_error("integration diverged at shooting node " + std::to_string(node)), node_(node) {}

  int node() const { return node_; }

 private:
  int node_;
};

/// One shooting interval is n_sub fixed RK4 steps of length h.
struct IntegratorConfig {
  double h = 0.025;
  int n_sub = 1;

  double interval() const { return h * n_sub; }
  void validate() const;
};

/// End state of a map together with its exact Jacobians w.r.t. (x, u).
struct StepResult {
  Vector x;
  Matrix A;
  Matrix B;
};

/// Classical RK4 step. A and B are the Jacobians of the discrete RK4 map,
/// propagated through all four stages by the chain rule.
StepResult rk4_step(const Dynamics& dyn, const Vector& x, const Vector& u, double h, int node = -1);

/// n_sub RK4 steps with u held constant, sensitivities composed along the way.
StepResult integrate_interval(const IntegratorConfig& cfg, const Dynamics& dyn, const Vector& x, const Vector& u,
                              int node = -1);

/// State-only RK4 integration (no sensitivities), used for plant simulation.
Vector integrate_state(const IntegratorConfig& cfg, const Dynamics& dyn, const Vector& x, const Vector& u,
                       int node = -1);

}  // namespace blockmpc
