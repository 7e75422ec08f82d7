#include "blockmpc/closed_loop.hpp"

#include <cmath>
#include <exception>
#include <future>
#include <string>

namespace blockmpc {

int sample_count(const SchemeConfig& cfg) { return static_cast<int>(std::floor(cfg.sim_time / cfg.Ts + 1e-9)); }

SimLog run_closed_loop(const SchemeConfig& cfg) {
  SchemeSetup setup = build_scheme(cfg);
  SimLog log;
  log.scheme = cfg.scheme;
  log.version = kVersion;
  log.config_echo = cfg.echo();
  log.indices = setup.bs.indices();

  const Dynamics plant = setup.problem.dynamics;
  const StageBounds bounds = setup.problem.bounds;
  const int nu = setup.problem.nu();

  RtiOptions opts;
  opts.qp.tol = cfg.qp_tol;
  opts.qp.max_iter = cfg.qp_max_iter;
  opts.state_init = cfg.state_init;
  opts.shift = cfg.shift;
  RtiController ctrl(std::move(setup.problem), setup.bs, opts);

  const IntegratorConfig plant_step{cfg.Ts / cfg.plant_substeps, cfg.plant_substeps};
  const int n = sample_count(cfg);
  Vector x = cfg.x0;
  try {
    ctrl.initialize(x, std::vector<Vector>(static_cast<std::size_t>(ctrl.blocks().M()), Vector::Zero(nu)));
    for (int i = 0; i < n; ++i) {
      SampleRecord rec;
      rec.t = i * cfg.Ts;
      rec.x = x;
      Preparation prep = ctrl.prepare(x);
      FeedbackResult fb = ctrl.feedback(std::move(prep));
      rec.u = fb.u;
      rec.kkt = fb.kkt;
      rec.timings = ctrl.state().timings;
      rec.qp_iterations = fb.qp.iterations;
      rec.qp_status = fb.qp.status;
      constexpr double slack = 1e-6;
      rec.state_violation = ((x - bounds.x_hi).array() > slack).any() || ((bounds.x_lo - x).array() > slack).any();
      rec.input_violation =
          ((rec.u - bounds.u_hi).array() > slack).any() || ((bounds.u_lo - rec.u).array() > slack).any();
      log.samples.push_back(std::move(rec));

      x = integrate_state(plant_step, plant, x, fb.u);
      ctrl.advance();
    }
  } catch (const IntegrationDiverged& e) {
    log.error = e.what();
  } catch (const std::exception& e) {
    log.error = std::string("controller failure: ") + e.what();
  }
  return log;
}

CompareResult run_compare(const SchemeConfig& cfg) {
  auto launch = [&](Scheme s) {
    SchemeConfig c = cfg;
    c.scheme = s;
    return std::async(std::launch::async, [c] { return run_closed_loop(c); });
  };
  auto fa = launch(Scheme::A);
  auto fb = launch(Scheme::B);
  auto fc = launch(Scheme::C);
  return {fa.get(), fb.get(), fc.get()};
}

}  // namespace blockmpc
