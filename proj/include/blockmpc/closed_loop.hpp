#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockmpc/config.hpp"
#include "blockmpc/rti.hpp"

namespace blockmpc {

struct SampleRecord {
  double t = 0.0;
  Vector x;  // plant state measured at t
  Vector u;  // input applied over [t, t + Ts)
  KktReport kkt;
  PhaseTimings timings;
  int qp_iterations = 0;
  QpStatus qp_status = QpStatus::Solved;
  bool state_violation = false;  // measured state outside its box by more than 1e-6
  bool input_violation = false;
};

struct SimLog {
  Scheme scheme = Scheme::C;
  std::string version;
  std::string config_echo;
  std::vector<int> indices;  // start indices of the controller's input blocks
  std::vector<SampleRecord> samples;
  std::optional<std::string> error;  // set when the run stopped early

  int nx() const { return samples.empty() ? 0 : static_cast<int>(samples.front().x.size()); }
  int nu() const { return samples.empty() ? 0 : static_cast<int>(samples.front().u.size()); }
};

int sample_count(const SchemeConfig& cfg);

/// Closed-loop simulation of the RTI controller against the nominal plant.
/// Integration or solver failures end the run; the log then holds the
/// samples so far and the error message.
SimLog run_closed_loop(const SchemeConfig& cfg);

/// Runs schemes A, B and C on the same configuration, one thread each.
struct CompareResult {
  SimLog a, b, c;
};
CompareResult run_compare(const SchemeConfig& cfg);

}  // namespace blockmpc
