#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "blockmpc/blocking.hpp"
#include "blockmpc/model.hpp"
#include "blockmpc/rti.hpp"
#include "blockmpc/shooting.hpp"

namespace blockmpc {

inline constexpr const char* kVersion = "blockmpc 0.1.0";
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A: uniform grid, unblocked. B: nonuniform grid (states and inputs
/// coarsened). C: uniform grid with input move blocking.
enum class Scheme { A, B, C };

const char* to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what)
      : std::runtime_error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}

  int line() const { return line_; }

 private:
  int line_;
};

/// Closed-loop pendulum experiment. Defaults reproduce the swing-up setup
/// (Ts = 25 ms, N = 80, blocks [1,2,3,4,5,5,15,15,15,15], x0 = [0, pi, 0, 0]).
struct SchemeConfig {
  Scheme scheme = Scheme::C;
  double Ts = 0.025;
  int N = 80;
  std::vector<int> block_lengths{1, 2, 3, 4, 5, 5, 15, 15, 15, 15};
  std::vector<int> grid_lengths{1, 2, 3, 4, 5, 5, 15, 15, 15, 15};
  PendulumParams pendulum;
  Vector Q_diag = (Vector(4) << 10.0, 10.0, 0.1, 0.1).finished();
  Vector R_diag = Vector::Constant(1, 0.01);
  Vector QN_diag = (Vector(4) << 10.0, 10.0, 0.1, 0.1).finished();
  Vector x_ref = Vector::Zero(4);
  Vector x_lower = (Vector(4) << -2.0, -kInfinity, -kInfinity, -kInfinity).finished();
  Vector x_upper = (Vector(4) << 2.0, kInfinity, kInfinity, kInfinity).finished();
  Vector u_lower = Vector::Constant(1, -20.0);
  Vector u_upper = Vector::Constant(1, 20.0);
  Vector x0 = (Vector(4) << 0.0, 3.14159265358979323846, 0.0, 0.0).finished();
  double sim_time = 10.0;
  int plant_substeps = 10;
  double qp_tol = 1e-8;
  int qp_max_iter = 0;
  std::uint64_t seed = 0;
  bool shift = false;
  StateInit state_init = StateInit::Keep;

  void validate() const;
  /// Input blocks of the selected scheme (unit blocks for A and B).
  BlockStructure blocks() const;
  /// Effective configuration in the same key = value syntax load_config reads.
  std::string echo() const;
};

/// Parses the flat `key = value` format. Lists are written `[a, b, c]`;
/// `#` starts a comment; `pi` and `inf` are accepted as numbers. Unknown
/// keys are rejected; omitted keys keep their defaults.
SchemeConfig parse_config(const std::string& text, const std::string& source = "<config>");
SchemeConfig load_config(const std::filesystem::path& path);

struct SchemeSetup {
  ShootingProblem problem;
  BlockStructure bs;
};

/// Builds the discretized OCP for the configured scheme. Scheme B integrates
/// interval j with grid_lengths[j] RK4 sub-steps of Ts and scales its stage
/// weights by the same factor.
SchemeSetup build_scheme(const SchemeConfig& cfg);

}  // namespace blockmpc
