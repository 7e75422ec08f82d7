#include "blockmpc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <locale>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>

namespace blockmpc {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::A:
      return "A";
    case Scheme::B:
      return "B";
    case Scheme::C:
      return "C";
  }
  return "?";
}

Scheme parse_scheme(const std::string& s) {
  if (s == "A" || s == "a") return Scheme::A;
  if (s == "B" || s == "b") return Scheme::B;
  if (s == "C" || s == "c") return Scheme::C;
  throw std::invalid_argument("unknown scheme '" + s + "', expected A, B or C");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

double parse_number(const std::string& tok) {
  const std::string t = lower(trim(tok));
  if (t == "pi" || t == "+pi") return std::numbers::pi;
  if (t == "-pi") return -std::numbers::pi;
  if (t == "inf" || t == "+inf" || t == "infinity") return kInfinity;
  if (t == "-inf" || t == "-infinity") return -kInfinity;
  std::istringstream is(t);
  is.imbue(std::locale::classic());
  double v = 0.0;
  if (!(is >> v) || !(is >> std::ws).eof()) throw std::invalid_argument("not a number: '" + tok + "'");
  return v;
}

std::vector<double> parse_list(const std::string& raw) {
  std::string s = trim(raw);
  if (!s.empty() && s.front() == '[') {
    if (s.back() != ']') throw std::invalid_argument("unterminated list");
    s = s.substr(1, s.size() - 2);
  }
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream is(s);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(parse_number(tok));
  return out;
}

int parse_int(const std::string& raw) {
  const double v = parse_number(raw);
  if (!std::isfinite(v) || v != std::floor(v)) throw std::invalid_argument("expected an integer, got '" + raw + "'");
  return static_cast<int>(v);
}

std::vector<int> parse_int_list(const std::string& raw) {
  std::vector<int> out;
  for (double v : parse_list(raw)) {
    if (!std::isfinite(v) || v != std::floor(v)) throw std::invalid_argument("expected integers in list");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

bool parse_bool(const std::string& raw) {
  const std::string t = lower(trim(raw));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw std::invalid_argument("expected a boolean, got '" + raw + "'");
}

std::vector<int> lengths_from_indices(const std::vector<int>& idx) {
  return BlockStructure::from_indices(idx).lengths();
}

std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17) << v;
  return os.str();
}

template <typename Seq>
std::string fmt_list(const Seq& seq) {
  std::string s = "[";
  bool first = true;
  for (auto v : seq) {
    if (!first) s += ", ";
    first = false;
    if constexpr (std::is_integral_v<decltype(v)>) {
      s += std::to_string(v);
    } else {
      s += fmt(v);
    }
  }
  return s + "]";
}

std::string fmt_vec(const Vector& v) { return fmt_list(std::vector<double>(v.data(), v.data() + v.size())); }

}  // namespace

void SchemeConfig::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument(msg); };
  if (!(Ts > 0.0)) fail("Ts must be > 0");
  if (N < 1) fail("N must be >= 1");
  if (!(sim_time >= 0.0)) fail("sim_time must be >= 0");
  if (plant_substeps < 1) fail("plant_substeps must be >= 1");
  if (!(qp_tol > 0.0)) fail("qp_tol must be > 0");
  if (qp_max_iter < 0) fail("qp_max_iter must be >= 0");
  pendulum.validate();

  auto check_lengths = [&](const std::vector<int>& lengths, const char* name) {
    if (lengths.empty()) fail(std::string(name) + " must not be empty");
    for (int l : lengths) {
      if (l < 1) fail(std::string(name) + " entries must be >= 1");
    }
    const int sum = std::accumulate(lengths.begin(), lengths.end(), 0);
    if (sum != N) fail(std::string(name) + " sum to " + std::to_string(sum) + " but N = " + std::to_string(N));
  };
  check_lengths(block_lengths, "block_lengths");
  check_lengths(grid_lengths, "grid_lengths");

  auto check_size = [&](const Vector& v, int n, const char* name) {
    if (v.size() != n) fail(std::string(name) + " must have " + std::to_string(n) + " entries");
  };
  check_size(Q_diag, 4, "Q");
  check_size(QN_diag, 4, "QN");
  check_size(R_diag, 1, "R");
  check_size(x_ref, 4, "x_ref");
  check_size(x_lower, 4, "x_lower");
  check_size(x_upper, 4, "x_upper");
  check_size(u_lower, 1, "u_lower");
  check_size(u_upper, 1, "u_upper");
  check_size(x0, 4, "x0");
  if ((Q_diag.array() < 0).any() || (QN_diag.array() < 0).any()) fail("Q and QN must be nonnegative");
  if ((R_diag.array() <= 0).any()) fail("R must be positive");
  if ((x_lower.array() > x_upper.array()).any()) fail("x_lower must not exceed x_upper");
  if ((u_lower.array() > u_upper.array()).any()) fail("u_lower must not exceed u_upper");
  if (!x0.allFinite()) fail("x0 must be finite");
}

BlockStructure SchemeConfig::blocks() const {
  switch (scheme) {
    case Scheme::A:
      return BlockStructure::unit(N);
    case Scheme::B:
      return BlockStructure::unit(static_cast<int>(grid_lengths.size()));
    case Scheme::C:
      return BlockStructure::from_block_lengths(block_lengths);
  }
  throw std::logic_error("unreachable");
}

std::string SchemeConfig::echo() const {
  std::ostringstream os;
  os << "scheme = " << to_string(scheme) << '\n'
     << "Ts = " << fmt(Ts) << '\n'
     << "N = " << N << '\n'
     << "block_lengths = " << fmt_list(block_lengths) << '\n'
     << "block_indices = " << fmt_list(BlockStructure::from_block_lengths(block_lengths).indices()) << '\n'
     << "grid_lengths = " << fmt_list(grid_lengths) << '\n'
     << "grid_indices = " << fmt_list(BlockStructure::from_block_lengths(grid_lengths).indices()) << '\n'
     << "m1 = " << fmt(pendulum.m1) << '\n'
     << "m2 = " << fmt(pendulum.m2) << '\n'
     << "l = " << fmt(pendulum.l) << '\n'
     << "g = " << fmt(pendulum.g) << '\n'
     << "Q = " << fmt_vec(Q_diag) << '\n'
     << "R = " << fmt_vec(R_diag) << '\n'
     << "QN = " << fmt_vec(QN_diag) << '\n'
     << "x_ref = " << fmt_vec(x_ref) << '\n'
     << "x_lower = " << fmt_vec(x_lower) << '\n'
     << "x_upper = " << fmt_vec(x_upper) << '\n'
     << "u_lower = " << fmt_vec(u_lower) << '\n'
     << "u_upper = " << fmt_vec(u_upper) << '\n'
     << "x0 = " << fmt_vec(x0) << '\n'
     << "sim_time = " << fmt(sim_time) << '\n'
     << "plant_substeps = " << plant_substeps << '\n'
     << "qp_tol = " << fmt(qp_tol) << '\n'
     << "qp_max_iter = " << qp_max_iter << '\n'
     << "seed = " << seed << '\n'
     << "shift = " << (shift ? "true" : "false") << '\n'
     << "state_init = " << (state_init == StateInit::Resimulate ? "resimulate" : "keep") << '\n';
  return os.str();
}

SchemeConfig parse_config(const std::string& text, const std::string& source) {
  SchemeConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  std::set<std::string> seen;
  std::map<std::string, int> key_line;
  std::vector<int> block_lengths_opt, block_indices_opt, grid_lengths_opt, grid_indices_opt;
  bool grid_given = false;

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(source, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source, lineno, "empty key");
    if (!seen.insert(key).second) throw ConfigError(source, lineno, "duplicate key '" + key + "'");
    key_line[key] = lineno;

    try {
      if (key == "scheme") {
        cfg.scheme = parse_scheme(value);
      } else if (key == "Ts") {
        cfg.Ts = parse_number(value);
      } else if (key == "N") {
        cfg.N = parse_int(value);
      } else if (key == "block_lengths") {
        block_lengths_opt = parse_int_list(value);
      } else if (key == "block_indices") {
        block_indices_opt = parse_int_list(value);
      } else if (key == "grid_lengths") {
        grid_lengths_opt = parse_int_list(value);
        grid_given = true;
      } else if (key == "grid_indices") {
        grid_indices_opt = parse_int_list(value);
        grid_given = true;
      } else if (key == "m1") {
        cfg.pendulum.m1 = parse_number(value);
      } else if (key == "m2") {
        cfg.pendulum.m2 = parse_number(value);
      } else if (key == "l") {
        cfg.pendulum.l = parse_number(value);
      } else if (key == "g") {
        cfg.pendulum.g = parse_number(value);
      } else if (key == "Q") {
        cfg.Q_diag = to_vector(parse_list(value));
      } else if (key == "R") {
        cfg.R_diag = to_vector(parse_list(value));
      } else if (key == "QN") {
        cfg.QN_diag = to_vector(parse_list(value));
      } else if (key == "x_ref") {
        cfg.x_ref = to_vector(parse_list(value));
      } else if (key == "x_lower") {
        cfg.x_lower = to_vector(parse_list(value));
      } else if (key == "x_upper") {
        cfg.x_upper = to_vector(parse_list(value));
      } else if (key == "u_lower") {
        cfg.u_lower = to_vector(parse_list(value));
      } else if (key == "u_upper") {
        cfg.u_upper = to_vector(parse_list(value));
      } else if (key == "x0") {
        cfg.x0 = to_vector(parse_list(value));
      } else if (key == "sim_time") {
        cfg.sim_time = parse_number(value);
      } else if (key == "plant_substeps") {
        cfg.plant_substeps = parse_int(value);
      } else if (key == "qp_tol") {
        cfg.qp_tol = parse_number(value);
      } else if (key == "qp_max_iter") {
        cfg.qp_max_iter = parse_int(value);
      } else if (key == "seed") {
        const int s = parse_int(value);
        if (s < 0) throw std::invalid_argument("seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(s);
      } else if (key == "shift") {
        cfg.shift = parse_bool(value);
      } else if (key == "state_init") {
        const std::string v = lower(value);
        if (v == "resimulate") {
          cfg.state_init = StateInit::Resimulate;
        } else if (v == "keep") {
          cfg.state_init = StateInit::Keep;
        } else {
          throw std::invalid_argument("state_init must be 'resimulate' or 'keep'");
        }
      } else {
        throw ConfigError(source, lineno, "unknown key '" + key + "'");
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(source, lineno, key + ": " + e.what());
    }
  }

  // Lengths and indices are alternative spellings of the same structure.
  auto resolve = [&](const std::vector<int>& lengths, const std::vector<int>& indices, const char* lname,
                     const char* iname, std::vector<int>& target) {
    const bool has_l = seen.count(lname) > 0;
    const bool has_i = seen.count(iname) > 0;
    try {
      if (has_i) {
        const std::vector<int> from_idx = lengths_from_indices(indices);
        if (has_l && from_idx != lengths) {
          throw ConfigError(source, key_line[iname], std::string(iname) + " disagrees with " + lname);
        }
        target = from_idx;
      } else if (has_l) {
        target = lengths;
      }
    } catch (const InvalidBlockStructure& e) {
      throw ConfigError(source, key_line[iname], std::string(iname) + ": " + e.what());
    }
  };
  resolve(block_lengths_opt, block_indices_opt, "block_lengths", "block_indices", cfg.block_lengths);
  resolve(grid_lengths_opt, grid_indices_opt, "grid_lengths", "grid_indices", cfg.grid_lengths);
  if (!grid_given && (seen.count("block_lengths") || seen.count("block_indices"))) cfg.grid_lengths = cfg.block_lengths;

  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    // Point at the line of the offending key when it can be identified.
    const std::string msg = e.what();
    int at = 0;
    for (const auto& [key, ln] : key_line) {
      if (msg.rfind(key + " ", 0) == 0 || msg.rfind(key + "_", 0) == 0) at = ln;
    }
    throw ConfigError(source, at, msg);
  }
  return cfg;
}

SchemeConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(path.string(), 0, "cannot open config file");
  std::ostringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), path.string());
}

SchemeSetup build_scheme(const SchemeConfig& cfg) {
  cfg.validate();
  QuadraticCost cost;
  cost.Q = cfg.Q_diag.asDiagonal();
  cost.R = cfg.R_diag.asDiagonal();
  cost.QN = cfg.QN_diag.asDiagonal();
  cost.x_ref = {cfg.x_ref};
  StageBounds bounds{cfg.x_lower, cfg.x_upper, cfg.u_lower, cfg.u_upper};
  Dynamics dyn = make_pendulum_dynamics(cfg.pendulum);

  switch (cfg.scheme) {
    case Scheme::A:
    case Scheme::C: {
      ShootingProblem problem = ShootingProblem::uniform(std::move(dyn), std::move(cost), std::move(bounds), cfg.Ts, cfg.N);
      return {std::move(problem), cfg.blocks()};
    }
    case Scheme::B: {
      ShootingProblem problem{std::move(dyn), std::move(cost), std::move(bounds), {}, {}};
      for (int len : cfg.grid_lengths) {
        problem.intervals.push_back(IntegratorConfig{cfg.Ts, len});
        problem.stage_weights.push_back(static_cast<double>(len));
      }
      return {std::move(problem), cfg.blocks()};
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace blockmpc
