#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "blockmpc/closed_loop.hpp"
#include "blockmpc/config.hpp"
#include "blockmpc/outputs.hpp"

using namespace blockmpc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const char* env = std::getenv("BLOCKMPC_TEST_TMP");
  const fs::path base = env ? fs::path(env) : fs::temp_directory_path() / "blockmpc_tests";
  const fs::path dir = base / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

int error_line(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

SchemeConfig short_run(Scheme s, double sim_time) {
  SchemeConfig cfg;
  cfg.scheme = s;
  cfg.sim_time = sim_time;
  return cfg;
}

}  // namespace

TEST_CASE("default configuration reproduces the reference block structure") {
  const SchemeConfig cfg = parse_config("block_lengths = [1, 2, 3, 4, 5, 5, 15, 15, 15, 15]\nN = 80\n");
  CHECK(cfg.blocks().indices() == std::vector<int>{0, 1, 3, 6, 10, 15, 20, 35, 50, 65, 80});
  CHECK(cfg.echo().find("block_indices = [0, 1, 3, 6, 10, 15, 20, 35, 50, 65, 80]") != std::string::npos);
}

TEST_CASE("config errors point at the offending line") {
  CHECK(error_line("N = 80\n# comment\nblock_lengths = [1, 2, 3, 4, 5, 5, 15, 15, 15, 14]\n") == 3);
  CHECK(error_line("Ts = 0.025\nhorizon = 80\n") == 2);
  CHECK(error_line("Ts = 0.025\nTs = 0.05\n") == 2);
  CHECK(error_line("Ts = fast\n") == 1);
  CHECK(error_line("R = [0]\n") == 1);
  CHECK(error_line("x_lower = [3, -inf, -inf, -inf]\n") == 1);
  CHECK(error_line("block_lengths = [40, 40]\nblock_indices = [0, 20, 80]\n") == 2);
  CHECK(error_line("no equals sign\n") == 1);
  CHECK_THROWS_AS(load_config("/nonexistent/blockmpc.cfg"), std::runtime_error);
}

TEST_CASE("config values") {
  const SchemeConfig cfg = parse_config(
      "scheme = A   # unblocked\n"
      "Ts = 0.05\nN = 40\n"
      "block_indices = [0, 10, 40]\n"
      "x0 = [0, pi, 0, 0]\n"
      "x_upper = [2, inf, inf, inf]\n"
      "shift = true\nstate_init = resimulate\n");
  CHECK(cfg.scheme == Scheme::A);
  CHECK(cfg.Ts == 0.05);
  CHECK(cfg.block_lengths == std::vector<int>{10, 30});
  CHECK(cfg.grid_lengths == std::vector<int>{10, 30});
  CHECK(cfg.x0[1] == doctest::Approx(3.14159265358979));
  CHECK(std::isinf(cfg.x_upper[1]));
  CHECK(cfg.shift);
  CHECK(cfg.state_init == StateInit::Resimulate);
  CHECK(cfg.blocks().is_unit());
  CHECK(cfg.blocks().N() == 40);

  SUBCASE("echo parses back to the same configuration") {
    const SchemeConfig again = parse_config(cfg.echo());
    CHECK(again.echo() == cfg.echo());
  }
}

TEST_CASE("scheme B on the 42-interval grid") {
  const SchemeConfig cfg = parse_config(
      "scheme = B\n"
      "grid_indices = [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, "
      "26, 28, 32, 35, 37, 40, 42, 44, 46, 48, 50, 52, 55, 60, 65, 70, 75, 80]\n");
  CHECK(cfg.grid_lengths.size() == 42u);
  const SchemeSetup setup = build_scheme(cfg);
  CHECK(setup.bs.M() == 42);
  CHECK(setup.problem.N() == 42);
  double horizon = 0.0;
  for (int k = 0; k < 42; ++k) {
    horizon += setup.problem.intervals[k].interval();
    CHECK(setup.problem.intervals[k].h == doctest::Approx(0.025));
    CHECK(setup.problem.weight(k) == setup.problem.intervals[k].n_sub);
  }
  CHECK(horizon == doctest::Approx(2.0));
}

TEST_CASE("scheme setups") {
  SchemeConfig cfg;
  cfg.scheme = Scheme::A;
  CHECK(build_scheme(cfg).bs.is_unit());
  CHECK(build_scheme(cfg).problem.N() == 80);
  cfg.scheme = Scheme::B;
  CHECK(build_scheme(cfg).problem.N() == 10);
  cfg.scheme = Scheme::C;
  CHECK(build_scheme(cfg).bs.M() == 10);
  CHECK(build_scheme(cfg).problem.N() == 80);
}

TEST_CASE("empty run") {
  const SimLog log = run_closed_loop(short_run(Scheme::C, 0.0));
  CHECK(log.samples.empty());
  CHECK_FALSE(log.error.has_value());
  const fs::path dir = scratch("empty");
  write_outputs(log, dir);
  CHECK(slurp(dir / "traj.csv") == "t,x0,x1,x2,x3,u0\n");
  CHECK(slurp(dir / "kkt.csv") == "t,stationarity,eq,ineq,total\n");
  CHECK(slurp(dir / "timing.csv") == "step,shooting_ms,condensing_ms,qp_ms,total_ms,qp_iters\n");
  CHECK(slurp(dir / "meta.txt").find("block_indices = [0, 1, 3, 6, 10, 15, 20, 35, 50, 65, 80]") != std::string::npos);
}

TEST_CASE("outputs round trip and agree with the summary") {
  const SimLog log = run_closed_loop(short_run(Scheme::C, 0.5));
  REQUIRE(log.samples.size() == 20u);
  const fs::path dir = scratch("roundtrip");
  write_outputs(log, dir);

  const auto traj = read_csv(dir / "traj.csv");
  REQUIRE(traj.size() == 21u);
  for (std::size_t i = 0; i < log.samples.size(); ++i) {
    const SampleRecord& r = log.samples[i];
    const auto& row = traj[i + 1];
    REQUIRE(row.size() == 6u);
    CHECK(std::stod(row[0]) == doctest::Approx(r.t).epsilon(1e-11));
    for (int j = 0; j < 4; ++j) {
      CHECK(std::stod(row[1 + j]) == doctest::Approx(r.x[j]).epsilon(1e-11));
      CHECK(format_number(std::stod(row[1 + j])) == row[1 + j]);
    }
    CHECK(std::stod(row[5]) == doctest::Approx(r.u[0]).epsilon(1e-11));
  }

  const auto timing = read_csv(dir / "timing.csv");
  const TimingSummary s = summarize(log);
  double sums[4] = {0, 0, 0, 0};
  int iters = 0;
  for (std::size_t i = 1; i < timing.size(); ++i) {
    for (int c = 0; c < 4; ++c) sums[c] += std::stod(timing[i][1 + c]);
    iters += std::stoi(timing[i][5]);
  }
  CHECK(sums[0] == doctest::Approx(s.sum.shooting_ms).epsilon(1e-9));
  CHECK(sums[1] == doctest::Approx(s.sum.condensing_ms).epsilon(1e-9));
  CHECK(sums[2] == doctest::Approx(s.sum.qp_ms).epsilon(1e-9));
  CHECK(sums[3] == doctest::Approx(s.sum.total_ms).epsilon(1e-9));
  CHECK(iters == s.qp_iters_sum);

  std::ostringstream printed;
  print_summary(printed, log, s);
  CHECK(printed.str().find(format_number(s.sum.total_ms)) != std::string::npos);
}

TEST_CASE("closed loop is deterministic apart from timings") {
  const SimLog a = run_closed_loop(short_run(Scheme::C, 1.0));
  const SimLog b = run_closed_loop(short_run(Scheme::C, 1.0));
  const fs::path da = scratch("det_a"), db = scratch("det_b");
  write_outputs(a, da);
  write_outputs(b, db);
  CHECK(slurp(da / "traj.csv") == slurp(db / "traj.csv"));
  CHECK(slurp(da / "kkt.csv") == slurp(db / "kkt.csv"));
  CHECK(slurp(da / "meta.txt") == slurp(db / "meta.txt"));
}

TEST_CASE("applied input equals the first block of the updated trajectory") {
  const SimLog log = run_closed_loop(short_run(Scheme::C, 0.25));
  REQUIRE_FALSE(log.error.has_value());
  for (const SampleRecord& r : log.samples) {
    CHECK(std::abs(r.u[0]) <= 20.0 + 1e-6);
    CHECK_FALSE(r.input_violation);
    CHECK(r.qp_status == QpStatus::Solved);
  }
}

TEST_CASE("scheme C with unit blocks reproduces scheme A") {
  SchemeConfig c = short_run(Scheme::C, 0.5);
  c.block_lengths = std::vector<int>(80, 1);
  const SimLog la = run_closed_loop(short_run(Scheme::A, 0.5));
  const SimLog lc = run_closed_loop(c);
  REQUIRE(la.samples.size() == lc.samples.size());
  for (std::size_t i = 0; i < la.samples.size(); ++i) {
    CHECK((la.samples[i].x - lc.samples[i].x).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((la.samples[i].u - lc.samples[i].u).lpNorm<Eigen::Infinity>() <= 1e-9);
  }
}

TEST_CASE("compare writes one summary row per scheme") {
  const CompareResult res = run_compare(short_run(Scheme::C, 0.25));
  CHECK(res.a.scheme == Scheme::A);
  CHECK(res.b.scheme == Scheme::B);
  CHECK(res.c.scheme == Scheme::C);
  const fs::path dir = scratch("compare");
  write_compare_summary({&res.a, &res.b, &res.c}, dir / "summary.csv");
  const auto rows = read_csv(dir / "summary.csv");
  REQUIRE(rows.size() == 4u);
  CHECK(rows[1][0] == "A");
  CHECK(rows[1][1] == "80");
  CHECK(rows[2][1] == "10");
  CHECK(rows[3][1] == "10");
}

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-2.5e-20) == "-2.5e-20");
}
