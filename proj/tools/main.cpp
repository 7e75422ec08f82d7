#include <CLI11.hpp>

#include <algorithm>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "blockmpc/bench.hpp"
#include "blockmpc/closed_loop.hpp"
#include "blockmpc/config.hpp"
#include "blockmpc/outputs.hpp"

namespace fs = std::filesystem;
using namespace blockmpc;

namespace {

SchemeConfig config_or_default(const std::string& path) { return path.empty() ? SchemeConfig{} : load_config(path); }

// 0 on success, 2 if the run stopped early, 3 if a QP was reported infeasible.
int run_status(const SimLog& log) {
  if (log.error) return 2;
  const bool infeasible = std::any_of(log.samples.begin(), log.samples.end(),
                                      [](const SampleRecord& r) { return r.qp_status == QpStatus::Infeasible; });
  return infeasible ? 3 : 0;
}

int cmd_simulate(const std::string& config, const std::string& scheme, const fs::path& out) {
  SchemeConfig cfg = config_or_default(config);
  if (!scheme.empty()) cfg.scheme = parse_scheme(scheme);
  cfg.validate();
  const SimLog log = run_closed_loop(cfg);
  write_outputs(log, out);
  print_summary(std::cout, log, summarize(log));
  const int status = run_status(log);
  if (status != 0) std::cerr << "blockmpc: run did not complete cleanly (see " << (out / "meta.txt").string() << ")\n";
  return status;
}

int cmd_compare(const std::string& config, const fs::path& out) {
  const SchemeConfig cfg = config_or_default(config);
  const CompareResult res = run_compare(cfg);
  int status = 0;
  for (const SimLog* log : {&res.a, &res.b, &res.c}) {
    write_outputs(*log, out / to_string(log->scheme));
    print_summary(std::cout, *log, summarize(*log));
    status = std::max(status, run_status(*log));
  }
  write_compare_summary({&res.a, &res.b, &res.c}, out / "summary.csv");
  return status;
}

int cmd_bench(int nx, int nu, int M, const std::vector<int>& N_list, int reps, std::uint64_t seed,
              const fs::path& out) {
  const std::vector<BenchRow> rows = bench_condensing(nx, nu, M, N_list, reps, seed);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw std::runtime_error("cannot create " + out.string() + ": " + ec.message());
  write_bench(rows, out / "bench.csv");
  std::cout << "N,M,tailored_ms,naive_ms,tailored_mults,naive_mults,predicted\n";
  for (const BenchRow& r : rows) {
    std::cout << r.N << ',' << r.M << ',' << format_number(r.tailored_ms) << ',' << format_number(r.naive_ms) << ','
              << r.tailored_mults << ',' << r.naive_mults << ',' << r.predicted << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Real-time iteration NMPC with input move blocking"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  std::string config, scheme;
  std::string out = "out";
  auto* sim = app.add_subcommand("simulate", "Closed-loop pendulum simulation for one scheme");
  sim->add_option("--config", config, "Config file (key = value); defaults are used when omitted")
      ->check(CLI::ExistingFile);
  sim->add_option("--scheme", scheme, "Override the configured scheme")->check(CLI::IsMember({"A", "B", "C"}));
  sim->add_option("--out", out, "Output directory");

  int nx = 4, nu = 1, M = 10, reps = 20;
  std::uint64_t seed = 0;
  std::vector<int> N_list{20, 40, 80};
  auto* bench = app.add_subcommand("bench-condense", "Tailored vs naive condensing on random data");
  bench->add_option("--nx", nx, "State dimension")->check(CLI::PositiveNumber);
  bench->add_option("--nu", nu, "Input dimension")->check(CLI::PositiveNumber);
  bench->add_option("--M", M, "Number of uniform input blocks (0: M = N)")->check(CLI::NonNegativeNumber);
  bench->add_option("--N", N_list, "Horizon lengths, e.g. --N 20,40,80")->delimiter(',');
  bench->add_option("--reps", reps, "Repetitions per horizon")->check(CLI::PositiveNumber);
  bench->add_option("--seed", seed, "RNG seed");
  bench->add_option("--out", out, "Output directory");

  auto* cmp = app.add_subcommand("compare", "Run schemes A, B and C and write a summary table");
  cmp->add_option("--config", config, "Config file")->check(CLI::ExistingFile);
  cmp->add_option("--out", out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config, scheme, out);
    if (bench->parsed()) return cmd_bench(nx, nu, M, N_list, reps, seed, out);
    if (cmp->parsed()) return cmd_compare(config, out);
  } catch (const std::exception& e) {
    std::cerr << "blockmpc: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
