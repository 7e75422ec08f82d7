#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "blockmpc/bench.hpp"
#include "blockmpc/closed_loop.hpp"

namespace blockmpc {

/// Per-phase statistics over all samples of one run, in milliseconds.
struct TimingSummary {
  int samples = 0;
  PhaseTimings sum;
  PhaseTimings median;
  PhaseTimings max;
  int qp_iters_sum = 0;
  double kkt_median = 0.0;
};

TimingSummary summarize(const SimLog& log);

/// Writes traj.csv, kkt.csv, timing.csv and meta.txt into `dir` (created if missing).
void write_outputs(const SimLog& log, const std::filesystem::path& dir);

/// Prints the timing summary block (column sums of timing.csv, medians, maxima).
void print_summary(std::ostream& os, const SimLog& log, const TimingSummary& s);

/// One row per run: scheme, M, samples, medians and maxima per phase, median KKT.
void write_compare_summary(const std::vector<const SimLog*>& logs, const std::filesystem::path& path);

void write_bench(const std::vector<BenchRow>& rows, const std::filesystem::path& path);

/// Number formatting used by every CSV: 12 significant digits, '.' decimal point.
std::string format_number(double v);

}  // namespace blockmpc
