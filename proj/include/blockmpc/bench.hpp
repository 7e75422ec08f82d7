#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "blockmpc/blocking.hpp"
#include "blockmpc/shooting.hpp"

namespace blockmpc {

/// Random stage-wise QP data for a given block structure: A_k scaled to
/// spectral norm 0.95, Q_k PSD, R_k PD, optional nonzero S_k, input bounds
/// around zero and `rows_per_node` random constraint rows per node k >= 1.
StageData random_stage_data(int nx, int nu, const BlockStructure& bs, std::mt19937_64& rng, int rows_per_node = 0,
                            bool with_S = true);

struct BenchRow {
  int N = 0;
  int M = 0;
  double tailored_ms = 0.0;  // median over repetitions
  double naive_ms = 0.0;
  std::uint64_t tailored_mults = 0;
  std::uint64_t naive_mults = 0;
  std::uint64_t predicted = 0;
};

/// Times both condensing pipelines on random data with M uniform blocks
/// (M = 0 means unit blocks, i.e. M = N).
std::vector<BenchRow> bench_condensing(int nx, int nu, int M, const std::vector<int>& N_list, int reps,
                                       std::uint64_t seed);

}  // namespace blockmpc
