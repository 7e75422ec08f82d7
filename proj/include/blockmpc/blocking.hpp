#pragma once

#include <stdexcept>
#include <vector>

#include "blockmpc/model.hpp"

namespace blockmpc {

class InvalidBlockStructure : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Partition of N shooting intervals into M input blocks.
///
/// `indices` holds the M+1 block start indices with both endpoints
/// (I_0 = 0, I_M = N); block j covers intervals [I_j, I_{j+1}).
class BlockStructure {
 public:
  static BlockStructure from_block_lengths(const std::vector<int>& lengths);
  static BlockStructure from_indices(const std::vector<int>& indices);
  /// M = N, each interval has its own input.
  static BlockStructure unit(int N);
  /// M blocks of (nearly) equal length, longer blocks last.
  static BlockStructure uniform(int N, int M);

  int N() const { return indices_.back(); }
  int M() const { return static_cast<int>(lengths_.size()); }
  const std::vector<int>& indices() const { return indices_; }
  const std::vector<int>& lengths() const { return lengths_; }
  int start(int j) const { return indices_[static_cast<std::size_t>(j)]; }
  int end(int j) const { return indices_[static_cast<std::size_t>(j) + 1]; }
  int length(int j) const { return lengths_[static_cast<std::size_t>(j)]; }
  bool is_unit() const { return M() == N(); }

  /// Block containing interval k. Throws std::out_of_range unless 0 <= k < N.
  int block_of(int k) const;

  bool operator==(const BlockStructure&) const = default;

 private:
  BlockStructure(std::vector<int> indices, std::vector<int> lengths);

  std::vector<int> indices_;
  std::vector<int> lengths_;
  std::vector<int> block_of_;
};

/// Explicit move-blocking matrix T = T_b (x) I_nu of size (N nu) x (M nu).
/// Only meant for reference computations; the solver never forms it.
Matrix build_T(const BlockStructure& bs, int nu);

}  // namespace blockmpc
