#include "blockmpc/blocking.hpp"

#include <string>

namespace blockmpc {

BlockStructure::BlockStructure(std::vector<int> indices, std::vector<int> lengths)
    : indices_(std::move(indices)), lengths_(std::move(lengths)) {
  block_of_.reserve(static_cast<std::size_t>(indices_.back()));
  for (int j = 0; j < M(); ++j) {
    for (int k = start(j); k < end(j); ++k) block_of_.push_back(j);
  }
}

BlockStructure BlockStructure::from_block_lengths(const std::vector<int>& lengths) {
  if (lengths.empty()) throw InvalidBlockStructure("block structure needs at least one block");
  std::vector<int> indices{0};
  indices.reserve(lengths.size() + 1);
  for (std::size_t j = 0; j < lengths.size(); ++j) {
    if (lengths[j] < 1) {
      throw InvalidBlockStructure("block " + std::to_string(j) + " has length " + std::to_string(lengths[j]) +
                                  ", expected >= 1");
    }
    indices.push_back(indices.back() + lengths[j]);
  }
  return BlockStructure(std::move(indices), lengths);
}

BlockStructure BlockStructure::from_indices(const std::vector<int>& indices) {
  if (indices.size() < 2) throw InvalidBlockStructure("block index vector needs at least two entries");
  if (indices.front() != 0) throw InvalidBlockStructure("block index vector must start at 0");
  std::vector<int> lengths;
  lengths.reserve(indices.size() - 1);
  for (std::size_t j = 0; j + 1 < indices.size(); ++j) {
    if (indices[j + 1] <= indices[j]) {
      throw InvalidBlockStructure("block indices must be strictly increasing (position " + std::to_string(j + 1) +
                                  ")");
    }
    lengths.push_back(indices[j + 1] - indices[j]);
  }
  return BlockStructure(indices, std::move(lengths));
}

BlockStructure BlockStructure::unit(int N) {
  if (N < 1) throw InvalidBlockStructure("horizon must have at least one interval");
  return from_block_lengths(std::vector<int>(static_cast<std::size_t>(N), 1));
}

BlockStructure BlockStructure::uniform(int N, int M) {
  if (M < 1 || M > N) throw InvalidBlockStructure("uniform structure needs 1 <= M <= N");
  std::vector<int> lengths(static_cast<std::size_t>(M), N / M);
  for (int r = 0; r < N % M; ++r) lengths[static_cast<std::size_t>(M - 1 - r)] += 1;
  return from_block_lengths(lengths);
}

int BlockStructure::block_of(int k) const {
  if (k < 0 || k >= N()) {
    throw std::out_of_range("interval " + std::to_string(k) + " outside horizon [0, " + std::to_string(N()) + ")");
  }
  return block_of_[static_cast<std::size_t>(k)];
}

Matrix build_T(const BlockStructure& bs, int nu) {
  Matrix T = Matrix::Zero(bs.N() * nu, bs.M() * nu);
  for (int j = 0; j < bs.M(); ++j) {
    for (int k = bs.start(j); k < bs.end(j); ++k) {
      T.block(k * nu, j * nu, nu, nu).setIdentity();
    }
  }
  return T;
}

}  // namespace blockmpc
