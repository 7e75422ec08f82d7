#include <doctest.h>

#include <algorithm>
#include <random>
#include <stdexcept>

#include "blockmpc/blocking.hpp"
#include "oracles.hpp"

using namespace blockmpc;

namespace {

const std::vector<int> kReferenceLengths{1, 2, 3, 4, 5, 5, 15, 15, 15, 15};
const std::vector<int> kReferenceIndices{0, 1, 3, 6, 10, 15, 20, 35, 50, 65, 80};

}  // namespace

TEST_CASE("index vectors from block lengths") {
  CHECK(BlockStructure::from_block_lengths(kReferenceLengths).indices() == kReferenceIndices);
  CHECK(BlockStructure::from_block_lengths({1, 1, 1}).indices() == std::vector<int>{0, 1, 2, 3});
  const BlockStructure single = BlockStructure::from_block_lengths({80});
  CHECK(single.indices() == std::vector<int>{0, 80});
  CHECK(single.M() == 1);
  CHECK(single.N() == 80);
}

TEST_CASE("invalid structures are rejected") {
  CHECK_THROWS_AS(BlockStructure::from_block_lengths({}), InvalidBlockStructure);
  CHECK_THROWS_AS(BlockStructure::from_block_lengths({2, 0, 1}), InvalidBlockStructure);
  CHECK_THROWS_AS(BlockStructure::from_block_lengths({-1, 3}), InvalidBlockStructure);
  CHECK_THROWS_AS(BlockStructure::from_indices({1, 3}), InvalidBlockStructure);
  CHECK_THROWS_AS(BlockStructure::from_indices({0, 3, 3, 5}), InvalidBlockStructure);
  CHECK_THROWS_AS(BlockStructure::from_indices({0}), InvalidBlockStructure);
  CHECK_THROWS_AS(BlockStructure::unit(0), InvalidBlockStructure);
}

TEST_CASE("block lookup") {
  const BlockStructure bs = BlockStructure::from_block_lengths(kReferenceLengths);
  CHECK(bs.block_of(0) == 0);
  CHECK(bs.block_of(34) == 6);
  CHECK(bs.block_of(35) == 7);
  CHECK(bs.block_of(79) == 9);
  CHECK_THROWS_AS((void)bs.block_of(80), std::out_of_range);
  CHECK_THROWS_AS((void)bs.block_of(-1), std::out_of_range);
  for (int k = 0; k < bs.N(); ++k) {
    const auto it = std::upper_bound(kReferenceIndices.begin(), kReferenceIndices.end(), k);
    CHECK(bs.block_of(k) == static_cast<int>(it - kReferenceIndices.begin()) - 1);
  }
}

TEST_CASE("uniform and unit structures") {
  CHECK(BlockStructure::unit(4).indices() == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(BlockStructure::unit(4).is_unit());
  const BlockStructure u = BlockStructure::uniform(80, 10);
  CHECK(u.M() == 10);
  CHECK(u.length(0) == 8);
  const BlockStructure v = BlockStructure::uniform(10, 4);
  CHECK(v.lengths() == std::vector<int>{2, 2, 3, 3});
  CHECK_THROWS_AS(BlockStructure::uniform(3, 4), InvalidBlockStructure);
}

TEST_CASE("explicit blocking matrix") {
  CHECK(build_T(BlockStructure::unit(5), 1) == Matrix::Identity(5, 5));

  Matrix expected(3, 2);
  expected << 1, 0, 1, 0, 0, 1;
  CHECK(build_T(BlockStructure::from_block_lengths({2, 1}), 1) == expected);

  const Matrix T2 = build_T(BlockStructure::from_block_lengths({2}), 2);
  Matrix kron(4, 2);
  kron << 1, 0, 0, 1, 1, 0, 0, 1;
  CHECK(T2 == kron);
}

TEST_CASE("blocking matrix structure on random partitions") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const int N = 1 + trial % 20;
    const int nu = 1 + trial % 3;
    const BlockStructure bs = oracle::random_blocks(N, rng);
    const Matrix T = build_T(bs, nu);
    REQUIRE(T.rows() == N * nu);
    REQUIRE(T.cols() == bs.M() * nu);

    Matrix gram = Matrix::Zero(bs.M() * nu, bs.M() * nu);
    for (int j = 0; j < bs.M(); ++j) gram.block(j * nu, j * nu, nu, nu) = bs.length(j) * Matrix::Identity(nu, nu);
    CHECK(T.transpose() * T == gram);

    for (int k = 0; k < N; ++k) {
      for (int j = 0; j < bs.M(); ++j) {
        const Matrix cell = T.block(k * nu, j * nu, nu, nu);
        if (j == bs.block_of(k)) {
          CHECK(cell == Matrix::Identity(nu, nu));
        } else {
          CHECK(cell.norm() == 0.0);
        }
      }
    }

    CHECK(BlockStructure::from_block_lengths(bs.lengths()) == bs);
    CHECK(BlockStructure::from_indices(bs.indices()) == bs);
  }
}
