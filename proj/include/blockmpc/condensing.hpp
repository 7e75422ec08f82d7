#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "blockmpc/blocking.hpp"
#include "blockmpc/qp_solver.hpp"
#include "blockmpc/shooting.hpp"

namespace blockmpc {

/// Scalar multiplication counter for instrumented kernels.
struct OpCounter {
  std::uint64_t mults = 0;

  void gemm(Eigen::Index m, Eigen::Index k, Eigen::Index n) { mults += static_cast<std::uint64_t>(m * k * n); }
};

/// dx_{k+1} = sum_j Ghat[k, j] du_j + L_k for k = 0..N-1, dx_0 = dx0.
///
/// Ghat is stored as one dense (N nx) x (M nu) matrix; cell (k, j) is the
/// nx x nu block at (k nx, j nu). Cells with k < I_j are zero.
struct SensitivityChain {
  int nx = 0;
  int nu = 0;
  Matrix Ghat;
  std::vector<Vector> L;

  int N() const { return static_cast<int>(L.size()); }
  auto cell(int k, int j) const { return Ghat.block(k * nx, j * nu, nx, nu); }
};

/// Identifies the stage-wise origin of a condensed inequality row.
struct RowRef {
  int node = 0;
  int row = 0;
};

/// Dense QP in the blocked input increments:
///   min 1/2 du' H du + g' du   s.t.  C du + c <= 0,  lb <= du <= ub.
struct CondensedQp : DenseQp {
  std::vector<RowRef> row_map;
};

struct CondensedConstraints {
  Matrix C;
  Vector c;
  Vector lb;
  Vector ub;
  std::vector<RowRef> row_map;
};

Matrix compute_Ghat(const StageData& sd, const BlockStructure& bs, OpCounter* counter = nullptr);

std::vector<Vector> compute_L(const StageData& sd, const Vector& dx0);

/// Reduced Hessian T' H_c T without forming T. The lower block triangle is
/// accumulated column by column with a backward W recursion, the upper
/// triangle is filled by symmetry.
Matrix compute_Hhat(const StageData& sd, const BlockStructure& bs, const Matrix& Ghat,
                    OpCounter* counter = nullptr);

Vector compute_ghat(const StageData& sd, const BlockStructure& bs, const Matrix& Ghat, const std::vector<Vector>& L);

CondensedConstraints condense_constraints(const StageData& sd, const BlockStructure& bs, const Matrix& Ghat,
                                          const std::vector<Vector>& L, const Vector& dx0);

struct Condensed {
  CondensedQp qp;
  SensitivityChain chain;
};

/// Tailored O(NM) condensing of the blocked stage-wise QP.
Condensed condense(const StageData& sd, const BlockStructure& bs, OpCounter* hessian_counter = nullptr);

/// Reference route: condense the unblocked problem in O(N^2) with an explicit
/// full G, then apply the explicit blocking matrix T.
struct NaiveCondensing {
  CondensedQp qp;
  Matrix G;     // (N nx) x (N nu), unblocked
  Matrix Ghat;  // G T
  std::vector<Vector> L;
  Matrix Hc;  // unblocked reduced Hessian
  Vector gc;
  Matrix Cc;
};

/// `counter` records the multiplications of the unblocked Hessian
/// condensing only (the part that scales with N^2).
NaiveCondensing naive_condense(const StageData& sd, const BlockStructure& bs, OpCounter* counter = nullptr);

/// State increments dx_0..dx_N for a given blocked input increment.
std::vector<Vector> expand(const SensitivityChain& chain, const Vector& dx0, const Vector& du);

/// Leading-order multiplication count of compute_Hhat: N M nx^2 nu + N M nx nu^2.
/// The instrumented kernel performs about 2 * sum_i (N - I_i) (nx^2 nu + nx nu^2).
std::uint64_t flop_count(const ProblemDims& dims, const BlockStructure& bs);

/// Text matrix format: "rows cols" header line, then one whitespace-separated row per line.
void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);
void dump_condensed_qp(const CondensedQp& qp, const std::filesystem::path& dir);

}  // namespace blockmpc
