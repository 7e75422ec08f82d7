#include "blockmpc/condensing.hpp"

#include <fstream>
#include <iomanip>
#include <locale>
#include <sstream>
#include <stdexcept>

namespace blockmpc {

namespace {

void check_consistent(const StageData& sd, const BlockStructure& bs) {
  if (sd.N() != bs.N() || sd.M() != bs.M()) {
    throw std::invalid_argument("condensing: stage data does not match block structure");
  }
}

}  // namespace

Matrix compute_Ghat(const StageData& sd, const BlockStructure& bs, OpCounter* counter) {
  check_consistent(sd, bs);
  const int N = bs.N();
  const int M = bs.M();
  const int nx = sd.nx;
  const int nu = sd.nu;
  Matrix G = Matrix::Zero(N * nx, M * nu);

  for (int i = 0; i < M; ++i) {
    const int first = bs.start(i);
    const int next = bs.end(i);
    G.block(first * nx, i * nu, nx, nu) = sd.B[static_cast<std::size_t>(first)];
    for (int j = first + 1; j < N; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      auto cur = G.block(j * nx, i * nu, nx, nu);
      cur.noalias() = sd.A[jj] * G.block((j - 1) * nx, i * nu, nx, nu);
      if (j < next) cur += sd.B[jj];
      if (counter) counter->gemm(nx, nx, nu);
    }
  }
  return G;
}

std::vector<Vector> compute_L(const StageData& sd, const Vector& dx0) {
  const int N = sd.N();
  std::vector<Vector> L(static_cast<std::size_t>(N));
  Vector prev = dx0;
  for (int k = 0; k < N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    L[kk] = sd.d[kk];
    L[kk].noalias() += sd.A[kk] * prev;
    prev = L[kk];
  }
  return L;
}

Matrix compute_Hhat(const StageData& sd, const BlockStructure& bs, const Matrix& Ghat, OpCounter* counter) {
  check_consistent(sd, bs);
  const int N = bs.N();
  const int M = bs.M();
  const int nx = sd.nx;
  const int nu = sd.nu;
  Matrix H = Matrix::Zero(M * nu, M * nu);
  Matrix W(nx, nu), Wnext(nx, nu), Htmp(nu, nu), SG(nu, nu);

  auto G = [&](int k, int i) { return Ghat.block(k * nx, i * nu, nx, nu); };
  auto count = [&](Eigen::Index m, Eigen::Index k, Eigen::Index n) {
    if (counter) counter->gemm(m, k, n);
  };

  for (int i = 0; i < M; ++i) {
    const int first = bs.start(i);
    W.noalias() = sd.Q[static_cast<std::size_t>(N)] * G(N - 1, i);
    count(nx, nx, nu);
    // Row block k of H_tmp lands in row block block_of(k) of Hhat.
    for (int k = N - 1; k >= first + 1; --k) {
      const auto kk = static_cast<std::size_t>(k);
      SG.noalias() = sd.S[kk].transpose() * G(k - 1, i);
      Htmp = SG;
      Htmp.noalias() += sd.B[kk].transpose() * W;
      count(nu, nx, nu);
      count(nu, nx, nu);
      const int row = bs.block_of(k);
      H.block(row * nu, i * nu, nu, nu) += Htmp;
      // The cross term dx_k' S_k du_i appears twice on the diagonal block.
      if (row == i) H.block(i * nu, i * nu, nu, nu) += SG.transpose();

      Wnext.noalias() = sd.Q[kk] * G(k - 1, i);
      Wnext.noalias() += sd.A[kk].transpose() * W;
      count(nx, nx, nu);
      count(nx, nx, nu);
      W.swap(Wnext);
    }
    H.block(i * nu, i * nu, nu, nu).noalias() += sd.B[static_cast<std::size_t>(first)].transpose() * W;
    count(nu, nx, nu);
  }

  Matrix Rsum = Matrix::Zero(nu, nu);
  int blk = 0;
  for (int k = 0; k < N; ++k) {
    Rsum += sd.R[static_cast<std::size_t>(k)];
    if (k + 1 == bs.end(blk)) {
      H.block(blk * nu, blk * nu, nu, nu) += Rsum;
      Rsum.setZero();
      ++blk;
    }
  }

  H.triangularView<Eigen::StrictlyUpper>() = H.transpose();
  return H;
}

Vector compute_ghat(const StageData& sd, const BlockStructure& bs, const Matrix& Ghat, const std::vector<Vector>& L) {
  check_consistent(sd, bs);
  (void)Ghat;  // the backward sweep needs only A, B and L
  const int N = bs.N();
  const int nu = sd.nu;
  Vector g = Vector::Zero(bs.M() * nu);

  // w_{k+1} = d(cost of nodes k+1..N)/d(dx_{k+1}) evaluated at du = 0.
  Vector w = sd.q[static_cast<std::size_t>(N)];
  w.noalias() += sd.Q[static_cast<std::size_t>(N)] * L[static_cast<std::size_t>(N - 1)];
  for (int k = N - 1; k >= 0; --k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vector& dxk = (k == 0) ? sd.dx0 : L[kk - 1];
    auto gj = g.segment(bs.block_of(k) * nu, nu);
    gj += sd.r[kk];
    gj.noalias() += sd.B[kk].transpose() * w;
    gj.noalias() += sd.S[kk].transpose() * dxk;
    if (k > 0) {
      Vector wk = sd.q[kk];
      wk.noalias() += sd.Q[kk] * dxk;
      wk.noalias() += sd.A[kk].transpose() * w;
      w = std::move(wk);
    }
  }
  return g;
}

CondensedConstraints condense_constraints(const StageData& sd, const BlockStructure& bs, const Matrix& Ghat,
                                          const std::vector<Vector>& L, const Vector& dx0) {
  check_consistent(sd, bs);
  const int N = bs.N();
  const int nx = sd.nx;
  const int nu = sd.nu;
  const int n = bs.M() * nu;

  CondensedConstraints out;
  const int rows = sd.total_rows();
  out.C = Matrix::Zero(rows, n);
  out.c.resize(rows);
  out.row_map.reserve(static_cast<std::size_t>(rows));

  int r = 0;
  for (int k = 0; k <= N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int nr = sd.rows(k);
    if (nr == 0) continue;
    const auto Cx = sd.C[kk].leftCols(nx);
    const Vector& dxk = (k == 0) ? dx0 : L[kk - 1];
    out.c.segment(r, nr) = sd.c[kk];
    out.c.segment(r, nr).noalias() += Cx * dxk;
    if (k >= 1) {
      // Only blocks that start before node k influence dx_k.
      const int last = bs.block_of(k - 1);
      for (int j = 0; j <= last; ++j) {
        out.C.block(r, j * nu, nr, nu).noalias() = Cx * Ghat.block((k - 1) * nx, j * nu, nx, nu);
      }
    }
    if (k < N) out.C.block(r, bs.block_of(k) * nu, nr, nu) += sd.C[kk].rightCols(nu);
    for (int i = 0; i < nr; ++i) out.row_map.push_back({k, i});
    r += nr;
  }

  out.lb.resize(n);
  out.ub.resize(n);
  for (int j = 0; j < bs.M(); ++j) {
    out.lb.segment(j * nu, nu) = sd.du_lo[static_cast<std::size_t>(j)];
    out.ub.segment(j * nu, nu) = sd.du_hi[static_cast<std::size_t>(j)];
  }
  return out;
}

Condensed condense(const StageData& sd, const BlockStructure& bs, OpCounter* hessian_counter) {
  Condensed out;
  out.chain.nx = sd.nx;
  out.chain.nu = sd.nu;
  out.chain.Ghat = compute_Ghat(sd, bs);
  out.chain.L = compute_L(sd, sd.dx0);
  out.qp.H = compute_Hhat(sd, bs, out.chain.Ghat, hessian_counter);
  out.qp.g = compute_ghat(sd, bs, out.chain.Ghat, out.chain.L);
  CondensedConstraints cc = condense_constraints(sd, bs, out.chain.Ghat, out.chain.L, sd.dx0);
  out.qp.C = std::move(cc.C);
  out.qp.c = std::move(cc.c);
  out.qp.lb = std::move(cc.lb);
  out.qp.ub = std::move(cc.ub);
  out.qp.row_map = std::move(cc.row_map);
  return out;
}

NaiveCondensing naive_condense(const StageData& sd, const BlockStructure& bs, OpCounter* counter) {
  check_consistent(sd, bs);
  const int N = bs.N();
  const int nx = sd.nx;
  const int nu = sd.nu;
  NaiveCondensing out;

  // Full lower block-triangular G of the unblocked problem.
  out.G = Matrix::Zero(N * nx, N * nu);
  for (int l = 0; l < N; ++l) {
    out.G.block(l * nx, l * nu, nx, nu) = sd.B[static_cast<std::size_t>(l)];
    for (int k = l + 1; k < N; ++k) {
      out.G.block(k * nx, l * nu, nx, nu).noalias() =
          sd.A[static_cast<std::size_t>(k)] * out.G.block((k - 1) * nx, l * nu, nx, nu);
    }
  }

  out.L = compute_L(sd, sd.dx0);

  // Unblocked reduced Hessian by the standard O(N^2) backward recursion.
  out.Hc = Matrix::Zero(N * nu, N * nu);
  Matrix W(nx, nu), Wn(nx, nu);
  for (int l = 0; l < N; ++l) {
    W.noalias() = sd.Q[static_cast<std::size_t>(N)] * out.G.block((N - 1) * nx, l * nu, nx, nu);
    if (counter) counter->gemm(nx, nx, nu);
    for (int k = N - 1; k > l; --k) {
      const auto kk = static_cast<std::size_t>(k);
      const auto Gprev = out.G.block((k - 1) * nx, l * nu, nx, nu);
      auto Hkl = out.Hc.block(k * nu, l * nu, nu, nu);
      Hkl.noalias() = sd.S[kk].transpose() * Gprev;
      Hkl.noalias() += sd.B[kk].transpose() * W;
      Wn.noalias() = sd.Q[kk] * Gprev;
      Wn.noalias() += sd.A[kk].transpose() * W;
      W.swap(Wn);
      if (counter) {
        counter->gemm(nu, nx, nu);
        counter->gemm(nu, nx, nu);
        counter->gemm(nx, nx, nu);
        counter->gemm(nx, nx, nu);
      }
    }
    out.Hc.block(l * nu, l * nu, nu, nu).noalias() = sd.B[static_cast<std::size_t>(l)].transpose() * W;
    out.Hc.block(l * nu, l * nu, nu, nu) += sd.R[static_cast<std::size_t>(l)];
    if (counter) counter->gemm(nu, nx, nu);
  }
  out.Hc.triangularView<Eigen::StrictlyUpper>() = out.Hc.transpose();

  // Gradient from explicit products with G.
  Vector v(N * nx);
  for (int k = 0; k < N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    v.segment(k * nx, nx) = sd.q[kk + 1] + sd.Q[kk + 1] * out.L[kk];
  }
  out.gc = out.G.transpose() * v;
  for (int k = 0; k < N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const Vector& dxk = (k == 0) ? sd.dx0 : out.L[kk - 1];
    out.gc.segment(k * nu, nu) += sd.r[kk] + sd.S[kk].transpose() * dxk;
  }

  // Unblocked constraint rows, node by node.
  const int rows = sd.total_rows();
  out.Cc = Matrix::Zero(rows, N * nu);
  out.qp.c.resize(rows);
  int r = 0;
  for (int k = 0; k <= N; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const int nr = sd.rows(k);
    if (nr == 0) continue;
    const auto Cx = sd.C[kk].leftCols(nx);
    if (k >= 1) out.Cc.block(r, 0, nr, N * nu) = Cx * out.G.middleRows((k - 1) * nx, nx);
    if (k < N) out.Cc.block(r, k * nu, nr, nu) += sd.C[kk].rightCols(nu);
    out.qp.c.segment(r, nr) = sd.c[kk] + Cx * ((k == 0) ? sd.dx0 : out.L[kk - 1]);
    for (int i = 0; i < nr; ++i) out.qp.row_map.push_back({k, i});
    r += nr;
  }

  const Matrix T = build_T(bs, nu);
  out.Ghat = out.G * T;
  out.qp.H = T.transpose() * out.Hc * T;
  out.qp.g = T.transpose() * out.gc;
  out.qp.C = out.Cc * T;
  out.qp.lb.resize(bs.M() * nu);
  out.qp.ub.resize(bs.M() * nu);
  for (int j = 0; j < bs.M(); ++j) {
    out.qp.lb.segment(j * nu, nu) = sd.du_lo[static_cast<std::size_t>(j)];
    out.qp.ub.segment(j * nu, nu) = sd.du_hi[static_cast<std::size_t>(j)];
  }
  return out;
}

std::vector<Vector> expand(const SensitivityChain& chain, const Vector& dx0, const Vector& du) {
  const int N = chain.N();
  if (du.size() != chain.Ghat.cols()) throw std::invalid_argument("expand: increment has wrong size");
  std::vector<Vector> dx;
  dx.reserve(static_cast<std::size_t>(N) + 1);
  dx.push_back(dx0);
  const Vector stacked = chain.Ghat * du;
  for (int k = 0; k < N; ++k) {
    dx.push_back(stacked.segment(k * chain.nx, chain.nx) + chain.L[static_cast<std::size_t>(k)]);
  }
  return dx;
}

std::uint64_t flop_count(const ProblemDims& dims, const BlockStructure& bs) {
  const auto NM = static_cast<std::uint64_t>(bs.N()) * static_cast<std::uint64_t>(bs.M());
  const auto nx = static_cast<std::uint64_t>(dims.nx);
  const auto nu = static_cast<std::uint64_t>(dims.nu);
  return NM * nx * nx * nu + NM * nx * nu * nu;
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.imbue(std::locale::classic());
  os << m.rows() << ' ' << m.cols() << '\n' << std::setprecision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? " " : "") << m(i, j);
    os << '\n';
  }
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Matrix read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  is.imbue(std::locale::classic());
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> rows >> cols) || rows < 0 || cols < 0) throw std::runtime_error("bad matrix header in " + path.string());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(is >> m(i, j))) throw std::runtime_error("truncated matrix data in " + path.string());
    }
  }
  return m;
}

void dump_condensed_qp(const CondensedQp& qp, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "H.txt", qp.H);
  write_matrix(dir / "g.txt", qp.g);
  write_matrix(dir / "C.txt", qp.C);
  write_matrix(dir / "c.txt", qp.c);
  write_matrix(dir / "lb.txt", qp.lb);
  write_matrix(dir / "ub.txt", qp.ub);
}

}  // namespace blockmpc
