#include "blockmpc/bench.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "blockmpc/condensing.hpp"

namespace blockmpc {

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  }
  return m;
}

Vector random_vector(int n, std::mt19937_64& rng) { return random_matrix(n, 1, rng); }

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

}  // namespace

StageData random_stage_data(int nx, int nu, const BlockStructure& bs, std::mt19937_64& rng, int rows_per_node,
                            bool with_S) {
  const int N = bs.N();
  StageData sd;
  sd.nx = nx;
  sd.nu = nu;
  for (int k = 0; k < N; ++k) {
    Matrix A = random_matrix(nx, nx, rng);
    const double norm = Eigen::JacobiSVD<Matrix>(A).singularValues()(0);
    if (norm > 0.0) A *= 0.95 / norm;
    sd.A.push_back(std::move(A));
    sd.B.push_back(random_matrix(nx, nu, rng));
    sd.d.push_back(0.1 * random_vector(nx, rng));
  }
  for (int k = 0; k <= N; ++k) {
    // Joint stage Hessian [Q S; S' R] built PD so S never breaks convexity.
    const Matrix F = random_matrix(nx + nu, nx + nu, rng);
    Matrix H = F.transpose() * F / (nx + nu) + 0.1 * Matrix::Identity(nx + nu, nx + nu);
    sd.Q.push_back(H.topLeftCorner(nx, nx));
    sd.q.push_back(random_vector(nx, rng));
    if (k < N) {
      sd.R.push_back(H.bottomRightCorner(nu, nu));
      sd.S.push_back(with_S ? Matrix(H.topRightCorner(nx, nu)) : Matrix::Zero(nx, nu));
      sd.r.push_back(random_vector(nu, rng));
    }
    const int nr = k == 0 ? 0 : rows_per_node;
    const int cols = k < N ? nx + nu : nx;
    sd.C.push_back(random_matrix(nr, cols, rng));
    sd.c.push_back(random_vector(nr, rng) - Vector::Constant(nr, 2.0));
  }
  sd.dx0 = 0.1 * random_vector(nx, rng);
  std::uniform_real_distribution<double> half(0.5, 2.0);
  for (int j = 0; j < bs.M(); ++j) {
    Vector lo(nu), hi(nu);
    for (int i = 0; i < nu; ++i) {
      lo(i) = -half(rng);
      hi(i) = half(rng);
    }
    sd.du_lo.push_back(lo);
    sd.du_hi.push_back(hi);
  }
  return sd;
}

std::vector<BenchRow> bench_condensing(int nx, int nu, int M, const std::vector<int>& N_list, int reps,
                                       std::uint64_t seed) {
  if (nx < 1 || nu < 1 || reps < 1 || M < 0) throw std::invalid_argument("bench_condensing: invalid dimensions");
  using Clock = std::chrono::steady_clock;
  std::mt19937_64 rng(seed);
  std::vector<BenchRow> out;
  for (int N : N_list) {
    if (N < 1 || M > N) throw std::invalid_argument("bench_condensing: need 1 <= M <= N for every N");
    const BlockStructure bs = M == 0 ? BlockStructure::unit(N) : BlockStructure::uniform(N, M);
    const StageData sd = random_stage_data(nx, nu, bs, rng, 2);

    BenchRow row;
    row.N = N;
    row.M = bs.M();
    row.predicted = flop_count(ProblemDims{nx, nu, 0, 0}, bs);
    OpCounter tc, nc;
    condense(sd, bs, &tc);
    naive_condense(sd, bs, &nc);
    row.tailored_mults = tc.mults;
    row.naive_mults = nc.mults;

    std::vector<double> tt, tn;
    for (int r = 0; r < reps; ++r) {
      auto t0 = Clock::now();
      Condensed c = condense(sd, bs);
      tt.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      t0 = Clock::now();
      NaiveCondensing n = naive_condense(sd, bs);
      tn.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      if (c.qp.H.size() != n.qp.H.size()) throw std::logic_error("bench_condensing: pipelines disagree on size");
    }
    row.tailored_ms = median(tt);
    row.naive_ms = median(tn);
    out.push_back(row);
  }
  return out;
}

}  // namespace blockmpc
