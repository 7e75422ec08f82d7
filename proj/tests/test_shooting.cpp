#include <doctest.h>

#include <numbers>
#include <random>

#include "blockmpc/shooting.hpp"
#include "oracles.hpp"

using namespace blockmpc;

namespace {

QuadraticCost unit_cost(int nx, int nu) {
  QuadraticCost c;
  c.Q = Matrix::Identity(nx, nx);
  c.R = Matrix::Identity(nu, nu);
  c.QN = Matrix::Identity(nx, nx);
  return c;
}

ShootingProblem single_integrator(int N, double Ts) {
  return ShootingProblem::uniform(oracle::linear_dynamics(Matrix::Zero(1, 1), Matrix::Identity(1, 1)),
                                  unit_cost(1, 1), StageBounds::unbounded(1, 1), Ts, N);
}

ShootingProblem pendulum_problem(int N) {
  QuadraticCost cost;
  cost.Q = Vector((Vector(4) << 10, 10, 0.1, 0.1).finished()).asDiagonal();
  cost.R = Matrix::Constant(1, 1, 0.01);
  cost.QN = cost.Q;
  StageBounds b = StageBounds::unbounded(4, 1);
  b.x_lo[0] = -2.0;
  b.x_hi[0] = 2.0;
  b.u_lo[0] = -20.0;
  b.u_hi[0] = 20.0;
  return ShootingProblem::uniform(make_pendulum_dynamics(PendulumParams{}), cost, b, 0.025, N);
}

Vector vec1(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("forward simulation") {
  SUBCASE("zero dynamics hold the initial state") {
    ShootingProblem p = ShootingProblem::uniform(oracle::linear_dynamics(Matrix::Zero(2, 2), Matrix::Zero(2, 1)),
                                                 unit_cost(2, 1), StageBounds::unbounded(2, 1), 0.1, 5);
    const Vector x0 = (Vector(2) << 1.0, -1.0).finished();
    const Trajectory t = forward_simulate(p, BlockStructure::unit(5), x0, std::vector<Vector>(5, vec1(3.0)));
    REQUIRE(t.xs.size() == 6);
    for (const Vector& x : t.xs) CHECK(x == x0);
  }

  SUBCASE("pendulum hangs still at the downward equilibrium") {
    const ShootingProblem p = pendulum_problem(10);
    const Vector x0 = (Vector(4) << 0, std::numbers::pi, 0, 0).finished();
    const BlockStructure bs = BlockStructure::from_block_lengths({3, 7});
    const Trajectory t = forward_simulate(p, bs, x0, {vec1(0.0), vec1(0.0)});
    for (const Vector& x : t.xs) CHECK((x - x0).norm() < 1e-14);
  }

  SUBCASE("blocked single integrator") {
    const ShootingProblem p = single_integrator(3, 1.0);
    const BlockStructure bs = BlockStructure::from_block_lengths({2, 1});
    const Trajectory t = forward_simulate(p, bs, vec1(0.0), {vec1(1.0), vec1(-1.0)});
    REQUIRE(t.xs.size() == 4);
    CHECK(t.xs[0][0] == 0.0);
    CHECK(t.xs[1][0] == doctest::Approx(1.0));
    CHECK(t.xs[2][0] == doctest::Approx(2.0));
    CHECK(t.xs[3][0] == doctest::Approx(1.0));
  }
}

TEST_CASE("evaluate at a simulated trajectory has zero residuals") {
  const ShootingProblem p = pendulum_problem(20);
  const BlockStructure bs = BlockStructure::from_block_lengths({1, 2, 3, 4, 10});
  std::vector<Vector> us{vec1(5.0), vec1(-3.0), vec1(1.0), vec1(0.5), vec1(-2.0)};
  const Vector x0 = (Vector(4) << 0.1, 2.8, 0.0, 0.3).finished();
  const Trajectory t = forward_simulate(p, bs, x0, us);
  const StageData sd = evaluate(p, bs, t, x0);

  CHECK(sd.N() == 20);
  CHECK(sd.M() == 5);
  CHECK(sd.A.size() == 20);
  CHECK(sd.Q.size() == 21);
  CHECK(sd.C.size() == 21);
  CHECK(sd.dx0.norm() == 0.0);
  for (const Vector& d : sd.d) CHECK(d.lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(sd.rows(0) == 0);
  for (int k = 1; k <= 20; ++k) CHECK(sd.rows(k) == 2);
  CHECK(sd.total_rows() == 40);
  for (int j = 0; j < bs.M(); ++j) {
    CHECK(sd.du_lo[j][0] == doctest::Approx(-20.0 - us[j][0]));
    CHECK(sd.du_hi[j][0] == doctest::Approx(20.0 - us[j][0]));
  }
}

TEST_CASE("every interval of a block sees the block's input") {
  ShootingProblem p = pendulum_problem(6);
  std::vector<double> seen;
  auto inner = p.dynamics.rhs;
  p.dynamics.rhs = [&seen, inner](const Vector& x, const Vector& u) {
    seen.push_back(u[0]);
    return inner(x, u);
  };
  const BlockStructure bs = BlockStructure::from_block_lengths({2, 4});
  const Vector x0 = (Vector(4) << 0, 3.0, 0, 0).finished();
  const Trajectory t = forward_simulate(p, bs, x0, {vec1(1.0), vec1(2.0)});
  seen.clear();
  (void)evaluate(p, bs, t, x0);
  // four RK4 stages per interval; the first two intervals belong to block 0
  REQUIRE(seen.size() == 24);
  for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == (i < 8 ? 1.0 : 2.0));
}

TEST_CASE("unit blocks reproduce the unblocked evaluation") {
  const ShootingProblem p = pendulum_problem(8);
  const BlockStructure unit = BlockStructure::unit(8);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd;
  Trajectory t;
  for (int k = 0; k <= 8; ++k) t.xs.push_back(Vector::Random(4));
  for (int k = 0; k < 8; ++k) t.us.push_back(vec1(nd(rng)));
  const Vector x0 = Vector::Random(4);
  const StageData sd = evaluate(p, unit, t, x0);
  for (int k = 0; k < 8; ++k) {
    const StepResult s = integrate_interval(p.intervals[k], p.dynamics, t.xs[k], t.us[k]);
    CHECK(sd.A[k] == s.A);
    CHECK(sd.B[k] == s.B);
    CHECK(sd.d[k] == s.x - t.xs[k + 1]);
  }
  CHECK(sd.dx0 == x0 - t.xs[0]);
}

TEST_CASE("single integrator with one block of two") {
  const ShootingProblem p = single_integrator(2, 1.0);
  const BlockStructure bs = BlockStructure::from_block_lengths({2});
  const Trajectory t = forward_simulate(p, bs, vec1(0.0), {vec1(0.5)});
  const StageData sd = evaluate(p, bs, t, vec1(0.0));
  for (int k = 0; k < 2; ++k) {
    CHECK(sd.A[k](0, 0) == doctest::Approx(1.0));
    CHECK(sd.B[k](0, 0) == doctest::Approx(1.0));
    CHECK(std::abs(sd.d[k][0]) < 1e-15);
  }
}

TEST_CASE("stage weights scale the stage cost only") {
  ShootingProblem p = single_integrator(2, 1.0);
  p.stage_weights = {3.0, 5.0};
  const BlockStructure bs = BlockStructure::unit(2);
  Trajectory t{{vec1(1.0), vec1(1.0), vec1(1.0)}, {vec1(0.0), vec1(0.0)}};
  const StageData sd = evaluate(p, bs, t, vec1(1.0));
  CHECK(sd.Q[0](0, 0) == 3.0);
  CHECK(sd.Q[1](0, 0) == 5.0);
  CHECK(sd.R[1](0, 0) == 5.0);
  CHECK(sd.Q[2](0, 0) == 1.0);
  CHECK(sd.q[1][0] == 5.0);
}

TEST_CASE("malformed trajectories are rejected") {
  const ShootingProblem p = single_integrator(3, 1.0);
  const BlockStructure bs = BlockStructure::from_block_lengths({1, 2});
  Trajectory t{{vec1(0), vec1(0), vec1(0)}, {vec1(0), vec1(0)}};
  CHECK_THROWS(evaluate(p, bs, t, vec1(0)));
  CHECK_THROWS(forward_simulate(p, bs, vec1(0), {vec1(0)}));
}
