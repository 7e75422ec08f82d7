#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "blockmpc/integrator.hpp"
#include "oracles.hpp"

using namespace blockmpc;

namespace {

Matrix mat1(double v) { return Matrix::Constant(1, 1, v); }
Vector vec1(double v) { return Vector::Constant(1, v); }

}  // namespace

TEST_CASE("frozen dynamics") {
  const Dynamics dyn = oracle::linear_dynamics(Matrix::Zero(2, 2), Matrix::Zero(2, 1));
  const Vector x = (Vector(2) << 1.5, -2.0).finished();
  const StepResult s = rk4_step(dyn, x, vec1(3.0), 0.1);
  CHECK(s.x == x);
  CHECK(s.A == Matrix::Identity(2, 2));
  CHECK(s.B.norm() == 0.0);
}

TEST_CASE("scalar decay matches the truncated exponential") {
  const Dynamics dyn = oracle::linear_dynamics(mat1(-1.0), mat1(0.0));
  const StepResult s = rk4_step(dyn, vec1(1.0), vec1(0.0), 0.1);
  double expected = 0.0, term = 1.0;
  for (int k = 0; k <= 4; ++k) {
    expected += term;
    term *= -0.1 / (k + 1);
  }
  CHECK(s.x[0] == doctest::Approx(expected).epsilon(1e-15));
  CHECK(s.x[0] == doctest::Approx(0.9048375).epsilon(1e-15));
  CHECK(s.A(0, 0) == doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("pure input integration is exact") {
  const Dynamics dyn = oracle::linear_dynamics(mat1(0.0), mat1(1.0));
  const StepResult s = rk4_step(dyn, vec1(0.0), vec1(2.0), 0.1);
  CHECK(s.A(0, 0) == 1.0);
  CHECK(s.B(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(s.x[0] == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("linear maps match the closed form") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial) {
    Matrix Ac(3, 3), Bc(3, 2);
    for (auto i = 0; i < Ac.size(); ++i) Ac.data()[i] = nd(rng);
    for (auto i = 0; i < Bc.size(); ++i) Bc.data()[i] = nd(rng);
    const Dynamics dyn = oracle::linear_dynamics(Ac, Bc);
    const Vector x = Vector::Random(3), u = Vector::Random(2);
    const double h = 0.05;
    const oracle::LinearRk4 cf = oracle::linear_rk4(Ac, Bc, h);
    const StepResult s = rk4_step(dyn, x, u, h);
    CHECK((s.A - cf.A).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.B - cf.B).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((s.x - (cf.A * x + cf.B * u)).cwiseAbs().maxCoeff() < 1e-12);

    SUBCASE("sub-steps compose like the semigroup") {
      const StepResult four = integrate_interval({h, 4}, dyn, x, u);
      const Matrix A4 = cf.A * cf.A * cf.A * cf.A;
      CHECK((four.A - A4).cwiseAbs().maxCoeff() < 1e-12);
      const StepResult a = rk4_step(dyn, x, u, h);
      const StepResult b = rk4_step(dyn, a.x, u, h);
      const StepResult two = integrate_interval({h, 2}, dyn, x, u);
      CHECK((two.x - b.x).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((two.A - b.A * a.A).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((two.B - (b.A * a.B + b.B)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("one sub-step equals a single rk4 step") {
  const Dynamics dyn = make_pendulum_dynamics(PendulumParams{});
  const Vector x = (Vector(4) << 0.1, 2.0, -0.3, 1.0).finished();
  const StepResult a = rk4_step(dyn, x, vec1(1.5), 0.025);
  const StepResult b = integrate_interval({0.025, 1}, dyn, x, vec1(1.5));
  CHECK(a.x == b.x);
  CHECK(a.A == b.A);
  CHECK(a.B == b.B);
}

TEST_CASE("pendulum interval sensitivities match finite differences") {
  const Dynamics dyn = make_pendulum_dynamics(PendulumParams{});
  const IntegratorConfig cfg{0.025, 3};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ux(-5.0, 5.0), uu(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    Vector x(4);
    for (int j = 0; j < 4; ++j) x[j] = ux(rng);
    const Vector u = vec1(uu(rng));
    const StepResult s = integrate_interval(cfg, dyn, x, u);
    const Matrix fx = oracle::fd_jacobian([&](const Vector& z) { return integrate_state(cfg, dyn, z, u); }, x);
    const Matrix fu = oracle::fd_jacobian([&](const Vector& v) { return integrate_state(cfg, dyn, x, v); }, u);
    CHECK(oracle::rel_err(s.A, fx) < 1e-6);
    CHECK(oracle::rel_err(s.B, fu) < 1e-6);
    CHECK((s.x - integrate_state(cfg, dyn, x, u)).norm() < 1e-13);
  }
}

TEST_CASE("halving the step reduces the nonlinear error at fourth order") {
  const Dynamics dyn = make_pendulum_dynamics(PendulumParams{});
  const Vector x = (Vector(4) << 0.0, 2.5, 0.5, -1.0).finished();
  const Vector u = vec1(3.0);
  const double T = 0.4;
  const Vector ref = integrate_state({T / 4096, 4096}, dyn, x, u);
  const double e1 = (integrate_state({T / 8, 8}, dyn, x, u) - ref).norm();
  const double e2 = (integrate_state({T / 16, 16}, dyn, x, u) - ref).norm();
  CHECK(e1 / e2 >= 15.0);
}

TEST_CASE("non-finite states raise IntegrationDiverged") {
  const Dynamics dyn = oracle::linear_dynamics(mat1(1.0), mat1(0.0));
  Vector x = vec1(std::numeric_limits<double>::quiet_NaN());
  try {
    (void)rk4_step(dyn, x, vec1(0.0), 0.1, 7);
    FAIL("expected IntegrationDiverged");
  } catch (const IntegrationDiverged& e) {
    CHECK(e.node() == 7);
  }
  CHECK_THROWS_AS((void)integrate_state({0.1, 1}, dyn, vec1(1e308), vec1(0.0)), IntegrationDiverged);
}

TEST_CASE("invalid integrator settings") {
  CHECK_THROWS(IntegratorConfig{0.0, 1}.validate());
  CHECK_THROWS(IntegratorConfig{0.1, 0}.validate());
}
