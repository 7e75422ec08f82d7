#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <random>

#include "blockmpc/bench.hpp"
#include "blockmpc/closed_loop.hpp"
#include "blockmpc/condensing.hpp"
#include "blockmpc/config.hpp"
#include "blockmpc/integrator.hpp"
#include "blockmpc/model.hpp"
#include "blockmpc/outputs.hpp"
#include "blockmpc/qp_solver.hpp"

namespace py = pybind11;
using namespace blockmpc;

namespace {

PendulumParams params_of(double m1, double m2, double l, double g) {
  PendulumParams p{m1, m2, l, g};
  p.validate();
  return p;
}

py::dict log_to_dict(const SimLog& log) {
  const auto n = static_cast<Eigen::Index>(log.samples.size());
  const int nx = log.nx() > 0 ? log.nx() : 4;
  const int nu = log.nu() > 0 ? log.nu() : 1;
  Vector t(n), kkt(n), total_ms(n), condensing_ms(n);
  Matrix x(n, nx), u(n, nu);
  std::vector<int> iters;
  for (Eigen::Index i = 0; i < n; ++i) {
    const SampleRecord& r = log.samples[static_cast<std::size_t>(i)];
    t[i] = r.t;
    x.row(i) = r.x.transpose();
    u.row(i) = r.u.transpose();
    kkt[i] = r.kkt.total;
    total_ms[i] = r.timings.total_ms;
    condensing_ms[i] = r.timings.condensing_ms;
    iters.push_back(r.qp_iterations);
  }
  py::dict d;
  d["scheme"] = to_string(log.scheme);
  d["indices"] = log.indices;
  d["t"] = t;
  d["x"] = x;
  d["u"] = u;
  d["kkt"] = kkt;
  d["condensing_ms"] = condensing_ms;
  d["total_ms"] = total_ms;
  d["qp_iterations"] = iters;
  d["error"] = log.error ? py::cast(*log.error) : py::none();
  return d;
}

SchemeConfig config_from(const std::string& text, const std::string& scheme, double sim_time) {
  SchemeConfig cfg = parse_config(text, "<python>");
  if (!scheme.empty()) cfg.scheme = parse_scheme(scheme);
  if (sim_time >= 0.0) cfg.sim_time = sim_time;
  cfg.validate();
  return cfg;
}

}  // namespace

PYBIND11_MODULE(_blockmpc, m) {
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<InvalidBlockStructure>(m, "InvalidBlockStructure", PyExc_ValueError);
  py::register_exception<IntegrationDiverged>(m, "IntegrationDiverged", PyExc_ArithmeticError);

  m.def(
      "pendulum_rhs",
      [](const Vector& x, double u, double m1, double m2, double l, double g) {
        return pendulum_rhs(x, u, params_of(m1, m2, l, g));
      },
      py::arg("x"), py::arg("u"), py::arg("m1") = 0.1, py::arg("m2") = 1.0, py::arg("l") = 0.8,
      py::arg("g") = 9.81);

  m.def(
      "pendulum_jacobians",
      [](const Vector& x, double u, double m1, double m2, double l, double g) {
        const Jacobians J = pendulum_jacobians(x, u, params_of(m1, m2, l, g));
        return py::make_tuple(J.dfdx, J.dfdu);
      },
      py::arg("x"), py::arg("u"), py::arg("m1") = 0.1, py::arg("m2") = 1.0, py::arg("l") = 0.8,
      py::arg("g") = 9.81);

  m.def(
      "integrate_pendulum",
      [](const Vector& x, const Vector& u, double h, int n_sub) {
        const IntegratorConfig cfg{h, n_sub};
        cfg.validate();
        const StepResult s = integrate_interval(cfg, make_pendulum_dynamics(PendulumParams{}), x, u);
        return py::make_tuple(s.x, s.A, s.B);
      },
      py::arg("x"), py::arg("u"), py::arg("h") = 0.025, py::arg("n_sub") = 1,
      "End state and exact RK4 sensitivities (x_end, A, B) of the default pendulum.");

  py::class_<BlockStructure>(m, "BlockStructure")
      .def_static("from_block_lengths", &BlockStructure::from_block_lengths)
      .def_static("from_indices", &BlockStructure::from_indices)
      .def_static("unit", &BlockStructure::unit)
      .def_static("uniform", &BlockStructure::uniform)
      .def_property_readonly("N", &BlockStructure::N)
      .def_property_readonly("M", &BlockStructure::M)
      .def_property_readonly("indices", &BlockStructure::indices)
      .def_property_readonly("lengths", &BlockStructure::lengths)
      .def("block_of", &BlockStructure::block_of)
      .def("__eq__", [](const BlockStructure& a, const BlockStructure& b) { return a == b; })
      .def("__repr__", [](const BlockStructure& b) {
        std::string s = "BlockStructure([";
        for (std::size_t i = 0; i < b.indices().size(); ++i) s += (i ? ", " : "") + std::to_string(b.indices()[i]);
        return s + "])";
      });

  m.def("build_T", &build_T, py::arg("bs"), py::arg("nu") = 1);

  m.def(
      "flop_count",
      [](int nx, int nu, const BlockStructure& bs) { return flop_count(ProblemDims{nx, nu, 0, 0}, bs); },
      py::arg("nx"), py::arg("nu"), py::arg("bs"));

  m.def(
      "condense_random",
      [](int nx, int nu, const BlockStructure& bs, std::uint64_t seed, int rows_per_node) {
        std::mt19937_64 rng(seed);
        const StageData sd = random_stage_data(nx, nu, bs, rng, rows_per_node);
        const Condensed c = condense(sd, bs);
        const NaiveCondensing n = naive_condense(sd, bs);
        py::dict tailored, naive;
        tailored["Ghat"] = c.chain.Ghat;
        tailored["H"] = c.qp.H;
        tailored["g"] = c.qp.g;
        tailored["C"] = c.qp.C;
        tailored["c"] = c.qp.c;
        naive["Ghat"] = n.Ghat;
        naive["H"] = n.qp.H;
        naive["g"] = n.qp.g;
        naive["C"] = n.qp.C;
        naive["c"] = n.qp.c;
        return py::make_tuple(tailored, naive);
      },
      py::arg("nx"), py::arg("nu"), py::arg("bs"), py::arg("seed") = 0, py::arg("rows_per_node") = 0,
      "Condenses random stage data with both pipelines; returns (tailored, naive) dicts.");

  m.def(
      "solve_qp",
      [](const Matrix& H, const Vector& g, std::optional<Matrix> C, std::optional<Vector> c, std::optional<Vector> lb,
         std::optional<Vector> ub, double tol) {
        const auto n = g.size();
        const double inf = kInfinity;
        DenseQp qp{H,
                   g,
                   C ? *C : Matrix(0, n),
                   c ? *c : Vector(0),
                   lb ? *lb : Vector::Constant(n, -inf),
                   ub ? *ub : Vector::Constant(n, inf)};
        QpOptions opt;
        opt.tol = tol;
        const QpSolution s = solve_qp(qp, nullptr, opt);
        py::dict d;
        d["z"] = s.z;
        d["lambda_rows"] = s.lambda_rows;
        d["lambda_lower"] = s.lambda_lower;
        d["lambda_upper"] = s.lambda_upper;
        d["iterations"] = s.iterations;
        d["objective"] = s.objective;
        d["status"] = to_string(s.status);
        return d;
      },
      py::arg("H"), py::arg("g"), py::arg("C") = py::none(), py::arg("c") = py::none(), py::arg("lb") = py::none(),
      py::arg("ub") = py::none(), py::arg("tol") = 1e-8,
      "min 1/2 z'Hz + g'z  s.t.  C z + c <= 0, lb <= z <= ub.");

  m.def(
      "simulate",
      [](const std::string& config, const std::string& scheme, double sim_time) {
        const SchemeConfig cfg = config_from(config, scheme, sim_time);
        SimLog log;
        {
          py::gil_scoped_release release;
          log = run_closed_loop(cfg);
        }
        return log_to_dict(log);
      },
      py::arg("config") = "", py::arg("scheme") = "", py::arg("sim_time") = -1.0,
      "Closed-loop run. `config` is config-file text (empty for defaults).");

  m.def(
      "compare",
      [](const std::string& config, double sim_time) {
        const SchemeConfig cfg = config_from(config, "", sim_time);
        CompareResult res;
        {
          py::gil_scoped_release release;
          res = run_compare(cfg);
        }
        py::dict d;
        d["A"] = log_to_dict(res.a);
        d["B"] = log_to_dict(res.b);
        d["C"] = log_to_dict(res.c);
        return d;
      },
      py::arg("config") = "", py::arg("sim_time") = -1.0);

  m.def(
      "bench_condensing",
      [](int nx, int nu, int M, const std::vector<int>& N_list, int reps, std::uint64_t seed) {
        py::list out;
        for (const BenchRow& r : bench_condensing(nx, nu, M, N_list, reps, seed)) {
          py::dict d;
          d["N"] = r.N;
          d["M"] = r.M;
          d["tailored_ms"] = r.tailored_ms;
          d["naive_ms"] = r.naive_ms;
          d["tailored_mults"] = r.tailored_mults;
          d["naive_mults"] = r.naive_mults;
          d["predicted"] = r.predicted;
          out.append(d);
        }
        return out;
      },
      py::arg("nx") = 4, py::arg("nu") = 1, py::arg("M") = 10, py::arg("N_list") = std::vector<int>{20, 40, 80},
      py::arg("reps") = 5, py::arg("seed") = 0);
}
