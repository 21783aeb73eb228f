#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "rndrace/cli.hpp"
#include "rndrace/error.hpp"
#include "rndrace/io.hpp"
#include "rndrace/model.hpp"
#include "rndrace/simulator.hpp"
#include "rndrace/solver.hpp"

namespace py = pybind11;
using namespace rndrace;

namespace {

template <class T>
py::object as_dict(const T& value) {
  return py::module_::import("json").attr("loads")(to_json(value).dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Disclose-withhold-exit equilibrium of a two-stage R&D race";

  auto base = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<AssumptionError>(m, "AssumptionError", PyExc_RuntimeError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  (void)base;

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double alpha, double H, double mu, double p1, double p2, double c) {
             ModelParams p{alpha, H, mu, p1, p2, c};
             p.validate();
             return p;
           }),
           py::arg("alpha"), py::arg("H"), py::arg("mu"), py::arg("p1"), py::arg("p2"),
           py::arg("c"))
      .def_readwrite("alpha", &ModelParams::prior_feasible)
      .def_readwrite("H", &ModelParams::stage1_rate)
      .def_readwrite("mu", &ModelParams::stage2_rate)
      .def_readwrite("p1", &ModelParams::reward1)
      .def_readwrite("p2", &ModelParams::reward2)
      .def_readwrite("c", &ModelParams::cost_rate)
      .def("validate", &ModelParams::validate)
      .def("to_dict", [](const ModelParams& p) { return as_dict(p); })
      .def("__repr__", [](const ModelParams& p) { return to_string(p); });

  m.def("reference_params", &reference_params, py::arg("c") = 0.8);

  py::class_<AssumptionReport>(m, "AssumptionReport")
      .def_readonly("a1_holds", &AssumptionReport::a1_holds)
      .def_readonly("a1_margin", &AssumptionReport::a1_margin)
      .def_readonly("a2_holds", &AssumptionReport::a2_holds)
      .def_readonly("a2_margin", &AssumptionReport::a2_margin)
      .def_readonly("a3_holds", &AssumptionReport::a3_holds)
      .def_readonly("a3_margin", &AssumptionReport::a3_margin)
      .def("to_dict", [](const AssumptionReport& r) { return as_dict(r); });

  py::class_<EquilibriumCutoffs>(m, "EquilibriumCutoffs")
      .def_readonly("t1", &EquilibriumCutoffs::t1)
      .def_readonly("t2", &EquilibriumCutoffs::t2)
      .def_readonly("delta", &EquilibriumCutoffs::delta)
      .def_readonly("corner", &EquilibriumCutoffs::corner)
      .def_readonly("residual", &EquilibriumCutoffs::residual)
      .def_readonly("a3_verified", &EquilibriumCutoffs::a3_verified)
      .def("to_dict", [](const EquilibriumCutoffs& c) { return as_dict(c); });

  py::class_<MonopolyBenchmark>(m, "MonopolyBenchmark")
      .def_readonly("t_star", &MonopolyBenchmark::t_star);

  py::class_<WelfareReport>(m, "WelfareReport")
      .def_readonly("total_time_duopoly", &WelfareReport::total_time_duopoly)
      .def_readonly("total_time_monopoly", &WelfareReport::total_time_monopoly)
      .def_readonly("p_success_duopoly", &WelfareReport::p_success_duopoly)
      .def_readonly("p_success_monopoly", &WelfareReport::p_success_monopoly)
      .def_property_readonly("preferred",
                             [](const WelfareReport& w) { return to_string(w.preferred); })
      .def_readonly("threshold_gap", &WelfareReport::threshold_gap)
      .def("to_dict", [](const WelfareReport& w) { return as_dict(w); });

  py::class_<SocialExit>(m, "SocialExit")
      .def_readonly("t_hat", &SocialExit::t_hat)
      .def_readonly("per_firm", &SocialExit::per_firm);

  m.def("check_assumptions", &check_assumptions, py::arg("params"));
  m.def("spillover_integral", &spillover_integral, py::arg("tau"), py::arg("params"));
  m.def("belief_disclose_region", &belief_disclose_region, py::arg("t"), py::arg("params"));
  m.def("belief_withhold_region", &belief_withhold_region, py::arg("t"), py::arg("t1"),
        py::arg("params"));
  m.def("belief_after_exit", &belief_after_exit, py::arg("dt"), py::arg("t1"), py::arg("t2"),
        py::arg("params"));
  m.def("disclose_payoff", &disclose_payoff, py::arg("t"), py::arg("t1"), py::arg("params"));
  m.def("withhold_payoff", &withhold_payoff, py::arg("t"), py::arg("t1"), py::arg("t2"),
        py::arg("params"));
  m.def("withhold_minus_disclose", &withhold_minus_disclose, py::arg("t"), py::arg("t1"),
        py::arg("t2"), py::arg("params"));
  m.def("stay_rate_withhold_region", &stay_rate_withhold_region, py::arg("t"), py::arg("t1"),
        py::arg("t2"), py::arg("params"));
  m.def("stay_rate_after_exit", &stay_rate_after_exit, py::arg("dt"), py::arg("t1"),
        py::arg("t2"), py::arg("params"));

  m.def("withhold_length", &withhold_length, py::arg("params"));
  m.def("solve_equilibrium", &solve_equilibrium, py::arg("params"));
  m.def("monopoly_exit", &monopoly_exit, py::arg("params"));
  m.def("welfare_compare", &welfare_compare, py::arg("params"));
  m.def("socially_optimal_exit", &socially_optimal_exit, py::arg("params"),
        py::arg("social_value"));
  m.def(
      "sweep",
      [](const std::vector<ModelParams>& grid, unsigned n_threads) {
        py::list out;
        for (const auto& e : sweep(grid, n_threads)) out.append(as_dict(e));
        return out;
      },
      py::arg("grid"), py::arg("n_threads") = 0);

  py::class_<CutoffStrategy>(m, "CutoffStrategy")
      .def(py::init([](double disclose_until, double exit_at,
                       std::optional<double> planned_disclosure) {
             CutoffStrategy s{disclose_until, exit_at, planned_disclosure};
             s.validate();
             return s;
           }),
           py::arg("disclose_until"), py::arg("exit_at"),
           py::arg("planned_disclosure") = py::none())
      .def_static("from_equilibrium", &CutoffStrategy::from_equilibrium)
      .def_readwrite("disclose_until", &CutoffStrategy::disclose_until)
      .def_readwrite("exit_at", &CutoffStrategy::exit_at)
      .def_readwrite("planned_disclosure", &CutoffStrategy::planned_disclosure)
      .def("__repr__", [](const CutoffStrategy& s) { return describe(s); });

  m.def(
      "simulate",
      [](const CutoffStrategy& a, const CutoffStrategy& b, const ModelParams& p,
         std::uint64_t n_trials, std::uint64_t seed, unsigned n_threads) {
        SimStats s;
        {
          py::gil_scoped_release release;
          s = estimate(a, b, p, n_trials, seed, n_threads);
        }
        return as_dict(s);
      },
      py::arg("strat_a"), py::arg("strat_b"), py::arg("params"), py::arg("n_trials"),
      py::arg("seed") = 0, py::arg("n_threads") = 0);

  m.def(
      "best_response_scan",
      [](const CutoffStrategy& candidate, const ModelParams& p, std::vector<double> offsets,
         std::uint64_t n_trials, std::uint64_t seed, unsigned n_threads) {
        DeviationScanReport r;
        {
          py::gil_scoped_release release;
          r = best_response_scan(candidate, p, default_deviation_grid(candidate, offsets),
                                 n_trials, seed, n_threads);
        }
        return as_dict(r);
      },
      py::arg("candidate"), py::arg("params"), py::arg("offsets") = std::vector<double>{0.05, 0.15},
      py::arg("n_trials") = 100000, py::arg("seed") = 0, py::arg("n_threads") = 0);

  m.def(
      "ex_ante_value",
      [](const CutoffStrategy& a, const CutoffStrategy& b, const ModelParams& p, double tol) {
        const ExAnteValue v = ex_ante_value_quadrature(a, b, p, tol);
        return py::make_tuple(v.value[0], v.value[1]);
      },
      py::arg("strat_a"), py::arg("strat_b"), py::arg("params"), py::arg("tolerance") = 1e-6);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::vector<const char*> argv{"rndrace"};
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line front end; returns (status, stdout, stderr).");
}
