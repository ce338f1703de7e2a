#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "edgeadmm/oracle.hpp"
#include "edgeadmm/scenario.hpp"

namespace py = pybind11;
using namespace edgeadmm;

namespace {

py::dict trace_to_dict(const IterationTrace& trace) {
    const auto count = static_cast<py::ssize_t>(trace.records.size());
    py::array_t<double> k(count), primal(count), w1(count), objective(count);
    auto kk = k.mutable_unchecked<1>();
    auto pp = primal.mutable_unchecked<1>();
    auto ww = w1.mutable_unchecked<1>();
    auto oo = objective.mutable_unchecked<1>();
    bool has_w2 = !trace.records.empty() && trace.records.front().w2.has_value();
    py::array_t<double> w2(has_w2 ? count : 0), lyap(has_w2 ? count : 0);
    for (py::ssize_t t = 0; t < count; ++t) {
        const auto& rec = trace.records[static_cast<std::size_t>(t)];
        kk(t) = rec.k;
        pp(t) = rec.primal_residual;
        ww(t) = rec.w1;
        oo(t) = rec.objective;
        if (has_w2) {
            w2.mutable_unchecked<1>()(t) = rec.w2.value_or(0.0);
            lyap.mutable_unchecked<1>()(t) = rec.lyapunov.value_or(0.0);
        }
    }
    py::dict out;
    out["k"] = k;
    out["primal_residual"] = primal;
    out["w1"] = w1;
    out["objective"] = objective;
    if (has_w2) {
        out["w2"] = w2;
        out["lyapunov"] = lyap;
    }
    return out;
}

py::dict solve_edge_agreement(const std::string& config_text, std::optional<int> max_iterations,
                              bool literal_dual_step, std::optional<bool> compute_oracle,
                              int threads) {
    Scenario scenario = parse_scenario(config_text);
    auto* edge = std::get_if<EdgeAgreementScenario>(&scenario);
    if (!edge) throw ConfigError("expected an edge-agreement scenario");

    ProblemSpec& spec = edge->spec;
    if (max_iterations) spec.max_iterations = *max_iterations;
    if (literal_dual_step) spec.dual_step = DualStepMode::Unit;
    const bool with_oracle = compute_oracle.value_or(edge->compute_oracle);

    std::optional<SaddleCertificate> cert;
    OracleReference oracle;
    RunOptions options;
    options.threads = threads;
    if (with_oracle) {
        cert = solve_centralized(spec);
        oracle.x_star = cert->x;
        oracle.z_star = cert->z;
        oracle.y_star = cert->y;
        oracle.rho = spec.rho1;
        options.oracle = &oracle;
    }

    std::vector<AgentInit> init = edge->init ? *edge->init : default_init(spec);
    RunResult result = run(spec, init, options);

    py::dict out;
    out["name"] = edge->name;
    out["converged"] = result.converged;
    out["iterations"] = result.iterations;
    out["x"] = result.stacked_x();
    out["z"] = result.stacked_z();
    out["final_w1"] = result.trace.records.back().w1;
    out["objective"] = result.trace.records.back().objective;
    out["trace"] = trace_to_dict(result.trace);
    if (cert) {
        py::dict oracle_dict;
        oracle_dict["x_star"] = cert->x;
        oracle_dict["objective"] = cert->objective;
        oracle_dict["kkt_feasibility"] = cert->kkt_feasibility;
        oracle_dict["kkt_stationarity"] = cert->kkt_stationarity;
        out["oracle"] = oracle_dict;
    }
    return out;
}

py::dict simulate_battery(const std::string& config_text, std::optional<int> steps,
                          std::optional<int> threads) {
    Scenario scenario = parse_scenario(config_text);
    auto* batt = std::get_if<BatteryScenario>(&scenario);
    if (!batt) throw ConfigError("expected a battery-mpc scenario");
    if (steps) batt->steps = *steps;

    MpcOptions options;
    options.warm_start = batt->warm_start;
    options.threads = threads.value_or(1);
    SimulationLog log = mpc_loop(batt->nodes, batt->graph, batt->demand, batt->horizon,
                                 batt->delta, batt->steps, batt->rho1, batt->rho2,
                                 batt->n_iter, options);

    const auto L = static_cast<py::ssize_t>(log.steps.size());
    const auto m = static_cast<py::ssize_t>(batt->graph.agent_count);
    py::array_t<double> t(L), delivered(L), demand(L), residual(L);
    py::array_t<double> soc({L, m}), u_c({L, m}), u_d({L, m});
    for (py::ssize_t l = 0; l < L; ++l) {
        const auto& step = log.steps[static_cast<std::size_t>(l)];
        t.mutable_unchecked<1>()(l) = step.t;
        delivered.mutable_unchecked<1>()(l) = step.delivered;
        demand.mutable_unchecked<1>()(l) = step.demand;
        residual.mutable_unchecked<1>()(l) = step.step_residual;
        for (py::ssize_t i = 0; i < m; ++i) {
            soc.mutable_unchecked<2>()(l, i) = step.soc(i);
            u_c.mutable_unchecked<2>()(l, i) = step.controls(i, 0);
            u_d.mutable_unchecked<2>()(l, i) = step.controls(i, 1);
        }
    }
    py::dict out;
    out["t"] = t;
    out["soc"] = soc;
    out["u_c"] = u_c;
    out["u_d"] = u_d;
    out["delivered"] = delivered;
    out["demand"] = demand;
    out["step_residual"] = residual;
    return out;
}

py::dict run_scenario_file(const std::string& path, const std::string& out_dir,
                           std::optional<int> max_iterations, bool literal_dual_step,
                           std::optional<int> threads) {
    Scenario scenario = load_scenario(path);
    CliOverrides overrides;
    overrides.max_iterations = max_iterations;
    if (literal_dual_step) overrides.dual_step = DualStepMode::Unit;
    overrides.threads = threads;
    RunReport report = run_scenario(scenario, out_dir, overrides);
    py::dict out;
    out["exit_code"] = report.exit_code;
    out["name"] = report.scenario_name;
    out["kind"] = report.kind;
    out["converged"] = report.converged;
    out["iterations"] = report.iterations;
    out["final_w1"] = report.final_w1;
    out["objective"] = report.objective;
    out["outputs"] = report.outputs;
    return out;
}

py::dict oracle_suite(int count, std::uint64_t seed, double coord_tol, double obj_tol) {
    OracleSuiteReport report = run_oracle_suite(count, seed, coord_tol, obj_tol);
    const auto rows = static_cast<py::ssize_t>(report.rows.size());
    py::array_t<double> coord(rows), obj(rows);
    for (py::ssize_t k = 0; k < rows; ++k) {
        coord.mutable_unchecked<1>()(k) = report.rows[static_cast<std::size_t>(k)].coordinate_gap;
        obj.mutable_unchecked<1>()(k) = report.rows[static_cast<std::size_t>(k)].objective_gap;
    }
    py::dict out;
    out["failures"] = report.failures;
    out["coordinate_gap"] = coord;
    out["objective_gap"] = obj;
    return out;
}

}  // namespace

PYBIND11_MODULE(edgeadmm, m) {
    m.doc() = "Distributed solver for optimization under edge agreements";

    py::register_exception<ConfigError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<Error>(m, "SolverError", PyExc_RuntimeError);

    m.def("solve_edge_agreement", &solve_edge_agreement, py::arg("config"),
          py::arg("max_iterations") = std::nullopt, py::arg("literal_dual_step") = false,
          py::arg("compute_oracle") = std::nullopt, py::arg("threads") = 1,
          "Solve an edge-agreement scenario given as JSON text; returns iterates, trace "
          "arrays and (optionally) the centralized reference.");

    m.def("simulate_battery", &simulate_battery, py::arg("config"),
          py::arg("steps") = std::nullopt, py::arg("threads") = std::nullopt,
          "Run the receding-horizon battery simulation for a battery-mpc scenario given as "
          "JSON text; returns per-step arrays.");

    m.def("run_scenario", &run_scenario_file, py::arg("path"), py::arg("out_dir") = "out",
          py::arg("max_iterations") = std::nullopt, py::arg("literal_dual_step") = false,
          py::arg("threads") = std::nullopt,
          "Run a scenario file and write trace/simulation CSVs like the CLI does.");

    m.def(
        "validate",
        [](const std::string& config_text) {
            Scenario scenario = parse_scenario(config_text);
            py::dict out;
            if (const auto* edge = std::get_if<EdgeAgreementScenario>(&scenario)) {
                out["kind"] = "edge-agreement";
                out["name"] = edge->name;
                out["m"] = edge->spec.graph.agent_count;
                out["n"] = edge->spec.n;
            } else {
                const auto& batt = std::get<BatteryScenario>(scenario);
                out["kind"] = "battery-mpc";
                out["name"] = batt.name;
                out["m"] = batt.graph.agent_count;
                out["horizon"] = batt.horizon;
            }
            return out;
        },
        py::arg("config"), "Schema-check scenario JSON text; raises ScenarioError on problems.");

    m.def("oracle_suite", &oracle_suite, py::arg("count") = 50, py::arg("seed") = 1,
          py::arg("coord_tol") = 1e-4, py::arg("obj_tol") = 1e-6,
          "Random-instance equivalence between the distributed and centralized solvers.");

    m.def(
        "incidence",
        [](int m, const std::vector<std::pair<int, int>>& edges) {
            return incidence(Graph::build(m, edges));
        },
        py::arg("m"), py::arg("edges"),
        "Oriented incidence matrix (+1 at the first stored endpoint).");

    m.def(
        "edge_projection",
        [](const Matrix& A, const Vector& b) {
            EdgeAgreement e = build_edge_agreement(1, 2, A, b, static_cast<int>(A.cols()));
            return py::make_tuple(e.P, e.b_bar);
        },
        py::arg("A"), py::arg("b"),
        "Projector A'(AA')^{-1}A and offset A'(AA')^{-1}b of one agreement.");

    m.def(
        "project_box",
        [](const Vector& lower, const Vector& upper, const Vector& v) {
            return Box(lower, upper).project(v);
        },
        py::arg("lower"), py::arg("upper"), py::arg("v"));

    m.def(
        "project_box_affine",
        [](const Vector& lower, const Vector& upper, const Matrix& a_eq, const Vector& b_eq,
           const Vector& v) {
            auto box = std::make_shared<Box>(lower, upper);
            return AffineSlice(box, a_eq, b_eq).project(v);
        },
        py::arg("lower"), py::arg("upper"), py::arg("A_eq"), py::arg("b_eq"), py::arg("v"),
        "Euclidean projection onto box ∩ {A_eq v = b_eq} (Dykstra).");
}
