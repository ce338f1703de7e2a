#include "edgeadmm/scenario.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "edgeadmm/format.hpp"
#include "edgeadmm/oracle.hpp"
#include "edgeadmm/rng.hpp"

namespace edgeadmm {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

const json& require(const json& j, const std::string& key, const std::string& where) {
    if (!j.is_object()) fail(where, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where, "missing key '" + key + "'");
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where, "expected a number");
    return j.get<double>();
}

int as_int(const json& j, const std::string& where) {
    if (!j.is_number_integer()) fail(where, "expected an integer");
    return j.get<int>();
}

std::string as_string(const json& j, const std::string& where) {
    if (!j.is_string()) fail(where, "expected a string");
    return j.get<std::string>();
}

Vector as_vector(const json& j, const std::string& where) {
    if (!j.is_array()) fail(where, "expected an array of numbers");
    Vector v(j.size());
    for (std::size_t k = 0; k < j.size(); ++k) {
        v(static_cast<Eigen::Index>(k)) = as_number(j[k], where + "[" + std::to_string(k) + "]");
    }
    return v;
}

Matrix as_matrix(const json& j, const std::string& where) {
    if (!j.is_array() || j.empty()) fail(where, "expected a non-empty array of rows");
    const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
    if (cols == 0) fail(where, "expected rows to be arrays of numbers");
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string row_where = where + "[" + std::to_string(r) + "]";
        if (!j[r].is_array() || j[r].size() != cols) fail(row_where, "ragged row");
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                as_number(j[r][c], row_where + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

SmoothConvex make_exp_sum() {
    SmoothConvex f;
    f.value = [](const Vector& x) { return x.array().exp().sum(); };
    f.gradient = [](const Vector& x) -> Vector { return x.array().exp(); };
    f.lipschitz_gradient = true;
    return f;
}

LocalObjective parse_objective(const json& j, int n, const std::string& where) {
    const std::string type = as_string(require(j, "type", where), where + ".type");
    if (type == "quadratic") {
        Quadratic f;
        f.Q = as_matrix(require(j, "Q", where), where + ".Q");
        f.q = as_vector(require(j, "q", where), where + ".q");
        f.c = j.contains("c") ? as_number(j["c"], where + ".c") : 0.0;
        if (f.Q.rows() != n || f.Q.cols() != n) fail(where + ".Q", "must be n x n");
        if (f.q.size() != n) fail(where + ".q", "must have length n");
        try {
            validate_quadratic(f);
        } catch (const Error& e) {
            fail(where, e.what());
        }
        return f;
    }
    if (type == "exp-sum") return make_exp_sum();
    fail(where + ".type", "unknown objective '" + type + "' (quadratic, exp-sum)");
}

ConvexSetPtr parse_set(const json& j, int n, const std::string& where) {
    const std::string type = as_string(require(j, "type", where), where + ".type");
    if (type == "box") {
        Vector lo = as_vector(require(j, "lower", where), where + ".lower");
        Vector hi = as_vector(require(j, "upper", where), where + ".upper");
        if (lo.size() != n || hi.size() != n) fail(where, "bounds must have length n");
        try {
            return std::make_shared<Box>(std::move(lo), std::move(hi));
        } catch (const Error& e) {
            fail(where, e.what());
        }
    }
    if (type == "whole-space") return std::make_shared<WholeSpace>(n);
    if (type == "affine-slice") {
        ConvexSetPtr base = parse_set(require(j, "base", where), n, where + ".base");
        Matrix a = as_matrix(require(j, "A_eq", where), where + ".A_eq");
        Vector b = as_vector(require(j, "b_eq", where), where + ".b_eq");
        try {
            return std::make_shared<AffineSlice>(std::move(base), std::move(a), std::move(b));
        } catch (const Error& e) {
            fail(where, e.what());
        }
    }
    fail(where + ".type", "unknown set '" + type + "' (box, whole-space, affine-slice)");
}

DualStepMode parse_dual_step(const json& j, const std::string& where) {
    const std::string mode = as_string(j, where);
    if (mode == "unit") return DualStepMode::Unit;
    if (mode == "penalty-scaled") return DualStepMode::PenaltyScaled;
    fail(where, "unknown dual step mode '" + mode + "' (unit, penalty-scaled)");
}

EdgeAgreementScenario parse_edge_agreement(const json& j) {
    EdgeAgreementScenario sc;
    sc.name = as_string(require(j, "name", "/"), "/name");
    const int m = as_int(require(j, "m", "/"), "/m");
    const int n = as_int(require(j, "n", "/"), "/n");
    if (m < 1) fail("/m", "must be at least 1");
    if (n < 1) fail("/n", "must be at least 1");

    sc.spec.n = n;
    if (j.contains("rho")) {
        sc.spec.set_rho(as_number(j["rho"], "/rho"));
    } else {
        sc.spec.rho1 = as_number(require(j, "rho1", "/"), "/rho1");
        sc.spec.rho2 = as_number(require(j, "rho2", "/"), "/rho2");
    }
    sc.spec.max_iterations = as_int(require(j, "max_iterations", "/"), "/max_iterations");
    if (j.contains("eps_abs")) sc.spec.eps_abs = as_number(j["eps_abs"], "/eps_abs");
    if (j.contains("eps_rel")) sc.spec.eps_rel = as_number(j["eps_rel"], "/eps_rel");
    if (j.contains("dual_step_mode")) {
        sc.spec.dual_step = parse_dual_step(j["dual_step_mode"], "/dual_step_mode");
    }

    const json& edges = require(j, "edges", "/");
    if (!edges.is_array()) fail("/edges", "expected an array");
    std::vector<std::pair<int, int>> edge_list;
    for (std::size_t l = 0; l < edges.size(); ++l) {
        const std::string where = "/edges[" + std::to_string(l) + "]";
        const int i = as_int(require(edges[l], "i", where), where + ".i");
        const int jj = as_int(require(edges[l], "j", where), where + ".j");
        edge_list.emplace_back(i, jj);
    }
    try {
        sc.spec.graph = Graph::build(m, edge_list);
    } catch (const Error& e) {
        fail("/edges", e.what());
    }
    for (std::size_t l = 0; l < edges.size(); ++l) {
        const std::string where = "/edges[" + std::to_string(l) + "]";
        Matrix A = as_matrix(require(edges[l], "A", where), where + ".A");
        Vector b = as_vector(require(edges[l], "b", where), where + ".b");
        try {
            sc.spec.agreements.push_back(
                build_edge_agreement(edge_list[l].first, edge_list[l].second, A, b, n));
        } catch (const Error& e) {
            fail(where, e.what());
        }
    }

    const json& objectives = require(j, "objectives", "/");
    if (!objectives.is_array() || static_cast<int>(objectives.size()) != m) {
        fail("/objectives", "expected an array with one entry per agent");
    }
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        sc.spec.objectives.push_back(
            parse_objective(objectives[i], n, "/objectives[" + std::to_string(i) + "]"));
    }

    const json& sets = require(j, "sets", "/");
    if (!sets.is_array() || static_cast<int>(sets.size()) != m) {
        fail("/sets", "expected an array with one entry per agent");
    }
    for (std::size_t i = 0; i < sets.size(); ++i) {
        sc.spec.sets.push_back(parse_set(sets[i], n, "/sets[" + std::to_string(i) + "]"));
    }

    if (j.contains("init")) {
        const json& init = j["init"];
        std::vector<AgentInit> states(m);
        auto read_block = [&](const char* key, Vector AgentInit::*field, bool required) {
            if (!init.contains(key)) {
                if (required) fail("/init", std::string("missing '") + key + "'");
                for (auto& st : states) st.*field = Vector::Zero(n);
                return;
            }
            const json& block = init[key];
            const std::string where = std::string("/init.") + key;
            if (!block.is_array() || static_cast<int>(block.size()) != m) {
                fail(where, "expected one array per agent");
            }
            for (int i = 0; i < m; ++i) {
                Vector v = as_vector(block[i], where + "[" + std::to_string(i) + "]");
                if (v.size() != n) fail(where, "entries must have length n");
                states[i].*field = std::move(v);
            }
        };
        read_block("x", &AgentInit::x, true);
        read_block("z", &AgentInit::z, false);
        if (!init.contains("z")) {
            for (auto& st : states) st.z = st.x;
        }
        read_block("lambda", &AgentInit::lambda, false);
        read_block("mu", &AgentInit::mu, false);
        sc.init = std::move(states);
    }
    if (j.contains("compute_oracle")) {
        if (!j["compute_oracle"].is_boolean()) fail("/compute_oracle", "expected a boolean");
        sc.compute_oracle = j["compute_oracle"].get<bool>();
    }
    if (j.contains("seed")) sc.seed = static_cast<std::uint64_t>(as_int(j["seed"], "/seed"));

    try {
        sc.spec.validate();
    } catch (const Error& e) {
        fail("/", e.what());
    }
    return sc;
}

BatteryScenario parse_battery(const json& j) {
    BatteryScenario sc;
    sc.name = as_string(require(j, "name", "/"), "/name");

    const json& nodes = require(j, "nodes", "/");
    if (!nodes.is_array() || nodes.empty()) fail("/nodes", "expected a non-empty array");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "/nodes[" + std::to_string(i) + "]";
        BatteryNode node;
        node.q_max = as_number(require(nodes[i], "q_max", where), where + ".q_max");
        node.s_min = as_number(require(nodes[i], "s_min", where), where + ".s_min");
        node.s_max = as_number(require(nodes[i], "s_max", where), where + ".s_max");
        node.s_init = as_number(require(nodes[i], "s_init", where), where + ".s_init");
        node.u_min = as_number(require(nodes[i], "u_min", where), where + ".u_min");
        node.u_max = as_number(require(nodes[i], "u_max", where), where + ".u_max");
        node.eta_c = as_number(require(nodes[i], "eta_c", where), where + ".eta_c");
        node.eta_d = as_number(require(nodes[i], "eta_d", where), where + ".eta_d");
        node.r = as_number(require(nodes[i], "r", where), where + ".r");
        try {
            node.validate();
        } catch (const Error& e) {
            fail(where, e.what());
        }
        sc.nodes.push_back(node);
    }

    const json& edges = require(j, "edges", "/");
    if (!edges.is_array()) fail("/edges", "expected an array of [i, j] pairs");
    std::vector<std::pair<int, int>> edge_list;
    for (std::size_t l = 0; l < edges.size(); ++l) {
        const std::string where = "/edges[" + std::to_string(l) + "]";
        if (!edges[l].is_array() || edges[l].size() != 2) fail(where, "expected [i, j]");
        edge_list.emplace_back(as_int(edges[l][0], where), as_int(edges[l][1], where));
    }
    try {
        sc.graph = Graph::build(static_cast<int>(sc.nodes.size()), edge_list);
    } catch (const Error& e) {
        fail("/edges", e.what());
    }

    const json& demand = require(j, "demand", "/");
    const std::string type = as_string(require(demand, "type", "/demand"), "/demand.type");
    if (type == "sinusoids") {
        DemandProfile::Sinusoids s;
        const json& terms = require(demand, "terms", "/demand");
        if (!terms.is_array()) fail("/demand.terms", "expected an array");
        for (std::size_t k = 0; k < terms.size(); ++k) {
            const std::string where = "/demand.terms[" + std::to_string(k) + "]";
            SinusoidTerm term;
            term.amplitude = as_number(require(terms[k], "amplitude", where), where);
            term.omega = as_number(require(terms[k], "omega", where), where);
            term.phase = terms[k].contains("phase") ? as_number(terms[k]["phase"], where) : 0.0;
            s.terms.push_back(term);
        }
        sc.demand.source = std::move(s);
    } else if (type == "samples") {
        DemandProfile::Samples s;
        s.t0 = demand.contains("t0") ? as_number(demand["t0"], "/demand.t0") : 0.0;
        s.dt = as_number(require(demand, "dt", "/demand"), "/demand.dt");
        if (!(s.dt > 0.0)) fail("/demand.dt", "must be positive");
        Vector values = as_vector(require(demand, "values", "/demand"), "/demand.values");
        s.values.assign(values.data(), values.data() + values.size());
        if (s.values.empty()) fail("/demand.values", "must not be empty");
        sc.demand.source = std::move(s);
    } else {
        fail("/demand.type", "unknown demand '" + type + "' (sinusoids, samples)");
    }

    sc.horizon = as_int(require(j, "horizon", "/"), "/horizon");
    sc.delta = as_number(require(j, "delta", "/"), "/delta");
    sc.steps = as_int(require(j, "steps", "/"), "/steps");
    sc.rho1 = as_number(require(j, "rho1", "/"), "/rho1");
    sc.rho2 = as_number(require(j, "rho2", "/"), "/rho2");
    sc.n_iter = as_int(require(j, "iterations_per_step", "/"), "/iterations_per_step");
    if (j.contains("warm_start")) {
        if (!j["warm_start"].is_boolean()) fail("/warm_start", "expected a boolean");
        sc.warm_start = j["warm_start"].get<bool>();
    }
    if (sc.horizon < 1) fail("/horizon", "must be at least 1");
    if (!(sc.delta > 0.0)) fail("/delta", "must be positive");
    if (sc.steps < 1) fail("/steps", "must be at least 1");
    if (!(sc.rho1 > 0.0) || !(sc.rho2 > 0.0)) fail("/rho1", "penalties must be positive");
    if (sc.n_iter < 1) fail("/iterations_per_step", "must be at least 1");
    return sc;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& origin) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    try {
        const int version = as_int(require(j, "schema_version", "/"), "/schema_version");
        if (version != 1) fail("/schema_version", "unsupported version");
        const std::string kind = as_string(require(j, "kind", "/"), "/kind");
        if (kind == "edge-agreement") return parse_edge_agreement(j);
        if (kind == "battery-mpc") return parse_battery(j);
        fail("/kind", "unknown kind '" + kind + "' (edge-agreement, battery-mpc)");
    } catch (const ConfigError& e) {
        throw ConfigError(origin + e.what());
    }
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string() + ": cannot open");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str(), path.string());
}

namespace {

std::filesystem::path ensure_out_dir(const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    return out_dir;
}

RunReport run_edge_agreement(const EdgeAgreementScenario& sc,
                             const std::filesystem::path& out_dir,
                             const CliOverrides& overrides) {
    ProblemSpec spec = sc.spec;
    if (overrides.max_iterations) spec.max_iterations = *overrides.max_iterations;
    if (overrides.dual_step) spec.dual_step = *overrides.dual_step;

    RunReport report;
    report.scenario_name = sc.name;
    report.kind = "edge-agreement";

    const auto t0 = std::chrono::steady_clock::now();

    std::optional<SaddleCertificate> cert;
    OracleReference oracle;
    RunOptions run_options;
    run_options.threads = overrides.threads.value_or(1);
    if (sc.compute_oracle) {
        cert = solve_centralized(spec);
        oracle.x_star = cert->x;
        oracle.z_star = cert->z;
        oracle.y_star = cert->y;
        oracle.rho = spec.rho1;
        run_options.oracle = &oracle;
    }

    std::vector<AgentInit> init = sc.init ? *sc.init : default_init(spec);
    RunResult result = run(spec, init, run_options);

    report.wall_millis = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
    report.converged = result.converged;
    report.iterations = result.iterations;
    report.final_w1 = result.trace.records.back().w1;
    report.final_primal_residual = result.trace.records.back().primal_residual;
    report.objective = result.trace.records.back().objective;
    report.exit_code = result.converged ? 0 : 2;

    ensure_out_dir(out_dir);
    {
        const auto path = out_dir / (sc.name + "_trace.csv");
        std::ofstream out(path);
        result.trace.write_csv(out);
        report.outputs.push_back(path.string());
    }
    if (cert) {
        const auto cert_path = out_dir / (sc.name + "_certificate.csv");
        {
            std::ofstream out(cert_path);
            write_certificate_csv(*cert, out);
        }
        report.outputs.push_back(cert_path.string());

        // Lyapunov series along the centralized trajectory
        StackedOperators ops = stack_operators(spec.graph, spec.agreements, spec.n);
        CompactForm cf = build_compact_form(ops);
        CentralRunResult central =
            run_centralized_admm(spec, cf, spec.rho1, spec.max_iterations, 1e-12, true);
        LyapunovSeries series = lyapunov_series(central.history, *cert, cf, spec.rho1);
        const auto lyap_path = out_dir / (sc.name + "_lyapunov.csv");
        {
            std::ofstream out(lyap_path);
            series.write_csv(out);
        }
        report.outputs.push_back(lyap_path.string());
    }
    {
        const auto path = out_dir / (sc.name + "_summary.txt");
        std::ofstream out(path);
        out << "scenario: " << sc.name << "\n"
            << "kind: edge-agreement\n"
            << "converged: " << (report.converged ? "yes" : "no") << "\n"
            << "iterations: " << report.iterations << "\n"
            << "final_W1: " << format_double(report.final_w1) << "\n"
            << "final_primal_residual: " << format_double(report.final_primal_residual) << "\n"
            << "objective: " << format_double(report.objective) << "\n";
        if (cert) {
            out << "oracle_objective: " << format_double(cert->objective) << "\n"
                << "kkt_feasibility: " << format_double(cert->kkt_feasibility) << "\n"
                << "kkt_stationarity: " << format_double(cert->kkt_stationarity) << "\n";
        }
        report.outputs.push_back(path.string());
    }
    return report;
}

RunReport run_battery(const BatteryScenario& sc, const std::filesystem::path& out_dir,
                      const CliOverrides& overrides) {
    RunReport report;
    report.scenario_name = sc.name;
    report.kind = "battery-mpc";

    MpcOptions options;
    options.warm_start = sc.warm_start;
    options.threads = overrides.threads.value_or(std::min<int>(
        sc.graph.agent_count,
        std::max(1u, std::thread::hardware_concurrency())));
    if (overrides.dual_step) options.dual_step = *overrides.dual_step;
    const int n_iter = overrides.max_iterations.value_or(sc.n_iter);

    const auto t0 = std::chrono::steady_clock::now();
    SimulationLog log = mpc_loop(sc.nodes, sc.graph, sc.demand, sc.horizon, sc.delta,
                                 sc.steps, sc.rho1, sc.rho2, n_iter, options);
    report.wall_millis = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();

    double worst_residual = 0.0;
    double worst_tracking = 0.0;
    for (const auto& step : log.steps) {
        worst_residual = std::max(worst_residual, step.step_residual);
        worst_tracking = std::max(worst_tracking, std::abs(step.delivered - step.demand));
    }
    report.converged = true;  // fixed budget per step; errors would have thrown
    report.iterations = sc.steps * n_iter;
    report.final_w1 = worst_residual;
    report.exit_code = 0;

    ensure_out_dir(out_dir);
    {
        const auto path = out_dir / (sc.name + "_simulation.csv");
        std::ofstream out(path);
        log.write_csv(out);
        report.outputs.push_back(path.string());
    }
    {
        const auto path = out_dir / (sc.name + "_summary.txt");
        std::ofstream out(path);
        out << "scenario: " << sc.name << "\n"
            << "kind: battery-mpc\n"
            << "plant_steps: " << sc.steps << "\n"
            << "iterations_per_step: " << n_iter << "\n"
            << "worst_step_residual: " << format_double(worst_residual) << "\n"
            << "worst_demand_tracking_error: " << format_double(worst_tracking) << "\n";
        report.outputs.push_back(path.string());
    }
    return report;
}

}  // namespace

RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                       const CliOverrides& overrides) {
    if (const auto* edge = std::get_if<EdgeAgreementScenario>(&scenario)) {
        return run_edge_agreement(*edge, out_dir, overrides);
    }
    return run_battery(std::get<BatteryScenario>(scenario), out_dir, overrides);
}

ProblemSpec random_feasible_instance(std::uint64_t seed) {
    Rng rng(seed);
    const int m = static_cast<int>(rng.uniform_int(2, 4));
    const int n = static_cast<int>(rng.uniform_int(1, 3));

    // spanning tree plus an occasional extra edge
    std::vector<std::pair<int, int>> edges;
    for (int j = 2; j <= m; ++j) {
        const int i = static_cast<int>(rng.uniform_int(1, j - 1));
        edges.emplace_back(i, j);
    }
    if (m >= 3 && rng.uniform() < 0.5) {
        for (int attempt = 0; attempt < 8; ++attempt) {
            int i = static_cast<int>(rng.uniform_int(1, m));
            int j = static_cast<int>(rng.uniform_int(1, m));
            if (i == j) continue;
            if (i > j) std::swap(i, j);
            bool exists = false;
            for (const auto& e : edges) {
                if ((e.first == i && e.second == j) || (e.first == j && e.second == i)) {
                    exists = true;
                    break;
                }
            }
            if (!exists) {
                edges.emplace_back(i, j);
                break;
            }
        }
    }

    ProblemSpec spec;
    spec.graph = Graph::build(m, edges);
    spec.n = n;
    spec.set_rho(5.0);
    spec.max_iterations = 20000;

    // target on the agreement manifold, boxes around it
    Matrix target(m, n);
    for (int i = 0; i < m; ++i) {
        for (int c = 0; c < n; ++c) target(i, c) = 2.0 * rng.normal();
    }
    for (const auto& [i, j] : spec.graph.edges) {
        const int d = static_cast<int>(rng.uniform_int(1, n));
        Matrix A(d, n);
        while (true) {
            for (int r = 0; r < d; ++r) {
                for (int c = 0; c < n; ++c) A(r, c) = rng.normal();
            }
            try {
                Vector b = A * (target.row(i - 1) - target.row(j - 1)).transpose();
                spec.agreements.push_back(build_edge_agreement(i, j, A, b, n));
                break;
            } catch (const RankDeficient&) {
                // resample A
            }
        }
    }
    for (int i = 0; i < m; ++i) {
        Matrix G(n, n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) G(r, c) = rng.normal();
        }
        Quadratic f;
        f.Q = G * G.transpose() + 0.1 * Matrix::Identity(n, n);
        f.q = Vector(n);
        for (int c = 0; c < n; ++c) f.q(c) = 2.0 * rng.normal();
        spec.objectives.push_back(std::move(f));

        Vector lo(n), hi(n);
        for (int c = 0; c < n; ++c) {
            lo(c) = target(i, c) - rng.uniform(0.3, 3.0);
            hi(c) = target(i, c) + rng.uniform(0.3, 3.0);
        }
        spec.sets.push_back(std::make_shared<Box>(std::move(lo), std::move(hi)));
    }
    return spec;
}

void OracleSuiteReport::write_csv(std::ostream& out) const {
    out << "instance,m,n,edges,coordinate_gap,objective_gap,iterations,pass\n";
    for (const auto& row : rows) {
        out << row.instance << ',' << row.m << ',' << row.n << ',' << row.edges << ','
            << format_double(row.coordinate_gap) << ',' << format_double(row.objective_gap)
            << ',' << row.iterations << ',' << (row.pass ? 1 : 0) << '\n';
    }
}

OracleSuiteReport run_oracle_suite(int count, std::uint64_t seed, double coord_tol,
                                   double objective_tol, int threads) {
    if (count < 1) throw Error("suite needs at least one instance");
    OracleSuiteReport report;
    report.coord_tol = coord_tol;
    report.objective_tol = objective_tol;
    for (int k = 0; k < count; ++k) {
        ProblemSpec spec = random_feasible_instance(seed * 1000003ull + static_cast<std::uint64_t>(k));
        SaddleCertificate cert = solve_centralized(spec);

        RunOptions options;
        options.threads = threads;
        RunResult result = run(spec, default_init(spec), options);

        OracleSuiteRow row;
        row.instance = k;
        row.m = spec.graph.agent_count;
        row.n = spec.n;
        row.edges = spec.graph.edge_count();
        row.iterations = result.iterations;
        row.coordinate_gap = (result.stacked_z() - cert.x).cwiseAbs().maxCoeff();
        const double obj = spec.objective_total([&] {
            std::vector<Vector> z(spec.graph.agent_count);
            for (int i = 0; i < spec.graph.agent_count; ++i) z[i] = result.agents[i].z;
            return z;
        }());
        row.objective_gap = std::abs(obj - cert.objective);
        row.pass = row.coordinate_gap < coord_tol &&
                   row.objective_gap < objective_tol * (1.0 + std::abs(cert.objective));
        if (!row.pass) ++report.failures;
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace edgeadmm
