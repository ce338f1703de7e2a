#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "edgeadmm/admm.hpp"
#include "edgeadmm/battery.hpp"

namespace edgeadmm {

/// Parsed "edge-agreement" scenario: a ProblemSpec plus harness options.
struct EdgeAgreementScenario {
    std::string name;
    ProblemSpec spec;
    std::optional<std::vector<AgentInit>> init;
    bool compute_oracle = true;  // emit reference columns / certificate
    std::uint64_t seed = 0;
};

struct BatteryScenario {
    std::string name;
    std::vector<BatteryNode> nodes;
    Graph graph;
    DemandProfile demand;
    int horizon = 0;
    double delta = 0.0;
    int steps = 0;
    double rho1 = 0.0;
    double rho2 = 0.0;
    int n_iter = 0;
    bool warm_start = false;
};

using Scenario = std::variant<EdgeAgreementScenario, BatteryScenario>;

/// Loads and schema-checks a scenario document (JSON, schema_version 1).
/// Throws ConfigError with a json-pointer-style location on any problem.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(const std::string& json_text, const std::string& origin = "<string>");

struct CliOverrides {
    std::optional<int> max_iterations;
    std::optional<DualStepMode> dual_step;
    std::optional<int> threads;
    bool quiet = false;
};

struct RunReport {
    int exit_code = 0;  // 0 converged, 2 not converged
    std::string scenario_name;
    std::string kind;
    int iterations = 0;
    bool converged = false;
    double final_w1 = 0.0;
    double final_primal_residual = 0.0;
    double objective = 0.0;
    double wall_millis = 0.0;
    std::vector<std::string> outputs;  // files written
};

/// Executes a scenario, writing trace/simulation CSVs and a summary file to
/// out_dir. Exit code 0 on convergence, 2 when the iteration budget ran out
/// first (battery runs use a fixed budget and count as converged when every
/// step's solver residual stays finite).
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir,
                       const CliOverrides& overrides = {});

struct OracleSuiteRow {
    int instance = 0;
    int m = 0;
    int n = 0;
    int edges = 0;
    double coordinate_gap = 0.0;
    double objective_gap = 0.0;
    int iterations = 0;
    bool pass = false;
};

struct OracleSuiteReport {
    std::vector<OracleSuiteRow> rows;
    int failures = 0;
    double coord_tol = 1e-4;
    double objective_tol = 1e-6;  // scaled by (1 + |l*|)

    void write_csv(std::ostream& out) const;
};

/// Generates `count` random feasible instances (m in 2..4, n in 1..3,
/// quadratic objectives, boxes built around a target on the agreement
/// manifold), solves each both distributed and centralized, and reports the
/// per-instance gaps.
OracleSuiteReport run_oracle_suite(int count, std::uint64_t seed,
                                   double coord_tol = 1e-4, double objective_tol = 1e-6,
                                   int threads = 1);

/// Builds a random feasible instance as used by the suite (exposed for
/// tests).
ProblemSpec random_feasible_instance(std::uint64_t seed);

}  // namespace edgeadmm
