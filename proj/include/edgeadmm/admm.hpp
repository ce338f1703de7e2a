#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "edgeadmm/convex_sets.hpp"
#include "edgeadmm/graph.hpp"
#include "edgeadmm/subproblem.hpp"

namespace edgeadmm {

/// Dual ascent step size. Unit reproduces the per-agent update rule as
/// published; PenaltyScaled multiplies the residual by the penalty weight as
/// in the centralized two-block scheme. The distributed (Jacobi) x-update is
/// only a block approximation of the joint minimization, and the scaled step
/// overshoots with it, so Unit is the default for the distributed engine.
enum class DualStepMode {
    Unit,
    PenaltyScaled,
};

/// One agent's iterates at an iteration boundary.
struct AgentState {
    Vector x;
    Vector z;
    Vector lambda;
    Vector mu;
};

using AgentInit = AgentState;

/// Full problem instance for the distributed solver.
struct ProblemSpec {
    Graph graph;
    std::vector<EdgeAgreement> agreements;  // one per edge, in edge order
    std::vector<LocalObjective> objectives;
    std::vector<ConvexSetPtr> sets;
    int n = 0;  // per-agent dimension

    double rho1 = 0.0;
    double rho2 = 0.0;
    int max_iterations = 1000;
    double eps_abs = 1e-8;
    double eps_rel = 1e-6;
    DualStepMode dual_step = DualStepMode::Unit;
    DualCoupling coupling = DualCoupling::NeighborDifference;

    /// Single-penalty convenience: the canonical rule has rho1 = rho2.
    void set_rho(double rho) { rho1 = rho2 = rho; }

    /// Throws DimensionMismatch / Error on inconsistent sizes or penalties.
    void validate() const;

    /// Total edge-agreement dimension sum_ij d_ij.
    int total_agreement_dim() const;

    double objective_total(const std::vector<Vector>& x) const;
};

/// Reference optimum used to fill the optional trace columns.
struct OracleReference {
    Vector x_star;   // stacked, size m*n
    Vector z_star;
    Vector y_star;   // stacked duals col(lambda, mu), size 2*m*n
    double rho = 0.0;
};

struct TraceRecord {
    int k = 0;
    double primal_residual = 0.0;  // ||x - z||_2 over all agents
    double w1 = 0.0;               // edge_residual_w1
    double objective = 0.0;
    std::optional<double> w2;        // ||x - x*||^2 when a reference is given
    std::optional<double> lyapunov;  // V_k when a reference is given
    double millis = 0.0;
    // norms used by the stopping rule (not part of the CSV schema)
    double x_norm = 0.0;
    double z_norm = 0.0;
};

struct IterationTrace {
    std::vector<TraceRecord> records;

    /// Columns: k,primal_residual,W1,objective,W2,V,millis (optional cells
    /// empty when no reference optimum was supplied).
    void write_csv(std::ostream& out) const;
};

struct RunOptions {
    int threads = 1;
    const OracleReference* oracle = nullptr;
};

struct RunResult {
    std::vector<AgentState> agents;  // final iterates
    IterationTrace trace;
    bool converged = false;
    int iterations = 0;

    Vector stacked_x() const;
    Vector stacked_z() const;
};

/// Default start: x = z = projection of 0 onto the agent's set, zero duals.
std::vector<AgentInit> default_init(const ProblemSpec& spec);

/// Runs the synchronous distributed iteration: per agent an x-minimization,
/// a z-projection and the lambda step, then a barrier exchanging x (and edge
/// duals) with neighbors, then the mu step. Stops at stop_check or after
/// max_iterations. The returned solution is the z-block, feasible for each
/// agent's set by construction.
///
/// Agents between barriers are independent; with options.threads > 1 they
/// run in parallel and the trace is bit-identical to the sequential run.
RunResult run(const ProblemSpec& spec, const std::vector<AgentInit>& init,
              const RunOptions& options = {});

struct DualUpdateResult {
    Vector lambda;
    Vector mu;
};

struct DualNeighborTerm {
    const Matrix& P;
    const Vector& b_bar;
    const Vector& x_new;
};

/// lambda' = lambda + step_lambda (x_new - z_new);
/// mu' = mu + step_mu sum_j P_ij(x_new - x_j_new - b_bar_ij).
DualUpdateResult dual_updates(const Vector& lambda, const Vector& mu, const Vector& x_new,
                              const Vector& z_new,
                              const std::vector<DualNeighborTerm>& neighbors,
                              double step_lambda, double step_mu);

/// Combined absolute/relative criterion on both residual families:
/// ||x-z|| <= sqrt(mn) eps_abs + eps_rel max(||x||, ||z||) and
/// sqrt(W1) <= sqrt(sum d_ij) eps_abs + eps_rel ||x||.
bool stop_check(const TraceRecord& tail, const ProblemSpec& spec);

}  // namespace edgeadmm
