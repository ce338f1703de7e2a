#pragma once

#include <ostream>
#include <variant>
#include <vector>

#include "edgeadmm/admm.hpp"

namespace edgeadmm {

/// One lithium-ion storage node. SoC is in percent, powers in kW, capacity
/// in kWh. Charging power u_c lives in [0, u_max], discharging power u_d in
/// [u_min, 0]; efficiencies eta_c in (0,1], eta_d in [1,inf).
struct BatteryNode {
    double q_max = 0.0;
    double s_min = 0.0;
    double s_max = 0.0;
    double s_init = 0.0;
    double u_min = 0.0;
    double u_max = 0.0;
    double eta_c = 1.0;
    double eta_d = 1.0;
    double r = 1.0;  // control cost weight

    /// SoC change per kW over one step of length delta seconds.
    double alpha(double delta) const { return delta / (3600.0 * q_max); }

    void validate() const;
};

struct SinusoidTerm {
    double amplitude = 0.0;
    double omega = 0.0;  // rad/s
    double phase = 0.0;  // rad
};

/// Known power demand P(t) in kW; positive means the network discharges
/// into the external system.
struct DemandProfile {
    struct Sinusoids {
        std::vector<SinusoidTerm> terms;
    };
    struct Samples {
        double t0 = 0.0;
        double dt = 1.0;
        std::vector<double> values;  // zero-order hold
    };
    std::variant<Sinusoids, Samples> source;

    double operator()(double t) const;
};

/// The per-node horizon decision vector is col(x, u) of size (2m+1)T:
/// x holds T predicted SoC values; u holds T slots of 2m entries, one
/// (u_c, u_d) copy per network node. Edge agreements pin the u-part of
/// neighboring nodes to each other, the affine rows encode the SoC
/// recursion and the per-slot demand balance.
struct MpcInstance {
    ProblemSpec spec;                 // ready for the distributed engine
    std::vector<Matrix> a_bar;        // per node, 2T x (2m+1)T
    std::vector<Vector> b_bar_rhs;    // per node, size 2T
    Vector demand;                    // P over the horizon, size T
    int m = 0;
    int horizon = 0;
    double delta = 0.0;

    int xi_dim() const { return (2 * m + 1) * horizon; }
    /// Offset of the (u_c, u_d) pair owned by `owner` (1-based) at slot l.
    int control_offset(int owner, int l) const {
        return horizon + 2 * m * l + 2 * (owner - 1);
    }
};

/// Assembles the horizon problem for the given measured SoC vector as an
/// edge-agreement instance: quadratic cost xi' R_bar xi, per-node set
/// Box ∩ {A_bar xi = B_bar}, and identity agreements on the u-part across
/// each edge. Throws InfeasibleDemand when a node's slice certifies empty.
MpcInstance build_mpc_instance(const std::vector<BatteryNode>& nodes, const Graph& graph,
                               const Vector& s_current, const DemandProfile& demand,
                               double t_now, int horizon, double delta, double rho1,
                               double rho2);

/// Local initialization: the node meets the whole demand alone with its own
/// controls clamped to its box, zero for every other node's copy; SoC
/// forward-propagated and clamped. Duals start at zero.
AgentInit cold_start(int node_index, double s_current, const Vector& demand,
                     const std::vector<BatteryNode>& nodes, const MpcInstance& instance);

/// Shifts the previous solution one slot forward, repeating the terminal
/// slot; applied to all four iterate blocks.
AgentInit warm_start(const AgentState& previous, const MpcInstance& instance);

std::vector<std::pair<double, double>> parse_own_controls(const Vector& z, int node_index,
                                                          int m, int horizon);

struct SimulationStep {
    double t = 0.0;
    Vector soc;             // per node, after applying the slot-0 control
    Matrix controls;        // m x 2, (u_c, u_d) applied this step
    double delivered = 0.0; // -sum(u_c + u_d)
    double demand = 0.0;
    double step_residual = 0.0;  // final combined solver residual
    int admm_iterations = 0;
};

struct SimulationLog {
    std::vector<SimulationStep> steps;

    /// Columns: t,node,soc,u_c,u_d,delivered_power,demand,step_residual.
    void write_csv(std::ostream& out) const;
};

struct MpcOptions {
    bool warm_start = false;
    int threads = 1;
    DualStepMode dual_step = DualStepMode::Unit;
};

/// Receding-horizon loop: per plant step build the horizon instance from
/// the measured SoC, run the distributed solver for n_iter iterations,
/// apply each node's own first control under zero-order hold to the plant
/// recursion, advance time by delta.
SimulationLog mpc_loop(const std::vector<BatteryNode>& nodes, const Graph& graph,
                       const DemandProfile& demand, int horizon, double delta, int steps,
                       double rho1, double rho2, int n_iter, const MpcOptions& options = {});

}  // namespace edgeadmm
