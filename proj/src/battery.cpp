#include "edgeadmm/battery.hpp"

#include <algorithm>
#include <cmath>

#include "edgeadmm/format.hpp"

namespace edgeadmm {

void BatteryNode::validate() const {
    if (!(q_max > 0.0)) throw Error("node capacity must be positive");
    if (!(s_min < s_max)) throw Error("node needs s_min < s_max");
    if (!(u_min < 0.0) || !(u_max > 0.0)) throw Error("node needs u_min < 0 < u_max");
    if (!(eta_c > 0.0) || eta_c > 1.0) throw Error("charging efficiency must be in (0,1]");
    if (eta_d < 1.0) throw Error("discharging efficiency must be at least 1");
    if (s_init < s_min || s_init > s_max) throw Error("initial SoC outside its bounds");
    if (!(r > 0.0)) throw Error("cost weight must be positive");
}

double DemandProfile::operator()(double t) const {
    if (const auto* sin_terms = std::get_if<Sinusoids>(&source)) {
        double p = 0.0;
        for (const auto& term : sin_terms->terms) {
            p += term.amplitude * std::sin(term.omega * t + term.phase);
        }
        return p;
    }
    const auto& samples = std::get<Samples>(source);
    if (samples.values.empty()) throw Error("demand table is empty");
    auto idx = static_cast<long>(std::floor((t - samples.t0) / samples.dt));
    idx = std::clamp(idx, 0L, static_cast<long>(samples.values.size()) - 1L);
    return samples.values[static_cast<std::size_t>(idx)];
}

namespace {

struct Layout {
    int m;
    int T;
    int xi;  // (2m+1)T
    int nu;  // 2mT
};

Matrix dynamics_rows(const BatteryNode& node, int node_index0, const Layout& lay,
                     double delta) {
    // [A_i  B_i]: SoC recursion s_{l+1} - s_l = alpha * (eta_c u_c + eta_d u_d)
    Matrix rows = Matrix::Zero(lay.T, lay.xi);
    const double a = node.alpha(delta);
    for (int l = 0; l < lay.T; ++l) {
        rows(l, l) = 1.0;
        if (l > 0) rows(l, l - 1) = -1.0;
        const int off = lay.T + 2 * lay.m * l + 2 * node_index0;
        rows(l, off) = -a * node.eta_c;
        rows(l, off + 1) = -a * node.eta_d;
    }
    return rows;
}

Matrix demand_rows(const Layout& lay) {
    // [0  E]: per-slot balance -sum over copies = P_l
    Matrix rows = Matrix::Zero(lay.T, lay.xi);
    for (int l = 0; l < lay.T; ++l) {
        for (int c = 0; c < 2 * lay.m; ++c) rows(l, lay.T + 2 * lay.m * l + c) = -1.0;
    }
    return rows;
}

Box node_box(const std::vector<BatteryNode>& nodes, int node_index0, const Layout& lay) {
    Vector lo(lay.xi), hi(lay.xi);
    const auto& node = nodes[static_cast<std::size_t>(node_index0)];
    lo.head(lay.T).setConstant(node.s_min);
    hi.head(lay.T).setConstant(node.s_max);
    for (int l = 0; l < lay.T; ++l) {
        for (int j = 0; j < lay.m; ++j) {
            const int off = lay.T + 2 * lay.m * l + 2 * j;
            lo(off) = 0.0;
            hi(off) = nodes[static_cast<std::size_t>(j)].u_max;  // u_c copy of node j
            lo(off + 1) = nodes[static_cast<std::size_t>(j)].u_min;
            hi(off + 1) = 0.0;  // u_d
        }
    }
    return Box(std::move(lo), std::move(hi));
}

Quadratic control_cost(const std::vector<BatteryNode>& nodes, const Layout& lay) {
    Quadratic f;
    f.Q = Matrix::Zero(lay.xi, lay.xi);
    for (int l = 0; l < lay.T; ++l) {
        for (int j = 0; j < lay.m; ++j) {
            const int off = lay.T + 2 * lay.m * l + 2 * j;
            f.Q(off, off) = nodes[static_cast<std::size_t>(j)].r;
            f.Q(off + 1, off + 1) = nodes[static_cast<std::size_t>(j)].r;
        }
    }
    f.q = Vector::Zero(lay.xi);
    return f;
}

}  // namespace

MpcInstance build_mpc_instance(const std::vector<BatteryNode>& nodes, const Graph& graph,
                               const Vector& s_current, const DemandProfile& demand,
                               double t_now, int horizon, double delta, double rho1,
                               double rho2) {
    const int m = graph.agent_count;
    if (static_cast<int>(nodes.size()) != m) {
        throw DimensionMismatch("need one battery node per graph agent");
    }
    if (s_current.size() != m) throw DimensionMismatch("need one SoC per node");
    if (horizon < 1) throw Error("horizon must be at least 1");
    if (!(delta > 0.0)) throw Error("step length must be positive");
    for (const auto& node : nodes) node.validate();
    for (int i = 0; i < m; ++i) {
        const auto& node = nodes[static_cast<std::size_t>(i)];
        const double tol = 1e-7 * (1.0 + std::abs(s_current(i)));
        if (s_current(i) < node.s_min - tol || s_current(i) > node.s_max + tol) {
            throw Error("node " + std::to_string(i + 1) + " SoC outside its bounds");
        }
    }

    Layout lay{m, horizon, (2 * m + 1) * horizon, 2 * m * horizon};
    MpcInstance inst;
    inst.m = m;
    inst.horizon = horizon;
    inst.delta = delta;
    inst.demand = Vector::Zero(horizon);
    for (int l = 0; l < horizon; ++l) inst.demand(l) = demand(t_now + delta * l);

    inst.spec.graph = graph;
    inst.spec.n = lay.xi;
    inst.spec.rho1 = rho1;
    inst.spec.rho2 = rho2;
    inst.spec.eps_abs = 0.0;  // fixed iteration budget, never residual-gated
    inst.spec.eps_rel = 0.0;

    // u-part identity agreement shared by every edge
    Matrix a_edge = Matrix::Zero(lay.nu, lay.xi);
    a_edge.rightCols(lay.nu) = Matrix::Identity(lay.nu, lay.nu);
    const Vector b_edge = Vector::Zero(lay.nu);
    for (const auto& [i, j] : graph.edges) {
        inst.spec.agreements.push_back(build_edge_agreement(i, j, a_edge, b_edge, lay.xi));
    }

    const Matrix e_rows = demand_rows(lay);
    for (int i = 0; i < m; ++i) {
        const auto& node = nodes[static_cast<std::size_t>(i)];
        Matrix a_bar(2 * horizon, lay.xi);
        a_bar.topRows(horizon) = dynamics_rows(node, i, lay, delta);
        a_bar.bottomRows(horizon) = e_rows;
        Vector b_bar(2 * horizon);
        b_bar.setZero();
        b_bar(0) = s_current(i);
        b_bar.tail(horizon) = inst.demand;

        inst.spec.objectives.push_back(control_cost(nodes, lay));
        auto box = std::make_shared<Box>(node_box(nodes, i, lay));
        try {
            inst.spec.sets.push_back(std::make_shared<AffineSlice>(box, a_bar, b_bar));
        } catch (const EmptySlice&) {
            throw InfeasibleDemand("node " + std::to_string(i + 1) +
                                   ": demand over the horizon exceeds what the network "
                                   "can deliver from SoC " +
                                   format_double(s_current(i)));
        }
        inst.a_bar.push_back(std::move(a_bar));
        inst.b_bar_rhs.push_back(std::move(b_bar));
    }
    return inst;
}

AgentInit cold_start(int node_index, double s_current, const Vector& demand,
                     const std::vector<BatteryNode>& nodes, const MpcInstance& instance) {
    const int m = instance.m;
    const int T = instance.horizon;
    if (node_index < 1 || node_index > m) throw Error("node index out of range");
    if (demand.size() != T) throw DimensionMismatch("demand length differs from horizon");
    const auto& node = nodes[static_cast<std::size_t>(node_index - 1)];

    Vector xi = Vector::Zero(instance.xi_dim());
    double s = s_current;
    for (int l = 0; l < T; ++l) {
        // this node alone covers the slot demand, clamped to its own box
        double uc = 0.0, ud = 0.0;
        if (demand(l) >= 0.0) {
            ud = std::max(-demand(l), node.u_min);
        } else {
            uc = std::min(-demand(l), node.u_max);
        }
        const int off = instance.control_offset(node_index, l);
        xi(off) = uc;
        xi(off + 1) = ud;
        s += node.alpha(instance.delta) * (node.eta_c * uc + node.eta_d * ud);
        s = std::clamp(s, node.s_min, node.s_max);
        xi(l) = s;
    }

    AgentInit init;
    init.x = xi;
    init.z = xi;
    init.lambda = Vector::Zero(instance.xi_dim());
    init.mu = Vector::Zero(instance.xi_dim());
    return init;
}

namespace {

Vector shift_horizon(const Vector& v, int m, int T) {
    // drop slot 0, repeat the terminal slot
    Vector out(v.size());
    for (int l = 0; l < T; ++l) {
        const int src = std::min(l + 1, T - 1);
        out(l) = v(src);
        out.segment(T + 2 * m * l, 2 * m) = v.segment(T + 2 * m * src, 2 * m);
    }
    return out;
}

}  // namespace

AgentInit warm_start(const AgentState& previous, const MpcInstance& instance) {
    AgentInit init;
    init.x = shift_horizon(previous.x, instance.m, instance.horizon);
    init.z = shift_horizon(previous.z, instance.m, instance.horizon);
    init.lambda = shift_horizon(previous.lambda, instance.m, instance.horizon);
    init.mu = shift_horizon(previous.mu, instance.m, instance.horizon);
    return init;
}

std::vector<std::pair<double, double>> parse_own_controls(const Vector& z, int node_index,
                                                          int m, int horizon) {
    if (z.size() != static_cast<Eigen::Index>((2 * m + 1) * horizon)) {
        throw DimensionMismatch("decision vector has length " + std::to_string(z.size()) +
                                ", expected " + std::to_string((2 * m + 1) * horizon));
    }
    if (node_index < 1 || node_index > m) throw Error("node index out of range");
    std::vector<std::pair<double, double>> controls;
    controls.reserve(static_cast<std::size_t>(horizon));
    for (int l = 0; l < horizon; ++l) {
        const int off = horizon + 2 * m * l + 2 * (node_index - 1);
        controls.emplace_back(z(off), z(off + 1));
    }
    return controls;
}

SimulationLog mpc_loop(const std::vector<BatteryNode>& nodes, const Graph& graph,
                       const DemandProfile& demand, int horizon, double delta, int steps,
                       double rho1, double rho2, int n_iter, const MpcOptions& options) {
    if (steps < 1) throw Error("need at least one plant step");
    const int m = graph.agent_count;
    Vector s(m);
    for (int i = 0; i < m; ++i) s(i) = nodes[static_cast<std::size_t>(i)].s_init;

    SimulationLog log;
    log.steps.reserve(static_cast<std::size_t>(steps));
    std::vector<AgentState> previous;

    for (int l = 0; l < steps; ++l) {
        const double t_now = l * delta;
        const std::string where =
            "plant step " + std::to_string(l) + " (t=" + format_double(t_now) + "): ";
        try {
            MpcInstance inst = build_mpc_instance(nodes, graph, s, demand, t_now, horizon,
                                                  delta, rho1, rho2);
            inst.spec.max_iterations = n_iter;
            inst.spec.dual_step = options.dual_step;

            std::vector<AgentInit> init;
            init.reserve(static_cast<std::size_t>(m));
            if (options.warm_start && !previous.empty()) {
                for (int i = 0; i < m; ++i) init.push_back(warm_start(previous[i], inst));
            } else {
                for (int i = 0; i < m; ++i) {
                    init.push_back(cold_start(i + 1, s(i), inst.demand, nodes, inst));
                }
            }

            RunOptions run_options;
            run_options.threads = options.threads;
            RunResult result = run(inst.spec, init, run_options);

            SimulationStep step;
            step.t = t_now;
            step.demand = inst.demand(0);
            step.controls = Matrix::Zero(m, 2);
            for (int i = 0; i < m; ++i) {
                auto own = parse_own_controls(result.agents[i].z, i + 1, m, horizon);
                step.controls(i, 0) = own[0].first;
                step.controls(i, 1) = own[0].second;
            }
            step.delivered = -(step.controls.col(0).sum() + step.controls.col(1).sum());
            // zero-order hold of the slot-0 control over [t, t+delta] on the
            // plant recursion (identical to the prediction model)
            for (int i = 0; i < m; ++i) {
                const auto& node = nodes[static_cast<std::size_t>(i)];
                s(i) += node.alpha(delta) *
                        (node.eta_c * step.controls(i, 0) + node.eta_d * step.controls(i, 1));
            }
            step.soc = s;
            const auto& tail = result.trace.records.back();
            step.step_residual = std::max(tail.primal_residual, std::sqrt(tail.w1));
            step.admm_iterations = result.iterations;
            log.steps.push_back(std::move(step));
            previous = std::move(result.agents);
        } catch (const InfeasibleDemand& err) {
            throw InfeasibleDemand(where + err.what());
        } catch (const NotConverged& err) {
            throw NotConverged(where + err.what(), err.iterations, err.residual);
        } catch (const NonFiniteIterate& err) {
            throw NonFiniteIterate(where + err.what(), err.iteration);
        } catch (const Error& err) {
            throw Error(where + err.what());
        }
    }
    return log;
}

void SimulationLog::write_csv(std::ostream& out) const {
    out << "t,node,soc,u_c,u_d,delivered_power,demand,step_residual\n";
    for (const auto& step : steps) {
        for (Eigen::Index i = 0; i < step.soc.size(); ++i) {
            out << format_double(step.t) << ',' << (i + 1) << ','
                << format_double(step.soc(i)) << ',' << format_double(step.controls(i, 0))
                << ',' << format_double(step.controls(i, 1)) << ','
                << format_double(step.delivered) << ',' << format_double(step.demand) << ','
                << format_double(step.step_residual) << '\n';
        }
    }
}

}  // namespace edgeadmm
