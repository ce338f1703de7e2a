#include "edgeadmm/admm.hpp"

#include <chrono>
#include <cmath>
#include <memory>

#include "detail_parallel.hpp"
#include "edgeadmm/format.hpp"

namespace edgeadmm {

void ProblemSpec::validate() const {
    const int m = graph.agent_count;
    if (m <= 0) throw Error("spec has no agents");
    if (static_cast<int>(objectives.size()) != m) {
        throw DimensionMismatch("need one objective per agent");
    }
    if (static_cast<int>(sets.size()) != m) {
        throw DimensionMismatch("need one convex set per agent");
    }
    if (static_cast<int>(agreements.size()) != graph.edge_count()) {
        throw DimensionMismatch("need one agreement per edge");
    }
    if (n <= 0) throw Error("agent dimension must be positive");
    if (!(rho1 > 0.0) || !(rho2 > 0.0)) throw Error("penalty weights must be positive");
    if (max_iterations < 1) throw Error("max_iterations must be at least 1");
    for (int i = 0; i < m; ++i) {
        if (sets[i]->dim() != n) {
            throw DimensionMismatch("agent " + std::to_string(i + 1) +
                                    ": set dimension differs from n");
        }
        if (const auto* quad = std::get_if<Quadratic>(&objectives[i])) {
            if (quad->Q.rows() != n) {
                throw DimensionMismatch("agent " + std::to_string(i + 1) +
                                        ": Q dimension differs from n");
            }
        }
    }
    for (std::size_t l = 0; l < agreements.size(); ++l) {
        const auto& e = agreements[l];
        if (e.i != graph.edges[l].first || e.j != graph.edges[l].second) {
            throw DimensionMismatch("agreement " + std::to_string(l) +
                                    " out of order with the edge list");
        }
        if (e.A.cols() != n) {
            throw DimensionMismatch("agreement " + std::to_string(l) +
                                    ": A columns differ from n");
        }
    }
}

int ProblemSpec::total_agreement_dim() const {
    int total = 0;
    for (const auto& e : agreements) total += static_cast<int>(e.A.rows());
    return total;
}

double ProblemSpec::objective_total(const std::vector<Vector>& x) const {
    double v = 0.0;
    for (std::size_t i = 0; i < objectives.size(); ++i) {
        v += objective_value(objectives[i], x[i]);
    }
    return v;
}

std::vector<AgentInit> default_init(const ProblemSpec& spec) {
    std::vector<AgentInit> init(spec.graph.agent_count);
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        init[i].x = spec.sets[i]->project(Vector::Zero(spec.n));
        init[i].z = init[i].x;
        init[i].lambda = Vector::Zero(spec.n);
        init[i].mu = Vector::Zero(spec.n);
    }
    return init;
}

DualUpdateResult dual_updates(const Vector& lambda, const Vector& mu, const Vector& x_new,
                              const Vector& z_new,
                              const std::vector<DualNeighborTerm>& neighbors,
                              double step_lambda, double step_mu) {
    DualUpdateResult out;
    out.lambda = lambda + step_lambda * (x_new - z_new);
    out.mu = mu;
    for (const auto& nb : neighbors) {
        out.mu.noalias() += step_mu * (nb.P * (x_new - nb.x_new - nb.b_bar));
    }
    return out;
}

bool stop_check(const TraceRecord& tail, const ProblemSpec& spec) {
    const double mn = static_cast<double>(spec.graph.agent_count) * spec.n;
    const double primal_thresh = std::sqrt(mn) * spec.eps_abs +
                                 spec.eps_rel * std::max(tail.x_norm, tail.z_norm);
    const double edge_thresh = std::sqrt(static_cast<double>(spec.total_agreement_dim())) *
                                   spec.eps_abs +
                               spec.eps_rel * tail.x_norm;
    return tail.primal_residual <= primal_thresh && std::sqrt(tail.w1) <= edge_thresh;
}

void IterationTrace::write_csv(std::ostream& out) const {
    out << "k,primal_residual,W1,objective,W2,V,millis\n";
    for (const auto& rec : records) {
        out << rec.k << ',' << format_double(rec.primal_residual) << ','
            << format_double(rec.w1) << ',' << format_double(rec.objective) << ',';
        if (rec.w2) out << format_double(*rec.w2);
        out << ',';
        if (rec.lyapunov) out << format_double(*rec.lyapunov);
        out << ',' << format_double(rec.millis) << '\n';
    }
}

Vector RunResult::stacked_x() const {
    if (agents.empty()) return {};
    const Eigen::Index n = agents.front().x.size();
    Vector out(static_cast<Eigen::Index>(agents.size()) * n);
    for (std::size_t i = 0; i < agents.size(); ++i) out.segment(i * n, n) = agents[i].x;
    return out;
}

Vector RunResult::stacked_z() const {
    if (agents.empty()) return {};
    const Eigen::Index n = agents.front().z.size();
    Vector out(static_cast<Eigen::Index>(agents.size()) * n);
    for (std::size_t i = 0; i < agents.size(); ++i) out.segment(i * n, n) = agents[i].z;
    return out;
}

namespace {

struct NeighborLink {
    int j = 0;           // 0-based neighbor index
    const Matrix* P = nullptr;
    Vector b_bar;        // oriented from this agent's side
};

Vector stack(const std::vector<Vector>& parts, int n) {
    Vector out(static_cast<Eigen::Index>(parts.size()) * n);
    for (std::size_t i = 0; i < parts.size(); ++i) out.segment(i * n, n) = parts[i];
    return out;
}

}  // namespace

RunResult run(const ProblemSpec& spec, const std::vector<AgentInit>& init,
              const RunOptions& options) {
    spec.validate();
    const int m = spec.graph.agent_count;
    const int n = spec.n;
    if (static_cast<int>(init.size()) != m) {
        throw DimensionMismatch("need one initial state per agent");
    }
    for (const auto& a : init) {
        if (a.x.size() != n || a.z.size() != n || a.lambda.size() != n || a.mu.size() != n) {
            throw DimensionMismatch("initial state has wrong dimension");
        }
        if (!a.x.allFinite() || !a.z.allFinite() || !a.lambda.allFinite() || !a.mu.allFinite()) {
            throw NonFiniteIterate("initial state is not finite", 0);
        }
    }

    // Per-agent neighbor links with the agreement oriented from the agent's
    // side (stored (i,j) keeps b_bar; the other endpoint sees -b_bar).
    std::vector<std::vector<NeighborLink>> links(m);
    for (const auto& e : spec.agreements) {
        NeighborLink from_i{e.j - 1, &e.P, e.b_bar};
        NeighborLink from_j{e.i - 1, &e.P, -e.b_bar};
        links[e.i - 1].push_back(std::move(from_i));
        links[e.j - 1].push_back(std::move(from_j));
    }

    // Constant normal matrices for quadratic agents, factored once.
    std::vector<std::unique_ptr<QuadraticXSolver>> cached(m);
    for (int i = 0; i < m; ++i) {
        if (const auto* quad = std::get_if<Quadratic>(&spec.objectives[i])) {
            std::vector<const Matrix*> projs;
            projs.reserve(links[i].size());
            for (const auto& nb : links[i]) projs.push_back(nb.P);
            cached[i] = std::make_unique<QuadraticXSolver>(*quad, spec.rho1, spec.rho2, projs);
        }
    }

    const double step_lambda = spec.dual_step == DualStepMode::Unit ? 1.0 : spec.rho1;
    const double step_mu = spec.dual_step == DualStepMode::Unit ? 1.0 : spec.rho2;

    std::vector<Vector> x(m), z(m), lam(m), mu(m);
    for (int i = 0; i < m; ++i) {
        x[i] = init[i].x;
        z[i] = init[i].z;
        lam[i] = init[i].lambda;
        mu[i] = init[i].mu;
    }
    std::vector<Vector> x_new(m), z_new(m), lam_new(m), mu_new(m);

    detail::BulkPool pool(options.threads);
    RunResult result;
    result.trace.records.reserve(spec.max_iterations + 1);

    const auto t_start = std::chrono::steady_clock::now();
    auto record = [&](int k) {
        TraceRecord rec;
        rec.k = k;
        double pr2 = 0.0, xn2 = 0.0, zn2 = 0.0;
        for (int i = 0; i < m; ++i) {
            pr2 += (x[i] - z[i]).squaredNorm();
            xn2 += x[i].squaredNorm();
            zn2 += z[i].squaredNorm();
        }
        rec.primal_residual = std::sqrt(pr2);
        rec.x_norm = std::sqrt(xn2);
        rec.z_norm = std::sqrt(zn2);
        Vector xs = stack(x, n);
        rec.w1 = edge_residual_w1(xs, spec.agreements, n);
        rec.objective = spec.objective_total(x);
        if (options.oracle) {
            rec.w2 = (xs - options.oracle->x_star).squaredNorm();
            const double rho = options.oracle->rho;
            Vector y(2 * static_cast<Eigen::Index>(m) * n);
            y.head(m * n) = stack(lam, n);
            y.tail(m * n) = stack(mu, n);
            const double zerr = (stack(z, n) - options.oracle->z_star).squaredNorm();
            rec.lyapunov = (y - options.oracle->y_star).squaredNorm() / rho + rho * zerr;
        }
        rec.millis = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();
        result.trace.records.push_back(std::move(rec));
    };
    record(0);

    bool converged = false;
    int k = 0;
    while (k < spec.max_iterations && !converged) {
        ++k;
        // x, z and lambda: needs only the agent's own state plus the
        // neighbor cache from the previous barrier.
        pool.parallel_for(m, [&](int i) {
            SubproblemData data{spec.objectives[i], z[i], lam[i], mu[i],
                                {},
                                spec.rho1,
                                spec.rho2,
                                spec.coupling,
                                &x[i]};
            data.neighbors.reserve(links[i].size());
            for (const auto& nb : links[i]) {
                data.neighbors.push_back(NeighborTerm{*nb.P, nb.b_bar, x[nb.j], mu[nb.j]});
            }
            x_new[i] = solve_x_update(data);
            z_new[i] = spec.sets[i]->project(x_new[i] + lam[i] / spec.rho1);
            lam_new[i] = lam[i] + step_lambda * (x_new[i] - z_new[i]);
        });
        // barrier: x_new visible to all; edge duals advance on the fresh x.
        pool.parallel_for(m, [&](int i) {
            mu_new[i] = mu[i];
            for (const auto& nb : links[i]) {
                mu_new[i].noalias() +=
                    step_mu * (*nb.P * (x_new[i] - x_new[nb.j] - nb.b_bar));
            }
        });
        x.swap(x_new);
        z.swap(z_new);
        lam.swap(lam_new);
        mu.swap(mu_new);

        for (int i = 0; i < m; ++i) {
            if (!x[i].allFinite() || !z[i].allFinite() || !lam[i].allFinite() ||
                !mu[i].allFinite()) {
                throw NonFiniteIterate("iterate became non-finite at iteration " +
                                           std::to_string(k),
                                       k);
            }
        }
        record(k);
        converged = stop_check(result.trace.records.back(), spec);
    }

    result.agents.resize(m);
    for (int i = 0; i < m; ++i) {
        result.agents[i] = AgentState{x[i], z[i], lam[i], mu[i]};
    }
    result.converged = converged;
    result.iterations = k;
    return result;
}

}  // namespace edgeadmm
