#include "edgeadmm/oracle.hpp"

#include <Eigen/QR>
#include <cmath>

#include "edgeadmm/format.hpp"

namespace edgeadmm {

Vector CompactForm::residual(const Vector& x, const Vector& z) const {
    return C * x + D * z - E;
}

CompactForm build_compact_form(const StackedOperators& ops) {
    const int mn = ops.m * ops.n;
    CompactForm cf;
    cf.mn = mn;
    if (ops.H_bar.size() == 0) {
        cf.L = Matrix::Zero(mn, mn);
    } else {
        cf.L = ops.H_bar.transpose() * ops.P_bar * ops.H_bar;
    }
    cf.C = Matrix::Zero(2 * mn, mn);
    cf.C.topRows(mn) = Matrix::Identity(mn, mn);
    cf.C.bottomRows(mn) = cf.L;
    cf.D = Matrix::Zero(2 * mn, mn);
    cf.D.topRows(mn) = -Matrix::Identity(mn, mn);
    cf.E = Vector::Zero(2 * mn);
    if (ops.H_bar.size() != 0) {
        cf.E.tail(mn) = ops.H_bar.transpose() * (ops.P_bar * ops.b_bar);
    }
    return cf;
}

namespace {

double stacked_objective(const ProblemSpec& spec, const Vector& x) {
    double v = 0.0;
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        v += objective_value(spec.objectives[i], x.segment(i * spec.n, spec.n));
    }
    return v;
}

Vector stacked_gradient(const ProblemSpec& spec, const Vector& x) {
    Vector g(x.size());
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        g.segment(i * spec.n, spec.n) =
            objective_gradient(spec.objectives[i], x.segment(i * spec.n, spec.n));
    }
    return g;
}

Vector project_sets(const ProblemSpec& spec, const Vector& v) {
    Vector out(v.size());
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        out.segment(i * spec.n, spec.n) = spec.sets[i]->project(v.segment(i * spec.n, spec.n));
    }
    return out;
}

bool all_quadratic(const ProblemSpec& spec) {
    for (const auto& f : spec.objectives) {
        if (!std::holds_alternative<Quadratic>(f)) return false;
    }
    return true;
}

Matrix stacked_q(const ProblemSpec& spec) {
    const int mn = spec.graph.agent_count * spec.n;
    Matrix Q = Matrix::Zero(mn, mn);
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        Q.block(i * spec.n, i * spec.n, spec.n, spec.n) =
            std::get<Quadratic>(spec.objectives[i]).Q;
    }
    return Q;
}

Vector stacked_q_lin(const ProblemSpec& spec) {
    const int mn = spec.graph.agent_count * spec.n;
    Vector q(mn);
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        q.segment(i * spec.n, spec.n) = std::get<Quadratic>(spec.objectives[i]).q;
    }
    return q;
}

/// x-minimization of f(x) + y'Cx + rho/2 ||Cx + Dz - E||^2 for mixed smooth
/// objectives: backtracking gradient descent, warm-started.
Vector central_x_smooth(const ProblemSpec& spec, const CompactForm& cf, const Vector& z,
                        const Vector& y, double rho, const Vector& warm) {
    auto value = [&](const Vector& x) {
        Vector r = cf.residual(x, z);
        return stacked_objective(spec, x) + y.dot(cf.C * x) + 0.5 * rho * r.squaredNorm();
    };
    auto gradient = [&](const Vector& x) -> Vector {
        Vector r = cf.residual(x, z);
        return stacked_gradient(spec, x) + cf.C.transpose() * (y + rho * r);
    };
    Vector x = warm;
    double v = value(x);
    constexpr double armijo_c = 1e-4;
    for (int it = 0; it < 2000; ++it) {
        Vector g = gradient(x);
        if (g.cwiseAbs().maxCoeff() < 1e-10) return x;
        const double g2 = g.squaredNorm();
        double step = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            Vector trial = x - step * g;
            const double tv = value(trial);
            if (tv <= v - armijo_c * step * g2) {
                x = std::move(trial);
                v = tv;
                break;
            }
            step *= 0.5;
        }
    }
    Vector g = gradient(x);
    const double gn = g.cwiseAbs().maxCoeff();
    if (gn >= 1e-10) throw NotConverged("centralized x-step stalled", 2000, gn);
    return x;
}

struct CentralEngine {
    const ProblemSpec& spec;
    const CompactForm& cf;
    double rho;
    bool quadratic;
    Eigen::LDLT<Matrix> ldlt;  // 2Q + rho C'C when quadratic
    Vector qlin;

    CentralEngine(const ProblemSpec& s, const CompactForm& c, double r)
        : spec(s), cf(c), rho(r), quadratic(all_quadratic(s)) {
        if (quadratic) {
            Matrix M = 2.0 * stacked_q(spec) + rho * (cf.C.transpose() * cf.C);
            ldlt.compute(M);
            if (ldlt.info() != Eigen::Success) {
                throw SingularSystem("centralized x-step system not positive definite");
            }
            qlin = stacked_q_lin(spec);
        }
    }

    CentralState step(const CentralState& state) const {
        CentralState next;
        if (quadratic) {
            Vector rhs = -qlin - cf.C.transpose() * (state.y + rho * (cf.D * state.z - cf.E));
            next.x = ldlt.solve(rhs);
        } else {
            next.x = central_x_smooth(spec, cf, state.z, state.y, rho, state.x);
        }
        const Vector lambda = state.y.head(cf.mn);
        next.z = project_sets(spec, next.x + lambda / rho);
        next.y = state.y + rho * cf.residual(next.x, next.z);
        return next;
    }
};

}  // namespace

CentralState centralized_admm_step(const CentralState& state, const ProblemSpec& spec,
                                   const CompactForm& compact, double rho) {
    return CentralEngine(spec, compact, rho).step(state);
}

CentralRunResult run_centralized_admm(const ProblemSpec& spec, const CompactForm& compact,
                                      double rho, int max_iterations, double tol,
                                      bool record_history) {
    CentralEngine engine(spec, compact, rho);
    const int mn = compact.mn;
    CentralState state;
    state.x = Vector::Zero(mn);
    state.z = project_sets(spec, state.x);
    state.x = state.z;
    state.y = Vector::Zero(2 * mn);

    CentralRunResult result;
    if (record_history) result.history.states.push_back(state);
    for (int k = 0; k < max_iterations; ++k) {
        CentralState next = engine.step(state);
        Vector r = compact.residual(next.x, next.z);
        const double dz = (next.z - state.z).norm();
        if (record_history) {
            result.history.states.push_back(next);
            result.history.residuals.push_back(r);
        }
        state = std::move(next);
        ++result.iterations;
        if (r.norm() <= tol && dz <= tol) {
            result.converged = true;
            break;
        }
    }
    result.final_state = state;
    return result;
}

namespace {

/// Projection onto the edge manifold {x : P_bar(H_bar x - b_bar) = 0}
/// through the pseudo-inverse of G = P_bar H_bar (G may be rank deficient
/// on cyclic graphs).
struct ManifoldProjector {
    Matrix G;
    Vector h;
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod;
    bool trivial = false;  // no edges: whole space

    ManifoldProjector(const StackedOperators& ops) {
        if (ops.H_bar.size() == 0) {
            trivial = true;
            return;
        }
        G = ops.P_bar * ops.H_bar;
        h = ops.P_bar * ops.b_bar;
        cod.compute(G);
        // consistency: h must be reachable, otherwise no point satisfies
        // the agreements at all
        Vector x0 = cod.solve(h);
        if ((G * x0 - h).norm() > 1e-8 * (1.0 + h.norm())) {
            throw Infeasible("edge agreements are mutually inconsistent");
        }
    }

    Vector project(const Vector& v) const {
        if (trivial) return v;
        return v - cod.solve(G * v - h);
    }
};

/// Dykstra between the edge manifold (affine, no correction needed) and the
/// product of the agents' sets.
Vector project_feasible(const ProblemSpec& spec, const ManifoldProjector& manifold,
                        const Vector& v, double tol = 1e-12, long max_sweeps = 20000) {
    Vector x = manifold.project(v);
    Vector p = Vector::Zero(v.size());
    double change = std::numeric_limits<double>::infinity();
    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        Vector x_prev = x;
        Vector y = project_sets(spec, x + p);
        p = x + p - y;
        x = manifold.project(y);
        change = (x - x_prev).cwiseAbs().maxCoeff();
        if (change < tol) return x;
    }
    if (change > 1e-6) {
        throw NotConverged("feasible-set projection stalled", max_sweeps, change);
    }
    return x;
}

}  // namespace

SaddleCertificate solve_centralized(const ProblemSpec& spec,
                                    const CentralizedSolveOptions& options) {
    spec.validate();
    StackedOperators ops = stack_operators(spec.graph, spec.agreements, spec.n);
    ManifoldProjector manifold(ops);

    // certify the feasible set nonempty
    Vector probe = project_feasible(spec, manifold, Vector::Zero(ops.m * ops.n));
    {
        const double scale = 1.0 + probe.cwiseAbs().maxCoeff();
        const double set_gap = (project_sets(spec, probe) - probe).cwiseAbs().maxCoeff();
        const double manifold_gap = (manifold.project(probe) - probe).cwiseAbs().maxCoeff();
        if (set_gap > 1e-6 * scale || manifold_gap > 1e-6 * scale) {
            throw Infeasible("agreement manifold does not meet the local sets");
        }
    }

    // projected gradient with Armijo backtracking
    Vector x = probe;
    double fx = stacked_objective(spec, x);
    double step = 1.0;
    for (long it = 0; it < options.max_iterations; ++it) {
        Vector g = stacked_gradient(spec, x);
        Vector x_next;
        double f_next = 0.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls) {
            Vector trial = project_feasible(spec, manifold, x - step * g);
            const double ft = stacked_objective(spec, trial);
            Vector d = trial - x;
            if (ft <= fx + g.dot(d) + d.squaredNorm() / (2.0 * step) + 1e-14) {
                x_next = std::move(trial);
                f_next = ft;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            throw NotConverged("projected gradient line search failed", it, fx);
        }
        const double change = (x_next - x).cwiseAbs().maxCoeff();
        x = std::move(x_next);
        fx = f_next;
        step = std::min(step * 2.0, 1e6);
        if (change < options.step_tol) break;
    }

    // dual recovery from a long centralized run
    CompactForm cf = build_compact_form(ops);
    CentralRunResult admm = run_centralized_admm(spec, cf, spec.rho1,
                                                 options.admm_max_iterations,
                                                 options.admm_tol, false);

    SaddleCertificate cert;
    cert.x = x;
    cert.z = admm.final_state.z;
    cert.y = admm.final_state.y;
    cert.objective = fx;
    KktReport kkt = kkt_check(cert, spec, cf);
    cert.kkt_feasibility = kkt.feasibility;
    cert.kkt_stationarity = kkt.stationarity;
    return cert;
}

KktReport kkt_check(const SaddleCertificate& cert, const ProblemSpec& spec,
                    const CompactForm& compact) {
    KktReport report;
    report.feasibility = compact.residual(cert.x, cert.z).norm();

    // x-block stationarity: grad f(x*) + C'y* = 0
    Vector gx = stacked_gradient(spec, cert.x) + compact.C.transpose() * cert.y;
    double stat = gx.cwiseAbs().maxCoeff();

    // z-block: -D'y* = lambda* must sit in the normal cone at z*. For boxes
    // that is per-coordinate complementarity; whole space forces zero.
    const Vector lambda = cert.y.head(compact.mn);
    for (int i = 0; i < spec.graph.agent_count; ++i) {
        const auto zi = cert.z.segment(i * spec.n, spec.n);
        const auto li = lambda.segment(i * spec.n, spec.n);
        if (const auto* box = dynamic_cast<const Box*>(spec.sets[i].get())) {
            for (int c = 0; c < spec.n; ++c) {
                const double lo = box->lower()(c), hi = box->upper()(c);
                const double ztol = 1e-7 * (1.0 + std::abs(zi(c)));
                const bool at_lo = std::isfinite(lo) && zi(c) <= lo + ztol;
                const bool at_hi = std::isfinite(hi) && zi(c) >= hi - ztol;
                double gap;
                if (at_lo && at_hi) {
                    gap = 0.0;  // degenerate interval: any component allowed
                } else if (at_lo) {
                    gap = std::max(li(c), 0.0);
                } else if (at_hi) {
                    gap = std::max(-li(c), 0.0);
                } else {
                    gap = std::abs(li(c));
                }
                stat = std::max(stat, gap);
            }
        } else if (const auto* slice = dynamic_cast<const AffineSlice*>(spec.sets[i].get())) {
            // remove the best row-space component, then treat the rest as
            // a free-space multiplier (diagnostic; exact for interior z)
            const Matrix& A = slice->a_eq();
            Vector resid = li - A.transpose() *
                                    (A * A.transpose()).ldlt().solve(A * li);
            stat = std::max(stat, resid.cwiseAbs().maxCoeff());
        } else {
            stat = std::max(stat, li.cwiseAbs().maxCoeff());
        }
    }
    report.stationarity = stat;
    return report;
}

LyapunovSeries lyapunov_series(const CentralHistory& history, const SaddleCertificate& cert,
                               const CompactForm& compact, double rho) {
    LyapunovSeries series;
    series.v.reserve(history.states.size());
    for (const auto& state : history.states) {
        const double dual = (state.y - cert.y).squaredNorm() / rho;
        const double primal = rho * (compact.D * (state.z - cert.z)).squaredNorm();
        series.v.push_back(dual + primal);
    }
    constexpr double slack = 1e-8;
    for (std::size_t t = 0; t + 1 < history.states.size(); ++t) {
        const Vector& r = history.residuals[t];
        const Vector dz = compact.D * (history.states[t + 1].z - history.states[t].z);
        const double bound = series.v[t] - rho * r.squaredNorm() - rho * dz.squaredNorm();
        const double violation = series.v[t + 1] - bound;
        series.worst_violation = std::max(series.worst_violation, violation);
        if (violation > slack) series.decrease_holds = false;
    }
    return series;
}

LemmaReport check_saddle_inequalities(const CentralHistory& history,
                                      const SaddleCertificate& cert,
                                      const ProblemSpec& spec, const CompactForm& compact,
                                      double rho) {
    LemmaReport report;
    const double lstar = cert.objective;
    for (std::size_t t = 0; t + 1 < history.states.size(); ++t) {
        const CentralState& prev = history.states[t];
        const CentralState& cur = history.states[t + 1];
        const Vector& r = history.residuals[t];
        const double lk = stacked_objective(spec, cur.x);

        const double lower_gap = (lstar - lk) - cert.y.dot(r);
        report.worst_lower = std::max(report.worst_lower, lower_gap);

        const Vector ddz = compact.D * (cur.z - prev.z);
        const Vector dzs = compact.D * (cur.z - cert.z);
        const double upper_bound = -cur.y.dot(r) - rho * ddz.dot(-r + dzs);
        report.worst_upper = std::max(report.worst_upper, (lk - lstar) - upper_bound);
    }
    LyapunovSeries series = lyapunov_series(history, cert, compact, rho);
    report.worst_lyapunov = series.worst_violation;
    return report;
}

void LyapunovSeries::write_csv(std::ostream& out) const {
    out << "k,V\n";
    for (std::size_t k = 0; k < v.size(); ++k) {
        out << k << ',' << format_double(v[k]) << '\n';
    }
}

void write_certificate_csv(const SaddleCertificate& cert, std::ostream& out) {
    out << "name,index,value\n";
    for (Eigen::Index k = 0; k < cert.x.size(); ++k) {
        out << "x," << k << ',' << format_double(cert.x(k)) << '\n';
    }
    for (Eigen::Index k = 0; k < cert.z.size(); ++k) {
        out << "z," << k << ',' << format_double(cert.z(k)) << '\n';
    }
    for (Eigen::Index k = 0; k < cert.y.size(); ++k) {
        out << "y," << k << ',' << format_double(cert.y(k)) << '\n';
    }
    out << "objective,0," << format_double(cert.objective) << '\n';
}

}  // namespace edgeadmm
