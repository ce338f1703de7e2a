#include "edgeadmm/graph.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <set>
#include <sstream>

namespace edgeadmm {

Graph Graph::build(int agent_count, std::vector<std::pair<int, int>> edges) {
    if (agent_count <= 0) throw Error("graph must have at least one agent");
    std::set<std::pair<int, int>> seen;
    for (const auto& [i, j] : edges) {
        if (i == j) {
            throw Error("self-loop at agent " + std::to_string(i));
        }
        if (i < 1 || i > agent_count || j < 1 || j > agent_count) {
            throw Error("edge (" + std::to_string(i) + "," + std::to_string(j) +
                        ") references an agent outside 1.." + std::to_string(agent_count));
        }
        auto key = std::minmax(i, j);
        if (!seen.insert(key).second) {
            throw Error("edge (" + std::to_string(i) + "," + std::to_string(j) +
                        ") stored more than once");
        }
    }
    Graph g;
    g.agent_count = agent_count;
    g.edges = std::move(edges);
    g.neighbors.assign(agent_count, {});
    for (const auto& [i, j] : g.edges) {
        g.neighbors[i - 1].push_back(j);
        g.neighbors[j - 1].push_back(i);
    }
    for (auto& list : g.neighbors) std::sort(list.begin(), list.end());
    return g;
}

EdgeAgreement build_edge_agreement(int i, int j, const Matrix& A, const Vector& b, int n) {
    if (A.cols() != n) {
        throw DimensionMismatch("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                "): A has " + std::to_string(A.cols()) +
                                " columns, expected " + std::to_string(n));
    }
    if (A.rows() < 1 || A.rows() > n) {
        throw DimensionMismatch("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                "): A must have between 1 and " + std::to_string(n) + " rows");
    }
    if (b.size() != A.rows()) {
        throw DimensionMismatch("edge (" + std::to_string(i) + "," + std::to_string(j) +
                                "): b has length " + std::to_string(b.size()) +
                                ", expected " + std::to_string(A.rows()));
    }

    Matrix gram = A * A.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
    const double max_ev = eig.eigenvalues().maxCoeff();
    const double min_ev = eig.eigenvalues().minCoeff();
    if (!(min_ev > 0.0) || max_ev / min_ev > 1e12) {
        throw RankDeficient("edge (" + std::to_string(i) + "," + std::to_string(j) +
                            "): AA' is singular or nearly so (cond > 1e12)");
    }

    Eigen::LLT<Matrix> llt(gram);
    EdgeAgreement e;
    e.i = i;
    e.j = j;
    e.A = A;
    e.b = b;
    e.P = A.transpose() * llt.solve(A);
    e.b_bar = A.transpose() * llt.solve(b);
    return e;
}

Matrix incidence(const Graph& graph) {
    if (graph.agent_count == 0) throw Error("incidence of an empty graph");
    Matrix H = Matrix::Zero(graph.edge_count(), graph.agent_count);
    for (int l = 0; l < graph.edge_count(); ++l) {
        const auto& [i, j] = graph.edges[l];
        H(l, i - 1) = 1.0;
        H(l, j - 1) = -1.0;
    }
    return H;
}

StackedOperators stack_operators(const Graph& graph,
                                 const std::vector<EdgeAgreement>& agreements, int n) {
    if (static_cast<int>(agreements.size()) != graph.edge_count()) {
        throw DimensionMismatch("need one agreement per edge: " +
                                std::to_string(agreements.size()) + " given, " +
                                std::to_string(graph.edge_count()) + " edges");
    }
    const int mb = graph.edge_count();
    StackedOperators ops;
    ops.m = graph.agent_count;
    ops.n = n;
    ops.H = incidence(graph);
    ops.H_bar = Matrix::Zero(mb * n, graph.agent_count * n);
    ops.P_bar = Matrix::Zero(mb * n, mb * n);
    ops.b_bar = Vector::Zero(mb * n);
    for (int l = 0; l < mb; ++l) {
        const auto& e = agreements[l];
        if (e.i != graph.edges[l].first || e.j != graph.edges[l].second) {
            throw DimensionMismatch("agreement " + std::to_string(l) +
                                    " does not match the stored edge order");
        }
        if (e.P.rows() != n) {
            throw DimensionMismatch("agreement " + std::to_string(l) + " has dimension " +
                                    std::to_string(e.P.rows()) + ", expected " + std::to_string(n));
        }
        for (int c = 0; c < graph.agent_count; ++c) {
            if (ops.H(l, c) != 0.0) {
                ops.H_bar.block(l * n, c * n, n, n) = ops.H(l, c) * Matrix::Identity(n, n);
            }
        }
        ops.P_bar.block(l * n, l * n, n, n) = e.P;
        ops.b_bar.segment(l * n, n) = e.b_bar;
    }
    return ops;
}

ConsistencyReport check_consistency(const std::vector<EdgeAgreement>& agreements) {
    ConsistencyReport report;
    for (std::size_t a = 0; a < agreements.size(); ++a) {
        for (std::size_t b = a + 1; b < agreements.size(); ++b) {
            const auto& ea = agreements[a];
            const auto& eb = agreements[b];
            if (ea.i != eb.j || ea.j != eb.i) continue;
            // both orientations of the same undirected edge
            const bool a_ok = ea.A.rows() == eb.A.rows() && ea.A.cols() == eb.A.cols() &&
                              (ea.A - eb.A).cwiseAbs().maxCoeff() <= 1e-12;
            const bool b_ok = ea.b.size() == eb.b.size() &&
                              (ea.b + eb.b).cwiseAbs().maxCoeff() <= 1e-12;
            if (!a_ok || !b_ok) {
                report.ok = false;
                report.edge_i = ea.i;
                report.edge_j = ea.j;
                std::ostringstream msg;
                msg << "edge (" << ea.i << "," << ea.j << "): reversed orientation must have "
                    << (a_ok ? "b flipped in sign" : "the same A");
                report.message = msg.str();
                return report;
            }
        }
    }
    return report;
}

namespace {

Eigen::Index numerical_rank(const Matrix& M) {
    if (M.size() == 0) return 0;
    Eigen::BDCSVD<Matrix> svd(M);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0) return 0;
    const double thresh = 1e-9 * sv(0);
    Eigen::Index r = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
        if (sv(k) > thresh) ++r;
    }
    return r;
}

}  // namespace

WellConfiguredReport check_well_configured(const StackedOperators& ops) {
    WellConfiguredReport report;
    if (ops.P_bar.size() == 0) {
        report.literal = true;  // no edges, nothing to intersect
        return report;
    }
    report.rank_ht_p = numerical_rank(ops.H_bar.transpose() * ops.P_bar);
    report.rank_p = numerical_rank(ops.P_bar);
    report.literal = report.rank_ht_p == report.rank_p;
    return report;
}

double edge_residual_w1(const Vector& x, const std::vector<EdgeAgreement>& agreements, int n) {
    double w1 = 0.0;
    for (const auto& e : agreements) {
        const auto xi = x.segment((e.i - 1) * n, n);
        const auto xj = x.segment((e.j - 1) * n, n);
        w1 += (e.A * (xi - xj) - e.b).squaredNorm();
    }
    return w1;
}

}  // namespace edgeadmm
