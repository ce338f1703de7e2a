#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "edgeadmm/errors.hpp"

namespace edgeadmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected communication graph. Agent ids are 1-based. Each undirected
/// edge is stored once; the stored (i, j) order fixes its orientation.
struct Graph {
    int agent_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> neighbors;  // neighbors[i-1] = sorted ids of N_i

    static Graph build(int agent_count, std::vector<std::pair<int, int>> edges);

    int edge_count() const { return static_cast<int>(edges.size()); }
};

/// One edge's agreement data A(x_i - x_j) = b together with the derived
/// projector P = A'(AA')^{-1}A and offset b_bar = A'(AA')^{-1}b.
///
/// The reversed orientation shares A and P and flips the sign of b and b_bar,
/// so both endpoints see a consistent constraint.
struct EdgeAgreement {
    int i = 0;
    int j = 0;
    Matrix A;
    Vector b;
    Matrix P;
    Vector b_bar;

    EdgeAgreement reversed() const {
        EdgeAgreement r;
        r.i = j;
        r.j = i;
        r.A = A;
        r.b = -b;
        r.P = P;
        r.b_bar = -b_bar;
        return r;
    }
};

/// Stacked edge operators for an m-agent graph with state dimension n:
/// H (edge x agent incidence), H_bar = H (x) I_n, block-diagonal P_bar
/// and the stacked offsets b_bar, all in stored edge order.
struct StackedOperators {
    int m = 0;
    int n = 0;
    Matrix H;
    Matrix H_bar;
    Matrix P_bar;
    Vector b_bar;
};

/// Builds an EdgeAgreement, solving AA' by Cholesky rather than forming an
/// explicit inverse. Throws RankDeficient when cond(AA') > 1e12 and
/// DimensionMismatch on inconsistent sizes.
EdgeAgreement build_edge_agreement(int i, int j, const Matrix& A, const Vector& b, int n);

/// Oriented incidence matrix: row l has +1 at column i_l and -1 at column j_l
/// for the stored edge orientation (i_l, j_l).
Matrix incidence(const Graph& graph);

StackedOperators stack_operators(const Graph& graph,
                                 const std::vector<EdgeAgreement>& agreements, int n);

struct ConsistencyReport {
    bool ok = true;
    int edge_i = 0;
    int edge_j = 0;
    std::string message;
};

/// Verifies A_ij = A_ji and b_ij = -b_ji (entrywise to 1e-12) for every
/// edge that appears in both orientations in the list.
ConsistencyReport check_consistency(const std::vector<EdgeAgreement>& agreements);

struct WellConfiguredReport {
    bool literal = false;
    Eigen::Index rank_ht_p = 0;
    Eigen::Index rank_p = 0;
};

/// Rank test for ker(H_bar') ∩ image(P_bar) = {0}: the intersection is
/// trivial iff rank(H_bar' P_bar) = rank(P_bar). Diagnostic only; solution
/// quality is always judged through edge_residual_w1.
WellConfiguredReport check_well_configured(const StackedOperators& ops);

/// Sum of squared per-edge agreement violations sum ||A(x_i - x_j) - b||^2
/// for a stacked state x of m blocks of size n.
double edge_residual_w1(const Vector& x, const std::vector<EdgeAgreement>& agreements, int n);

}  // namespace edgeadmm
