#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "edgeadmm/graph.hpp"
#include "edgeadmm/rng.hpp"

using namespace edgeadmm;

namespace {

Matrix identity2() { return Matrix::Identity(2, 2); }

Vector vec2(double a, double b) {
    Vector v(2);
    v << a, b;
    return v;
}

// the 4-agent cyclic instance used throughout: edges (1,2),(2,3),(3,1),(3,4)
std::vector<EdgeAgreement> cyclic_agreements() {
    std::vector<EdgeAgreement> list;
    list.push_back(build_edge_agreement(1, 2, identity2(), vec2(0.0, 3.0), 2));
    list.push_back(build_edge_agreement(2, 3, identity2(), vec2(-2.6, -1.5), 2));
    list.push_back(build_edge_agreement(3, 1, identity2(), vec2(2.6, -1.5), 2));
    list.push_back(build_edge_agreement(3, 4, identity2(), vec2(-3.0, 0.0), 2));
    return list;
}

Graph cyclic_graph() { return Graph::build(4, {{1, 2}, {2, 3}, {3, 1}, {3, 4}}); }

Matrix random_full_rank(Rng& rng, int d, int n) {
    while (true) {
        Matrix A(d, n);
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < n; ++c) A(r, c) = rng.normal();
        }
        Eigen::JacobiSVD<Matrix> svd(A);
        if (svd.singularValues().minCoeff() > 1e-3) return A;
    }
}

}  // namespace

TEST_CASE("graph construction validates its invariants") {
    Graph g = Graph::build(3, {{1, 2}, {2, 3}});
    CHECK(g.edge_count() == 2);
    CHECK(g.neighbors[0] == std::vector<int>{2});
    CHECK(g.neighbors[1] == std::vector<int>{1, 3});
    CHECK(g.neighbors[2] == std::vector<int>{2});

    CHECK_THROWS_AS(Graph::build(3, {{1, 1}}), Error);                  // self-loop
    CHECK_THROWS_AS(Graph::build(3, {{1, 4}}), Error);                  // out of range
    CHECK_THROWS_AS(Graph::build(3, {{1, 2}, {2, 1}}), Error);          // duplicate
}

TEST_CASE("edge agreement with orthonormal square A keeps b") {
    EdgeAgreement e = build_edge_agreement(1, 2, identity2(), vec2(0.0, 3.0), 2);
    CHECK((e.P - identity2()).norm() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK((e.b_bar - vec2(0.0, 3.0)).norm() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("edge agreement with a single row picks the spanned coordinate") {
    Matrix A(1, 2);
    A << 1.0, 0.0;
    Vector b(1);
    b << 4.0;
    EdgeAgreement e = build_edge_agreement(1, 2, A, b, 2);
    Matrix expected(2, 2);
    expected << 1, 0, 0, 0;
    CHECK((e.P - expected).norm() < 1e-14);
    CHECK((e.b_bar - vec2(4.0, 0.0)).norm() < 1e-14);
}

TEST_CASE("edge (2,3) data from the 4-agent instance") {
    EdgeAgreement e = build_edge_agreement(2, 3, identity2(), vec2(-2.6, -1.5), 2);
    CHECK((e.P - identity2()).norm() < 1e-12);
    CHECK((e.b_bar - vec2(-2.6, -1.5)).norm() < 1e-12);
    EdgeAgreement r = e.reversed();
    CHECK(r.i == 3);
    CHECK(r.j == 2);
    CHECK((r.b - vec2(2.6, 1.5)).norm() < 1e-14);
}

TEST_CASE("edge agreement rejects bad input") {
    Matrix A(2, 2);
    A << 1, 0, 1, 0;  // dependent rows
    CHECK_THROWS_AS(build_edge_agreement(1, 2, A, vec2(1, 1), 2), RankDeficient);

    Vector b1(1);
    b1 << 1.0;
    CHECK_THROWS_AS(build_edge_agreement(1, 2, identity2(), b1, 2), DimensionMismatch);

    Matrix wide(3, 2);
    wide.setRandom();
    CHECK_THROWS_AS(build_edge_agreement(1, 2, wide, Vector::Zero(3), 2), DimensionMismatch);
}

TEST_CASE("projector invariants hold for random agreements") {
    Rng rng(42);
    for (int trial = 0; trial < 40; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 4));
        const int d = static_cast<int>(rng.uniform_int(1, n));
        Matrix A = random_full_rank(rng, d, n);
        Vector b(d);
        for (int k = 0; k < d; ++k) b(k) = 3.0 * rng.normal();
        EdgeAgreement e = build_edge_agreement(1, 2, A, b, n);

        CHECK((e.P * e.P - e.P).norm() < 1e-10);
        CHECK((e.P - e.P.transpose()).norm() < 1e-12);
        CHECK((e.P * e.b_bar - e.b_bar).norm() < 1e-8);
        CHECK((e.A * e.b_bar - e.b).norm() < 1e-8);
    }
}

TEST_CASE("incidence follows the stored orientation") {
    // storing the third edge as (1,3) reproduces the familiar 4x4 matrix
    Graph g = Graph::build(4, {{1, 2}, {2, 3}, {1, 3}, {3, 4}});
    Matrix H = incidence(g);
    Matrix expected(4, 4);
    expected << 1, -1, 0, 0,
                0, 1, -1, 0,
                1, 0, -1, 0,
                0, 0, 1, -1;
    CHECK((H - expected).norm() == 0.0);

    // the (3,1) storage flips that row
    Matrix H2 = incidence(cyclic_graph());
    Matrix row(1, 4);
    row << -1, 0, 1, 0;
    CHECK((H2.row(2) - row).norm() == 0.0);

    CHECK((incidence(Graph::build(2, {{1, 2}})) - (Matrix(1, 2) << 1, -1).finished()).norm() ==
          0.0);

    Matrix path = incidence(Graph::build(3, {{1, 2}, {2, 3}}));
    Matrix path_expected(2, 3);
    path_expected << 1, -1, 0, 0, 1, -1;
    CHECK((path - path_expected).norm() == 0.0);
}

TEST_CASE("incidence structure: zero row sums, 2 nonzeros per edge") {
    Matrix H = incidence(cyclic_graph());
    CHECK(H.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK((H.array() != 0.0).count() == 2 * cyclic_graph().edge_count());
}

TEST_CASE("stacked operators for the 4-agent instance") {
    StackedOperators ops = stack_operators(cyclic_graph(), cyclic_agreements(), 2);
    CHECK(ops.H_bar.rows() == 8);
    CHECK(ops.H_bar.cols() == 8);
    CHECK((ops.P_bar - Matrix::Identity(8, 8)).norm() < 1e-12);
    Vector expected(8);
    expected << 0, 3, -2.6, -1.5, 2.6, -1.5, -3, 0;
    CHECK((ops.b_bar - expected).norm() < 1e-12);
}

TEST_CASE("stacked operators block structure") {
    Graph single = Graph::build(2, {{1, 2}});
    auto e = build_edge_agreement(1, 2, Matrix::Identity(3, 3), Vector::Zero(3), 3);
    StackedOperators ops = stack_operators(single, {e}, 3);
    CHECK((ops.P_bar - Matrix::Identity(3, 3)).norm() < 1e-12);

    Graph two = Graph::build(3, {{1, 2}, {2, 3}});
    Matrix A1(1, 2), A2(1, 2);
    A1 << 1, 0;
    A2 << 0, 1;
    std::vector<EdgeAgreement> list{build_edge_agreement(1, 2, A1, Vector::Zero(1), 2),
                                    build_edge_agreement(2, 3, A2, Vector::Zero(1), 2)};
    StackedOperators ops2 = stack_operators(two, list, 2);
    Matrix expected = Matrix::Zero(4, 4);
    expected(0, 0) = 1.0;
    expected(3, 3) = 1.0;
    CHECK((ops2.P_bar - expected).norm() < 1e-12);

    CHECK_THROWS_AS(stack_operators(two, {list[0]}, 2), DimensionMismatch);
}

TEST_CASE("consistency check matches the sign convention") {
    auto forward = build_edge_agreement(1, 2, identity2(), vec2(0.0, 3.0), 2);
    CHECK(check_consistency({forward, forward.reversed()}).ok);

    auto bad = build_edge_agreement(2, 1, identity2(), vec2(0.0, 3.0), 2);
    ConsistencyReport report = check_consistency({forward, bad});
    CHECK_FALSE(report.ok);
    CHECK(report.edge_i == 1);
    CHECK(report.edge_j == 2);

    CHECK(check_consistency({}).ok);
}

TEST_CASE("well-configured rank test") {
    // acyclic: full row-rank incidence
    Graph path = Graph::build(3, {{1, 2}, {2, 3}});
    std::vector<EdgeAgreement> list{
        build_edge_agreement(1, 2, identity2(), vec2(1.0, 0.0), 2),
        build_edge_agreement(2, 3, identity2(), vec2(0.0, 1.0), 2)};
    WellConfiguredReport wc = check_well_configured(stack_operators(path, list, 2));
    CHECK(wc.literal);
    CHECK(wc.rank_ht_p == 4);

    // the cyclic 4-agent instance has a nontrivial cycle space
    WellConfiguredReport wc2 =
        check_well_configured(stack_operators(cyclic_graph(), cyclic_agreements(), 2));
    CHECK_FALSE(wc2.literal);
    CHECK(wc2.rank_ht_p == 6);
    CHECK(wc2.rank_p == 8);

    // no edges: vacuously fine
    Graph empty = Graph::build(3, {});
    WellConfiguredReport wc3 = check_well_configured(stack_operators(empty, {}, 2));
    CHECK(wc3.literal);
}

TEST_CASE("edge residual") {
    auto list = cyclic_agreements();
    // a state satisfying all four agreements: x1 = s, walk the tree
    Vector x(8);
    x.segment(0, 2) = vec2(1.0, -2.0);
    x.segment(2, 2) = x.segment(0, 2) - vec2(0.0, 3.0);
    x.segment(4, 2) = x.segment(0, 2) + vec2(2.6, -1.5);
    x.segment(6, 2) = x.segment(4, 2) + vec2(3.0, 0.0);
    CHECK(edge_residual_w1(x, list, 2) < 1e-24);

    std::vector<EdgeAgreement> single{build_edge_agreement(1, 2, identity2(), vec2(0, 3), 2)};
    CHECK(edge_residual_w1(Vector::Zero(4), single, 2) == doctest::Approx(9.0));
}

TEST_CASE("stacked edge constraint matches the per-edge form exactly") {
    Rng rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        const int m = static_cast<int>(rng.uniform_int(2, 4));
        const int n = static_cast<int>(rng.uniform_int(1, 3));
        std::vector<std::pair<int, int>> edges;
        for (int j = 2; j <= m; ++j) edges.emplace_back(static_cast<int>(rng.uniform_int(1, j - 1)), j);
        Graph g = Graph::build(m, edges);
        std::vector<EdgeAgreement> list;
        for (const auto& [i, j] : g.edges) {
            const int d = static_cast<int>(rng.uniform_int(1, n));
            Matrix A = random_full_rank(rng, d, n);
            Vector b(d);
            for (int k = 0; k < d; ++k) b(k) = rng.normal();
            list.push_back(build_edge_agreement(i, j, A, b, n));
        }
        StackedOperators ops = stack_operators(g, list, n);
        Vector x(m * n);
        for (int k = 0; k < m * n; ++k) x(k) = 2.0 * rng.normal();

        // per edge: A(x_i - x_j) - b = A P (x_i - x_j - b_bar); both zero sets agree
        Vector stacked = ops.P_bar * (ops.H_bar * x - ops.b_bar);
        for (int l = 0; l < g.edge_count(); ++l) {
            const auto& e = list[static_cast<std::size_t>(l)];
            Vector lhs = e.A * (x.segment((e.i - 1) * n, n) - x.segment((e.j - 1) * n, n)) - e.b;
            Vector rhs = e.A * stacked.segment(l * n, n);
            CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("flipping a stored orientation leaves the residual unchanged") {
    Rng rng(11);
    auto list = cyclic_agreements();
    Vector x(8);
    for (int k = 0; k < 8; ++k) x(k) = 5.0 * rng.normal();
    const double w1 = edge_residual_w1(x, list, 2);
    auto flipped = list;
    flipped[2] = flipped[2].reversed();  // (3,1) -> (1,3) with -b
    CHECK(edge_residual_w1(x, flipped, 2) == doctest::Approx(w1).epsilon(1e-12));
}
