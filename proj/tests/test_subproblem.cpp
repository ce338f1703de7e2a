#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "edgeadmm/graph.hpp"
#include "edgeadmm/rng.hpp"
#include "edgeadmm/subproblem.hpp"

using namespace edgeadmm;

namespace {

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}

SmoothConvex exp_sum() {
    SmoothConvex f;
    f.value = [](const Vector& x) { return x.array().exp().sum(); };
    f.gradient = [](const Vector& x) -> Vector { return x.array().exp(); };
    return f;
}

// scalar bisection on e^t + rho t = 0
double exp_fixed_point(double rho) {
    double lo = -1.0, hi = 0.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (std::exp(mid) + rho * mid > 0.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// independent recomputation of the subproblem objective
double eval_subproblem(const SubproblemData& data, const Vector& x) {
    double v = objective_value(data.objective, x) + data.lambda.dot(x);
    v += 0.5 * data.rho1 * (x - data.z).squaredNorm();
    v += edge_dual_vector(data).dot(x);
    for (const auto& nb : data.neighbors) {
        v += 0.5 * data.rho2 * (nb.P * (x - nb.x - nb.b_bar)).squaredNorm();
    }
    return v;
}

}  // namespace

TEST_CASE("quadratic update with all pulls centered at the origin") {
    Quadratic f{Matrix::Identity(2, 2), Vector::Zero(2), 0.0};
    LocalObjective obj = f;
    Vector zero = Vector::Zero(2);
    SubproblemData data{obj, zero, zero, zero, {}, 5.0, 5.0};
    CHECK(solve_x_update(data).norm() < 1e-14);
}

TEST_CASE("quadratic update where the unconstrained minimizer equals z") {
    Quadratic f{Matrix::Identity(2, 2), vec({-4, -4}), 8.0};
    LocalObjective obj = f;
    Vector z = vec({2, 2});
    Vector zero = Vector::Zero(2);
    SubproblemData data{obj, z, zero, zero, {}, 5.0, 5.0};
    CHECK((solve_x_update(data) - z).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("exponential objective solves e^x + rho x = 0 per coordinate") {
    LocalObjective obj = exp_sum();
    Vector zero = Vector::Zero(2);
    SubproblemData data{obj, zero, zero, zero, {}, 5.0, 5.0};
    Vector x = solve_x_update(data);
    const double root = exp_fixed_point(5.0);
    CHECK(std::abs(x(0) - root) < 1e-9);
    CHECK(std::abs(x(1) - root) < 1e-9);
    CHECK(root == doctest::Approx(-0.1689).epsilon(1e-3));
}

TEST_CASE("first-order certificate and strong convexity on random instances") {
    Rng rng(23);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(1, 4));
        Matrix G(n, n);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) G(r, c) = rng.normal();
        }
        Quadratic f{G * G.transpose() + 0.05 * Matrix::Identity(n, n), Vector::Zero(n), 0.0};
        for (int c = 0; c < n; ++c) f.q(c) = rng.normal();
        LocalObjective obj = f;

        Vector z(n), lam(n), mu(n), xj(n), mu_j(n);
        for (int c = 0; c < n; ++c) {
            z(c) = rng.normal();
            lam(c) = rng.normal();
            mu(c) = rng.normal();
            xj(c) = rng.normal();
            mu_j(c) = rng.normal();
        }
        EdgeAgreement e = build_edge_agreement(1, 2, Matrix::Identity(n, n), xj, n);
        const double rho = 4.0;
        SubproblemData data{obj, z, lam, mu, {}, rho, rho};
        data.neighbors.push_back(NeighborTerm{e.P, e.b_bar, xj, mu_j});

        Vector x = solve_x_update(data);
        CHECK(subproblem_gradient(data, x).cwiseAbs().maxCoeff() < 1e-8);

        const double fx = eval_subproblem(data, x);
        for (int probe = 0; probe < 4; ++probe) {
            Vector delta(n);
            for (int c = 0; c < n; ++c) delta(c) = 0.3 * rng.normal();
            CHECK(eval_subproblem(data, x + delta) >=
                  fx + 0.5 * rho * delta.squaredNorm() - 1e-9);
        }
    }
}

TEST_CASE("smooth path agrees with the closed form on wrapped quadratics") {
    Rng rng(5);
    const int n = 3;
    Matrix G(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) G(r, c) = rng.normal();
    }
    Quadratic quad{G * G.transpose() + 0.1 * Matrix::Identity(n, n), vec({1.0, -2.0, 0.5}), 0.0};
    SmoothConvex wrapped;
    wrapped.value = [quad](const Vector& x) {
        return x.dot(quad.Q * x) + quad.q.dot(x) + quad.c;
    };
    wrapped.gradient = [quad](const Vector& x) -> Vector { return 2.0 * (quad.Q * x) + quad.q; };

    Vector z = vec({0.2, 0.1, -0.4});
    Vector lam = vec({0.5, 0.0, -1.0});
    Vector zero = Vector::Zero(n);
    LocalObjective as_quad = quad;
    LocalObjective as_smooth = wrapped;
    SubproblemData qd{as_quad, z, lam, zero, {}, 5.0, 5.0};
    SubproblemData sd{as_smooth, z, lam, zero, {}, 5.0, 5.0};
    CHECK((solve_x_update(qd) - solve_x_update(sd)).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("gradient evaluators match central finite differences") {
    Rng rng(29);
    SmoothConvex f = exp_sum();
    const double h = 1e-6;
    for (int trial = 0; trial < 10; ++trial) {
        Vector x(3);
        for (int c = 0; c < 3; ++c) x(c) = rng.uniform(-2.0, 2.0);
        Vector g = f.gradient(x);
        for (int c = 0; c < 3; ++c) {
            Vector xp = x, xm = x;
            xp(c) += h;
            xm(c) -= h;
            const double fd = (f.value(xp) - f.value(xm)) / (2.0 * h);
            CHECK(std::abs(fd - g(c)) / (1.0 + std::abs(g(c))) < 1e-4);
        }
    }
}

TEST_CASE("quadratic validation rejects asymmetric or indefinite Q") {
    Quadratic ok{Matrix::Identity(2, 2), Vector::Zero(2), 0.0};
    CHECK_NOTHROW(validate_quadratic(ok));

    Quadratic asym = ok;
    asym.Q(0, 1) = 1e-6;
    CHECK_THROWS_AS(validate_quadratic(asym), Error);

    Quadratic indef = ok;
    indef.Q(0, 0) = -1.0;
    CHECK_THROWS_AS(validate_quadratic(indef), Error);
}

TEST_CASE("dual coupling modes differ exactly by the neighbor component") {
    const int n = 2;
    EdgeAgreement e = build_edge_agreement(1, 2, Matrix::Identity(n, n), vec({1.0, 0.0}), n);
    LocalObjective obj = Quadratic{Matrix::Identity(n, n), Vector::Zero(n), 0.0};
    Vector z = Vector::Zero(n), lam = Vector::Zero(n);
    Vector mu = vec({1.0, 2.0});
    Vector mu_j = vec({0.5, -0.5});
    Vector xj = Vector::Zero(n);

    SubproblemData diff{obj, z, lam, mu, {}, 5.0, 5.0, DualCoupling::NeighborDifference};
    diff.neighbors.push_back(NeighborTerm{e.P, e.b_bar, xj, mu_j});
    SubproblemData own{obj, z, lam, mu, {}, 5.0, 5.0, DualCoupling::OwnOnly};
    own.neighbors.push_back(NeighborTerm{e.P, e.b_bar, xj, mu_j});

    CHECK((edge_dual_vector(diff) - e.P * (mu - mu_j)).norm() < 1e-14);
    CHECK((edge_dual_vector(own) - e.P * mu).norm() < 1e-14);
}

TEST_CASE("cached solver matches the one-shot path") {
    Rng rng(31);
    const int n = 3;
    Matrix G(n, n);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) G(r, c) = rng.normal();
    }
    Quadratic f{G * G.transpose() + 0.2 * Matrix::Identity(n, n), vec({1.0, 0.0, -1.0}), 0.0};
    EdgeAgreement e = build_edge_agreement(1, 2, Matrix::Identity(n, n), Vector::Zero(n), n);

    Vector z = vec({0.1, 0.2, 0.3});
    Vector lam = vec({-0.5, 0.5, 0.0});
    Vector mu = vec({1.0, -1.0, 0.5});
    Vector mu_j = Vector::Zero(n);
    Vector xj = vec({1.0, 1.0, 1.0});
    LocalObjective obj = f;
    SubproblemData data{obj, z, lam, mu, {}, 3.0, 7.0};
    data.neighbors.push_back(NeighborTerm{e.P, e.b_bar, xj, mu_j});
    Vector direct = solve_x_update(data);

    QuadraticXSolver cached(f, 3.0, 7.0, {&e.P});
    Vector rhs = -f.q - lam + 3.0 * z - edge_dual_vector(data) + 7.0 * (e.P * (xj + e.b_bar));
    CHECK((cached.solve(rhs) - direct).cwiseAbs().maxCoeff() < 1e-12);
}
