#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <cmath>
#include <limits>

#include "edgeadmm/convex_sets.hpp"
#include "edgeadmm/rng.hpp"

using namespace edgeadmm;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Eigen::Index>(xs.size()));
    Eigen::Index k = 0;
    for (double x : xs) v(k++) = x;
    return v;
}

/// Exact projection onto box ∩ {Ax = b} by enumerating active sets: each
/// coordinate is free, at its lower, or at its upper bound. The equality-
/// constrained minimizer of the true active set reproduces the projection,
/// so the feasible candidate at minimal distance is exact. Test-only oracle,
/// independent of Dykstra.
Vector brute_force_projection(const Vector& lo, const Vector& hi, const Matrix& A,
                              const Vector& b, const Vector& v) {
    const int n = static_cast<int>(v.size());
    int combos = 1;
    for (int k = 0; k < n; ++k) combos *= 3;

    double best = std::numeric_limits<double>::infinity();
    Vector best_z;
    for (int mask = 0; mask < combos; ++mask) {
        std::vector<int> state(n);  // 0 free, 1 at lo, 2 at hi
        int rest = mask;
        for (int k = 0; k < n; ++k) {
            state[k] = rest % 3;
            rest /= 3;
        }
        std::vector<int> free_idx;
        Vector z = Vector::Zero(n);
        bool valid = true;
        for (int k = 0; k < n; ++k) {
            if (state[k] == 0) {
                free_idx.push_back(k);
            } else if (state[k] == 1) {
                if (!std::isfinite(lo(k))) valid = false;
                z(k) = lo(k);
            } else {
                if (!std::isfinite(hi(k))) valid = false;
                z(k) = hi(k);
            }
        }
        if (!valid) continue;

        const int f = static_cast<int>(free_idx.size());
        Vector c = b - A * z;  // fixed part already in z (free coords are zero)
        Matrix Af(A.rows(), f);
        for (int k = 0; k < f; ++k) Af.col(k) = A.col(free_idx[k]);
        Vector vf(f);
        for (int k = 0; k < f; ++k) vf(k) = v(free_idx[k]);

        Vector xf;
        if (f == 0) {
            if ((A * z - b).cwiseAbs().maxCoeff() > 1e-9) continue;
            xf = Vector::Zero(0);
        } else {
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(Af);
            Vector corr = cod.solve(c - Af * vf);
            xf = vf + corr;
            if ((Af * xf - c).cwiseAbs().maxCoeff() > 1e-9) continue;  // inconsistent
        }
        bool feasible = true;
        for (int k = 0; k < f; ++k) {
            const int idx = free_idx[k];
            if (xf(k) < lo(idx) - 1e-9 || xf(k) > hi(idx) + 1e-9) feasible = false;
            z(idx) = xf(k);
        }
        if (!feasible) continue;
        const double dist = (z - v).squaredNorm();
        if (dist < best) {
            best = dist;
            best_z = z;
        }
    }
    REQUIRE(best_z.size() == n);
    return best_z;
}

}  // namespace

TEST_CASE("box projection clamps, fixing interior points") {
    Box box(vec({-100, -100}), vec({100, 100}));
    CHECK((box.project(vec({5, -7})) - vec({5, -7})).norm() == 0.0);
    CHECK((box.project(vec({150, -200})) - vec({100, -100})).norm() == 0.0);
}

TEST_CASE("infinite bounds leave coordinates free") {
    Box half(vec({0.0, -kInf}), vec({kInf, 1.0}));
    Vector p = half.project(vec({-3.0, 7.0}));
    CHECK(p(0) == 0.0);
    CHECK(p(1) == 1.0);
    Vector q = half.project(vec({42.0, -1e9}));
    CHECK(q(0) == 42.0);
    CHECK(q(1) == -1e9);

    WholeSpace all(3);
    Vector v = vec({1, -2, 3});
    CHECK((all.project(v) - v).norm() == 0.0);
}

TEST_CASE("unit-simplex slice of the unit box") {
    auto box = std::make_shared<Box>(vec({0, 0}), vec({1, 1}));
    Matrix A(1, 2);
    A << 1, 1;
    AffineSlice slice(box, A, vec({1.0}));

    Vector p = slice.project(vec({2, 2}));
    Vector expected = brute_force_projection(vec({0, 0}), vec({1, 1}), A, vec({1.0}),
                                             vec({2, 2}));
    CHECK((expected - vec({0.5, 0.5})).norm() < 1e-12);
    CHECK((p - expected).norm() < 1e-6);

    CHECK_FALSE(slice.contains(vec({0.7, 0.2}), 1e-9));
    CHECK(slice.contains(vec({0.25, 0.75}), 1e-8));
}

TEST_CASE("contains uses the projection distance") {
    Box box(vec({0.0}), vec({1.0}));
    CHECK(box.contains(vec({0.5}), 1e-9));
    CHECK(box.contains(vec({1.0 + 1e-12}), 1e-9));
    CHECK_FALSE(box.contains(vec({1.1}), 1e-9));
}

TEST_CASE("empty slice is rejected at construction") {
    auto box = std::make_shared<Box>(vec({0, 0}), vec({1, 1}));
    Matrix A(1, 2);
    A << 1, 1;
    CHECK_THROWS_AS(AffineSlice(box, A, vec({5.0})), EmptySlice);

    Matrix dependent(2, 2);
    dependent << 1, 1, 1, 1;
    CHECK_THROWS_AS(AffineSlice(box, dependent, vec({1.0, 1.0})), RankDeficient);
}

TEST_CASE("projection properties: idempotent, nonexpansive, optimal") {
    Rng rng(3);
    auto box = std::make_shared<Box>(vec({-1, 0, -2}), vec({2, 1, 0.5}));
    Matrix A(1, 3);
    A << 1, -1, 2;
    Vector b = A * vec({0.5, 0.5, -0.5});
    AffineSlice slice(box, A, b);

    for (int trial = 0; trial < 30; ++trial) {
        Vector u(3), v(3);
        for (int k = 0; k < 3; ++k) {
            u(k) = 4.0 * rng.normal();
            v(k) = 4.0 * rng.normal();
        }
        Vector pu = slice.project(u);
        Vector pv = slice.project(v);
        CHECK((slice.project(pv) - pv).norm() < 1e-8);               // idempotence
        CHECK((pu - pv).norm() <= (u - v).norm() + 1e-9);            // nonexpansive
        CHECK((pv - v).norm() <= (pu - v).norm() + 1e-8);            // optimality
    }
}

TEST_CASE("Dykstra agrees with the active-set oracle on small instances") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const int n = static_cast<int>(rng.uniform_int(2, 4));
        const int p = static_cast<int>(rng.uniform_int(1, n - 1));
        Vector lo(n), hi(n), anchor(n);
        for (int k = 0; k < n; ++k) {
            anchor(k) = rng.uniform(-1.0, 1.0);
            lo(k) = anchor(k) - rng.uniform(0.2, 1.5);
            hi(k) = anchor(k) + rng.uniform(0.2, 1.5);
        }
        Matrix A(p, n);
        for (int r = 0; r < p; ++r) {
            for (int c = 0; c < n; ++c) A(r, c) = rng.normal();
        }
        Eigen::JacobiSVD<Matrix> svd(A);
        if (svd.singularValues().minCoeff() < 1e-2) continue;
        Vector b = A * anchor;  // nonempty by construction

        AffineSlice slice(std::make_shared<Box>(lo, hi), A, b);
        Vector v(n);
        for (int k = 0; k < n; ++k) v(k) = 3.0 * rng.normal();

        Vector dykstra = slice.project(v);
        Vector oracle = brute_force_projection(lo, hi, A, b, v);
        CHECK((dykstra - oracle).cwiseAbs().maxCoeff() < 1e-6);
    }
}
