#include "edgeadmm/subproblem.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace edgeadmm {

double objective_value(const LocalObjective& f, const Vector& x) {
    if (const auto* quad = std::get_if<Quadratic>(&f)) {
        return x.dot(quad->Q * x) + quad->q.dot(x) + quad->c;
    }
    return std::get<SmoothConvex>(f).value(x);
}

Vector objective_gradient(const LocalObjective& f, const Vector& x) {
    if (const auto* quad = std::get_if<Quadratic>(&f)) {
        return 2.0 * (quad->Q * x) + quad->q;
    }
    return std::get<SmoothConvex>(f).gradient(x);
}

void validate_quadratic(const Quadratic& f) {
    if (f.Q.rows() != f.Q.cols()) throw DimensionMismatch("Q must be square");
    if (f.q.size() != f.Q.rows()) throw DimensionMismatch("q length must match Q");
    if ((f.Q - f.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error("Q must be symmetric (to 1e-12)");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(f.Q, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
        throw Error("Q must be positive semidefinite (eigenvalues >= -1e-10)");
    }
}

Vector edge_dual_vector(const SubproblemData& data) {
    Vector dual = Vector::Zero(data.z.size());
    for (const auto& nb : data.neighbors) {
        if (data.coupling == DualCoupling::NeighborDifference) {
            dual.noalias() += nb.P * (data.mu - nb.mu);
        } else {
            dual.noalias() += nb.P * data.mu;
        }
    }
    return dual;
}

Vector subproblem_gradient(const SubproblemData& data, const Vector& x) {
    Vector g = objective_gradient(data.objective, x);
    g += data.lambda;
    g += data.rho1 * (x - data.z);
    g += edge_dual_vector(data);
    for (const auto& nb : data.neighbors) {
        g.noalias() += data.rho2 * (nb.P * (x - nb.x - nb.b_bar));
    }
    return g;
}

namespace {

double subproblem_value(const SubproblemData& data, const Vector& x) {
    double v = objective_value(data.objective, x);
    v += data.lambda.dot(x);
    v += 0.5 * data.rho1 * (x - data.z).squaredNorm();
    v += edge_dual_vector(data).dot(x);
    for (const auto& nb : data.neighbors) {
        v += 0.5 * data.rho2 * (nb.P * (x - nb.x - nb.b_bar)).squaredNorm();
    }
    return v;
}

Vector solve_smooth(const SubproblemData& data) {
    Vector x = data.warm_start ? *data.warm_start : data.z;
    constexpr double armijo_c = 1e-4;
    constexpr double shrink = 0.5;
    constexpr double grad_tol = 1e-10;
    constexpr int max_iters = 500;

    double value = subproblem_value(data, x);
    for (int it = 0; it < max_iters; ++it) {
        Vector g = subproblem_gradient(data, x);
        const double gnorm = g.cwiseAbs().maxCoeff();
        if (gnorm < grad_tol) return x;
        const double g2 = g.squaredNorm();
        double step = 1.0;
        for (int ls = 0; ls < 60; ++ls) {
            Vector trial = x - step * g;
            double trial_value = subproblem_value(data, trial);
            if (trial_value <= value - armijo_c * step * g2) {
                x = std::move(trial);
                value = trial_value;
                break;
            }
            step *= shrink;
        }
    }
    Vector g = subproblem_gradient(data, x);
    const double gnorm = g.cwiseAbs().maxCoeff();
    if (gnorm >= grad_tol) {
        throw NotConverged("x-update gradient descent stalled", max_iters, gnorm);
    }
    return x;
}

}  // namespace

Vector solve_x_update(const SubproblemData& data) {
    if (data.rho1 <= 0.0 || data.rho2 <= 0.0) throw Error("penalty weights must be positive");
    const Eigen::Index n = data.z.size();
    if (data.lambda.size() != n || data.mu.size() != n) {
        throw DimensionMismatch("x-update: dual lengths differ from z");
    }

    if (const auto* quad = std::get_if<Quadratic>(&data.objective)) {
        Matrix M = 2.0 * quad->Q;
        M.diagonal().array() += data.rho1;
        Vector rhs = -quad->q - data.lambda + data.rho1 * data.z - edge_dual_vector(data);
        for (const auto& nb : data.neighbors) {
            M.noalias() += data.rho2 * nb.P;
            rhs.noalias() += data.rho2 * (nb.P * (nb.x + nb.b_bar));
        }
        Eigen::LDLT<Matrix> ldlt(M);
        if (ldlt.info() != Eigen::Success) {
            throw SingularSystem("x-update system not positive definite");
        }
        return ldlt.solve(rhs);
    }
    return solve_smooth(data);
}

QuadraticXSolver::QuadraticXSolver(const Quadratic& f, double rho1, double rho2,
                                   const std::vector<const Matrix*>& neighbor_projectors) {
    Matrix M = 2.0 * f.Q;
    M.diagonal().array() += rho1;
    for (const Matrix* P : neighbor_projectors) M.noalias() += rho2 * (*P);
    ldlt_.compute(M);
    if (ldlt_.info() != Eigen::Success) {
        throw SingularSystem("x-update system not positive definite");
    }
}

Vector QuadraticXSolver::solve(const Vector& rhs) const { return ldlt_.solve(rhs); }

}  // namespace edgeadmm
