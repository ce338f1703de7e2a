#pragma once

#include <Eigen/Dense>
#include <functional>
#include <variant>
#include <vector>

#include "edgeadmm/errors.hpp"
#include "edgeadmm/graph.hpp"

namespace edgeadmm {

/// f(x) = x'Qx + q'x + c with Q symmetric PSD.
struct Quadratic {
    Matrix Q;
    Vector q;
    double c = 0.0;
};

/// Smooth convex objective given by value/gradient evaluators.
struct SmoothConvex {
    std::function<double(const Vector&)> value;
    std::function<Vector(const Vector&)> gradient;
    bool lipschitz_gradient = true;
};

using LocalObjective = std::variant<Quadratic, SmoothConvex>;

double objective_value(const LocalObjective& f, const Vector& x);
Vector objective_gradient(const LocalObjective& f, const Vector& x);

/// Validates the Quadratic invariants: symmetry to 1e-12 and smallest
/// eigenvalue >= -1e-10. Throws on violation.
void validate_quadratic(const Quadratic& f);

/// How an agent's minimization couples to the edge duals. The stationarity
/// condition of the full augmented Lagrangian assigns each agent the
/// difference P_ij(mu_i - mu_j) per incident edge; keeping only the agent's
/// own term biases the fixed point on irregular graphs and is retained here
/// purely as a comparison mode.
enum class DualCoupling {
    NeighborDifference,
    OwnOnly,
};

struct NeighborTerm {
    const Matrix& P;
    const Vector& b_bar;
    const Vector& x;   // neighbor's iterate held fixed during the solve
    const Vector& mu;  // neighbor's edge dual
};

struct SubproblemData {
    const LocalObjective& objective;
    const Vector& z;
    const Vector& lambda;
    const Vector& mu;
    std::vector<NeighborTerm> neighbors;
    double rho1 = 0.0;  // weight on the x-z coupling
    double rho2 = 0.0;  // weight on the edge terms
    DualCoupling coupling = DualCoupling::NeighborDifference;
    const Vector* warm_start = nullptr;  // used by the smooth path
};

/// The combined linear edge-dual vector entering the subproblem gradient.
Vector edge_dual_vector(const SubproblemData& data);

/// Gradient of the subproblem objective at x (used for optimality
/// certificates in tests and post-checks).
Vector subproblem_gradient(const SubproblemData& data, const Vector& x);

/// Minimizes
///   f(x) + lambda'x + rho1/2 ||x - z||^2 + <edge duals, x>
///        + rho2/2 sum_j ||P_ij (x - x_j - b_bar_ij)||^2,
/// strongly convex for rho1 > 0. Quadratic objectives solve the normal
/// equations by a symmetric PD factorization; smooth objectives run
/// backtracking gradient descent (Armijo c = 1e-4, shrink 0.5) to
/// ||grad||_inf < 1e-10 within 500 iterations.
Vector solve_x_update(const SubproblemData& data);

/// Caches the constant system matrix 2Q + rho1 I + rho2 sum_j P_ij of a
/// quadratic agent so repeated solves cost one back-substitution.
class QuadraticXSolver {
  public:
    QuadraticXSolver(const Quadratic& f, double rho1, double rho2,
                     const std::vector<const Matrix*>& neighbor_projectors);

    Vector solve(const Vector& rhs) const;

  private:
    Eigen::LDLT<Matrix> ldlt_;
};

}  // namespace edgeadmm
