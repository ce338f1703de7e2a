#pragma once

#include <ostream>
#include <vector>

#include "edgeadmm/admm.hpp"

namespace edgeadmm {

/// Compact constraint form C x + D z = E with
/// C = [I; H_bar' P_bar H_bar], D = [-I; 0], E = [0; H_bar' P_bar b_bar].
struct CompactForm {
    Matrix C;
    Matrix D;
    Vector E;
    Matrix L;  // H_bar' P_bar H_bar, cached
    int mn = 0;

    Vector residual(const Vector& x, const Vector& z) const;
};

CompactForm build_compact_form(const StackedOperators& ops);

struct SaddleCertificate {
    Vector x;  // stacked primal optimum
    Vector z;
    Vector y;  // stacked dual col(lambda, mu)
    double objective = 0.0;
    double kkt_feasibility = 0.0;
    double kkt_stationarity = 0.0;
};

struct KktReport {
    double feasibility = 0.0;    // ||C x + D z - E||
    double stationarity = 0.0;   // distance of -(C'y) - grad f to the normal cone at z
};

/// Feasibility plus stationarity of the candidate saddle. For box sets the
/// normal-cone distance reduces to a per-coordinate complementarity check:
/// interior coordinates must carry a zero component, coordinates at a bound
/// a component of the correct sign.
KktReport kkt_check(const SaddleCertificate& cert, const ProblemSpec& spec,
                    const CompactForm& compact);

struct CentralState {
    Vector x;
    Vector z;
    Vector y;
};

/// One step of the centralized two-block scheme on the compact constraints:
/// joint x-minimization of f(x) + y'Cx + rho/2 ||Cx + Dz - E||^2, then the
/// z-projection, then y += rho (C x + D z - E).
CentralState centralized_admm_step(const CentralState& state, const ProblemSpec& spec,
                                   const CompactForm& compact, double rho);

struct CentralHistory {
    std::vector<CentralState> states;     // states[k] is the iterate after step k (k>=1); states[0] the start
    std::vector<Vector> residuals;        // residuals[k] = r_{k+1} produced by step k+1
};

struct CentralRunResult {
    CentralHistory history;
    CentralState final_state;
    int iterations = 0;
    bool converged = false;
};

/// Repeated centralized steps until ||r|| and the z-change drop below tol,
/// recording the full trajectory when record_history is set.
CentralRunResult run_centralized_admm(const ProblemSpec& spec, const CompactForm& compact,
                                      double rho, int max_iterations, double tol,
                                      bool record_history);

struct CentralizedSolveOptions {
    double step_tol = 1e-10;     // stop when ||x_{t+1} - x_t||_inf drops below
    long max_iterations = 100000;
    double admm_tol = 1e-12;     // convergence tol for the dual-recovery run
    int admm_max_iterations = 20000;
};

/// Ground-truth solver: projected gradient on the stacked variable over
/// {x : P_bar(H_bar x - b_bar) = 0} intersected with the product of the
/// agents' sets (projection by Dykstra between the affine edge manifold and
/// the product set), Armijo backtracking. Duals are recovered from a long
/// centralized run. Throws Infeasible when the feasible set certifies empty.
SaddleCertificate solve_centralized(const ProblemSpec& spec,
                                    const CentralizedSolveOptions& options = {});

struct LyapunovSeries {
    std::vector<double> v;            // V_k along the trajectory
    bool decrease_holds = true;       // V_{k+1} <= V_k - rho||r||^2 - rho||D dz||^2 + slack
    double worst_violation = 0.0;

    void write_csv(std::ostream& out) const;
};

/// V_k = (1/rho)||y_k - y*||^2 + rho ||D(z_k - z*)||^2 along a recorded
/// centralized trajectory, with the per-step decrease check (slack 1e-8).
LyapunovSeries lyapunov_series(const CentralHistory& history, const SaddleCertificate& cert,
                               const CompactForm& compact, double rho);

struct LemmaReport {
    double worst_lower = 0.0;     // max over k of (l* - l_{k+1}) - y*' r_{k+1}
    double worst_upper = 0.0;     // max over k of (l_{k+1} - l*) - bound
    double worst_lyapunov = 0.0;  // max over k of V_{k+1} - (V_k - rho||r||^2 - rho||D dz||^2)
};

/// Saddle-point inequalities evaluated along a centralized trajectory; all
/// three worst-case slacks should stay below 1e-8 for a valid certificate.
LemmaReport check_saddle_inequalities(const CentralHistory& history,
                                      const SaddleCertificate& cert,
                                      const ProblemSpec& spec, const CompactForm& compact,
                                      double rho);

void write_certificate_csv(const SaddleCertificate& cert, std::ostream& out);

}  // namespace edgeadmm
