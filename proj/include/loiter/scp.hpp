// scp.hpp: prox-linear sequential convex programming on the multiple-
// shooting transcription. The merit is the exact-penalty objective
//
//   Theta(z) = cost(z) + gamma * (sum |defects|_1 + sum max{0, G}
//              [+ node shell hinges in node-only mode])
//
// over the hard feasible set Z (boundary/jump equalities, impulse pins,
// dilation box, accumulator sign and budgets). Each iteration minimizes the
// linearization of Theta plus a proximal term (1/2 rho)|z - z_j|^2 subject
// to Z phrased as a cone subproblem; steps are accepted only when the true
// merit does not increase, with rho halved on rejection.

#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "loiter/conic.hpp"
#include "loiter/decision.hpp"
#include "loiter/errors.hpp"
#include "loiter/shooting.hpp"

namespace loiter {

/// Hard accumulator budget rows are tightened by this factor so dense
/// audits against the untightened budget hold with margin to spare.
constexpr double kBudgetMargin = 0.9;

struct PenaltyWeights {
    double gamma = 1e3;        ///< exact-penalty weight
    double rho0 = 1.0;         ///< initial proximal radius
    double rho_max = 1e2;      ///< growth cap after repeated acceptances
    double eps_stop = 1e-6;    ///< prox-gradient norm stopping threshold
    double eps_relax = 1e-9;   ///< per-subarc accumulator budget
    int max_iterations = 150;
    int max_rejections = 20;          ///< backtracks allowed per iteration
    int max_backend_retries = 8;      ///< failed cone solves before aborting

    void validate() const;
};

/// Everything the merit/linearizer needs about one transcription instance.
struct TranscriptionSetup {
    const ArcSystem* sys = nullptr;
    DecisionLayout layout;
    IntegratorOptions integ;
    DilationParam dilation;           ///< same box for every arc
    DiscreteConstraintSet discrete;
    PathConstraintSet path;           ///< node rows / hinge scale (node-only)
    CostSpec cost;
    GravParams grav;                  ///< unit conversions for reporting
    Vec6 x_init = Vec6::Zero();       ///< initial relative deviation
    double time_horizon = 0.0;        ///< usable ephemeris span; 0 = unchecked
    double eq_tol = 1e-7;             ///< Z-membership equality tolerance
};

/// Merit evaluation with its diagnostic split.
struct MeritBreakdown {
    double value = 0.0;           ///< +inf when z leaves the hard set Z
    bool in_hard_set = false;
    std::string hard_set_note;    ///< which member failed, when one did
    double cost_term = 0.0;       ///< -t_f (+ optional impulse weight)
    double defect_l1 = 0.0;       ///< unweighted sum of |defect|_1
    double impulse_hinge = 0.0;   ///< unweighted sum of max{0, G}
    double node_hinge = 0.0;      ///< unweighted node shell hinges (node-only)
    double max_defect = 0.0;      ///< l-inf over all defect rows
    double max_impulse_violation = 0.0;
    Eigen::VectorXd arc_budgets;  ///< per-arc accumulator increments
};

MeritBreakdown exact_penalty_objective(const DecisionVector& z,
                                       const TranscriptionSetup& setup,
                                       const PenaltyWeights& w);

/// Linearization of one subarc map around the current iterate.
struct SubarcLin {
    Eigen::VectorXd defect;  ///< value at the base point
    Eigen::MatrixXd stm;     ///< d(end)/d(start)
    Eigen::MatrixXd sens;    ///< d(end)/d(dilation pair)
};

std::vector<SubarcLin> linearize_subarcs(const DecisionVector& z,
                                         const TranscriptionSetup& setup);

/// Cone-ready subproblem around z_j, retaining enough structure to evaluate
/// its own objective at arbitrary points and to unpack backend solutions.
struct SubproblemModel {
    ConicProblem problem;  ///< posed in the step delta = z - z_j
    DecisionLayout layout;
    double rho = 0.0;
    double obj_offset = 0.0;  ///< cone objective + offset = model objective

    Eigen::VectorXd z_ref;               ///< linearization point
    std::vector<SubarcLin> lin;          ///< per-subarc, arc-major
    double gamma = 0.0;
    double gamma_node = 0.0;             ///< node hinge weight (node-only)
    double node_scale = 1.0;             ///< node hinge divisor (r_max)
    bool maximize_final_time = true;
    double impulse_weight = 0.0;
    std::vector<double> impulse_base;    ///< G value per slot at z_j
    std::vector<Vec3> impulse_grad;      ///< G subgradient per slot at z_j
    std::vector<Eigen::Vector2d> node_g_base;  ///< node-only: g at z_j
    std::vector<Eigen::Matrix<double, 2, 3>> node_g_grad;

    /// Model objective (cost + gamma * linearized penalties + prox) at any
    /// decision vector; matches the cone objective plus obj_offset on Z.
    double model_value(const Eigen::VectorXd& z) const;

    /// Decision part of a backend solution.
    DecisionVector extract(const ConeSolution& sol) const;
};

SubproblemModel build_subproblem(const DecisionVector& z_j,
                                 const TranscriptionSetup& setup,
                                 const PenaltyWeights& w, double rho);

namespace detail {
/// Assembly step reused by the prox loop so one linearization serves every
/// backtracked rho.
SubproblemModel assemble_subproblem(const DecisionVector& z_j,
                                    std::vector<SubarcLin> lin,
                                    const TranscriptionSetup& setup,
                                    const PenaltyWeights& w, double rho);
}  // namespace detail

/// Scaled step (z_prev - z_next)/rho used as the stationarity measure.
Eigen::VectorXd prox_gradient(const Eigen::VectorXd& z_prev,
                              const Eigen::VectorXd& z_next, double rho);

struct IterateRecord {
    int iteration = 0;       ///< 1-based
    double merit = 0.0;      ///< Theta at the accepted iterate
    double model_objective = 0.0;
    double step_norm = 0.0;
    double prox_gradient_norm = 0.0;
    double rho = 0.0;        ///< value used by the accepted step
    int rejections = 0;
    int backend_iterations = 0;
    double max_defect = 0.0;
    double max_impulse_violation = 0.0;
    Eigen::VectorXd arc_budgets;
    double linearize_ms = 0.0, assemble_ms = 0.0, backend_ms = 0.0;
};

struct SolveReport {
    std::string scenario, mode, backend;
    bool converged = false;
    std::string status;  ///< converged | iteration-cap | stalled
    int iterations = 0;
    std::vector<IterateRecord> iterates;
    double merit_final = 0.0;
    double final_time_norm = 0.0;
    double final_time_days = 0.0;
    std::vector<Vec3> impulses;        ///< per slot, normalized
    std::vector<double> impulse_cms;   ///< magnitudes per active slot, cm/s
    double median_linearize_ms = 0.0;
    double median_assemble_ms = 0.0;
    double median_backend_ms = 0.0;
    double median_iter_ms = 0.0;  ///< assemble + backend median
    double total_ms = 0.0;
};

struct SolveOutcome {
    SolveReport report;
    DecisionVector z;
};

/// Thrown internally when an iterate needs ephemeris span beyond
/// TranscriptionSetup::time_horizon; the scenario layer rebuilds and retries.
class HorizonExceeded : public DynamicsError {
  public:
    explicit HorizonExceeded(double needed)
        : DynamicsError("iterate needs a longer target ephemeris"),
          needed_(needed) {}
    double needed() const { return needed_; }

  private:
    double needed_;
};

/// Run the prox-linear loop from the given guess. Backend failures retry
/// with a halved rho up to the retry cap, then surface as BackendError.
SolveOutcome prox_linear_solve(
    const DecisionVector& guess, const TranscriptionSetup& setup,
    const PenaltyWeights& w, const BackendOptions& backend,
    const std::function<void(const IterateRecord&)>& on_iterate = {});

}  // namespace loiter
