// ocp.hpp: loitering-problem ingredients — keep-in/keep-out shell constraints
// g, impulse-magnitude constraint G, impulse allocation, exterior penalties.
// All quantities normalized; radii are converted once at configuration load.

#pragma once

#include <Eigen/Dense>
#include <vector>

#include "loiter/cr3bp.hpp"

namespace loiter {

/// Spherical keep-in (radius r_max) / keep-out (radius r_min) shell around
/// the target, plus the exterior-penalty shaping.
struct PathConstraintSet {
    double r_max = 0.0;          ///< keep-in radius, normalized
    double r_min = 0.0;          ///< keep-out radius, normalized
    int penalty_exponent = 2;    ///< n in max{0,g}^n, must be > 1
    double violation_unit = 1.0; ///< reference length dividing g inside the
                                 ///< penalty (sets the units of the y state);
                                 ///< presets use r_max so the accumulator
                                 ///< integrates (violation/r_max)^n

    void validate() const;  ///< throws ConfigError on broken invariants
};

/// Per-slot impulse magnitude cap with an activity mask (pinned slots carry
/// a structurally zero impulse).
struct DiscreteConstraintSet {
    double dv_max = 0.0;          ///< normalized velocity
    std::vector<int> active_mask; ///< one entry per impulse slot, 0 or 1

    void validate() const;
};

/// Cost selection: the loitering problem maximizes final time and has no
/// running impulse cost; both knobs kept for generality.
struct CostSpec {
    bool maximize_final_time = true;
    double impulse_weight = 0.0;  ///< coefficient on sum of |dv| magnitudes
};

/// (‖r‖ − r_max, r_min − ‖r‖); nonpositive components mean satisfied.
Eigen::Vector2d eval_g(const RelativeState& x, const PathConstraintSet& c);

/// Rows ±r^T/‖r‖ on the position block, zeros on the velocity block.
/// Throws DynamicsError at r = 0 (singular gradient).
Eigen::Matrix<double, 2, 6> eval_g_gradient(const RelativeState& x,
                                            const PathConstraintSet& c);

/// Sum_j max{0, g_j / violation_unit}^n; zero iff the shell is respected.
double penalty_lambda(const RelativeState& x, const PathConstraintSet& c);

/// d(penalty_lambda)/d(state); zero on the velocity block.
Vec6 penalty_lambda_gradient(const RelativeState& x,
                             const PathConstraintSet& c);

/// ‖dv‖ − dv_max (scalar; nonpositive means satisfied).
double eval_G(const Vec3& dv, const DiscreteConstraintSet& c);

/// Position unchanged, velocity incremented: x + B dv.
RelativeState apply_impulse(const RelativeState& x, const Vec3& dv);

/// The 6x3 map placing an impulse into the velocity block.
Eigen::Matrix<double, 6, 3> allocation_matrix();

}  // namespace loiter
