// augmentation.hpp: time-dilated, penalty-augmented arc dynamics. The state
// is extended with a violation accumulator y and physical time t; the free
// variable becomes the uniform arc parameter tau, and a per-arc first-order-
// hold dilation s(tau) stretches tau into physical time.

#pragma once

#include <Eigen/Dense>

#include "loiter/cr3bp.hpp"
#include "loiter/ocp.hpp"

namespace loiter {

using Vec8 = Eigen::Matrix<double, 8, 1>;
using Mat8 = Eigen::Matrix<double, 8, 8>;

/// Per-arc dilation bounds: s is boxed to a band around the nominal guess
/// duration so the subproblem cannot collapse or explode the time map.
struct DilationParam {
    double s_min = 0.0;
    double s_max = 0.0;

    void validate() const;  ///< throws ConfigError unless 0 < s_min <= s_max
};

/// First-order hold over one unit arc: coefficients S = (left, right) blend
/// linearly in the arc-local coordinate u in [0, 1].
/// Throws DynamicsError for u outside the arc (beyond a 1e-9 slack).
double dilation_eval(const Eigen::Vector2d& S, double u);

/// Interpolation weights (1-u, u), so dilation_eval = basis * S.
Eigen::RowVector2d dilation_basis(double u);

/// Relative state augmented with the violation accumulator y and physical
/// time t; packs to [r, v, y, t].
struct AugmentedState {
    RelativeState x;
    double y = 0.0;
    double t = 0.0;

    Vec8 pack() const {
        Vec8 out;
        out.head<6>() = x.pack();
        out[6] = y;
        out[7] = t;
        return out;
    }
    static AugmentedState unpack(const Vec8& v) {
        return {RelativeState::unpack(v.head<6>()), v[6], v[7]};
    }
};

/// d/dtau of [x, y, t] at dilation value s:
///   [ f(x, t) * s,  penalty_lambda(x) * s,  s ].
Vec8 augmented_rhs(const AugmentedState& xs, double s,
                   const TargetEphemeris& eph, const GravParams& p,
                   const PathConstraintSet& c);

/// Jacobian of augmented_rhs with respect to the packed state [r, v, y, t].
Mat8 augmented_jacobian(const AugmentedState& xs, double s,
                        const TargetEphemeris& eph, const GravParams& p,
                        const PathConstraintSet& c);

/// Partial of augmented_rhs with respect to s (the rhs is linear in s).
Vec8 augmented_s_partial(const AugmentedState& xs, const TargetEphemeris& eph,
                         const GravParams& p, const PathConstraintSet& c);

/// The 8x3 impulse allocation into the augmented velocity block.
Eigen::Matrix<double, 8, 3> augmented_allocation();

/// Samples of the accumulator integrand s(tau) * Lambda(x(tau)) on a uniform
/// tau grid spanning one arc; produced by the dense propagation pass.
struct ArcTrace {
    Eigen::VectorXd tau;        ///< uniform, ascending, >= 2 points
    Eigen::VectorXd integrand;  ///< same length, nonnegative
};

struct IsoperimetricResult {
    double integral = 0.0;  ///< composite-Simpson estimate over the arc
    bool within = false;    ///< integral <= budget
};

/// Quadrature check that the accumulated violation over the arc stays within
/// the given budget. Throws ConfigError on a malformed trace.
IsoperimetricResult isoperimetric_check(const ArcTrace& trace, double budget);

}  // namespace loiter
