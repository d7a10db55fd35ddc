// ocp.cpp: shell constraints, impulse constraint, exterior penalty.

#include "loiter/ocp.hpp"

#include <cmath>

#include "loiter/errors.hpp"

namespace loiter {

void PathConstraintSet::validate() const {
    if (!(r_min > 0.0) || !(r_max > r_min))
        throw ConfigError("path constraints need 0 < r_min < r_max");
    if (penalty_exponent <= 1)
        throw ConfigError("penalty_exponent must exceed 1 for a C1 penalty");
    if (!(violation_unit > 0.0))
        throw ConfigError("violation_unit must be positive");
}

void DiscreteConstraintSet::validate() const {
    if (!(dv_max > 0.0)) throw ConfigError("dv_max must be positive");
    if (active_mask.empty())
        throw ConfigError("active_mask must name at least one impulse slot");
    for (int m : active_mask)
        if (m != 0 && m != 1)
            throw ConfigError("active_mask entries must be 0 or 1");
}

Eigen::Vector2d eval_g(const RelativeState& x, const PathConstraintSet& c) {
    const double r = x.r.norm();
    return {r - c.r_max, c.r_min - r};
}

Eigen::Matrix<double, 2, 6> eval_g_gradient(const RelativeState& x,
                                            const PathConstraintSet& c) {
    const double r = x.r.norm();
    if (r <= 0.0)
        throw DynamicsError("shell-constraint gradient is singular at r = 0");
    Eigen::Matrix<double, 2, 6> grad = Eigen::Matrix<double, 2, 6>::Zero();
    const Vec3 dir = x.r / r;
    grad.row(0).head<3>() = dir.transpose();
    grad.row(1).head<3>() = -dir.transpose();
    (void)c;
    return grad;
}

double penalty_lambda(const RelativeState& x, const PathConstraintSet& c) {
    const Eigen::Vector2d g = eval_g(x, c);
    double acc = 0.0;
    for (int j = 0; j < 2; ++j)
        if (g[j] > 0.0) acc += std::pow(g[j] / c.violation_unit,
                                        c.penalty_exponent);
    return acc;
}

Vec6 penalty_lambda_gradient(const RelativeState& x,
                             const PathConstraintSet& c) {
    const Eigen::Vector2d g = eval_g(x, c);
    Vec6 grad = Vec6::Zero();
    if (g[0] <= 0.0 && g[1] <= 0.0) return grad;  // interior: exactly zero
    const Eigen::Matrix<double, 2, 6> gg = eval_g_gradient(x, c);
    const int n = c.penalty_exponent;
    for (int j = 0; j < 2; ++j)
        if (g[j] > 0.0)
            grad += n * std::pow(g[j] / c.violation_unit, n - 1) *
                    gg.row(j).transpose() / c.violation_unit;
    return grad;
}

double eval_G(const Vec3& dv, const DiscreteConstraintSet& c) {
    return dv.norm() - c.dv_max;
}

RelativeState apply_impulse(const RelativeState& x, const Vec3& dv) {
    return {x.r, x.v + dv};
}

Eigen::Matrix<double, 6, 3> allocation_matrix() {
    Eigen::Matrix<double, 6, 3> b = Eigen::Matrix<double, 6, 3>::Zero();
    b.bottomRows<3>().setIdentity();
    return b;
}

}  // namespace loiter
