// augmentation.cpp: dilation hold, augmented dynamics, accumulator check.

#include "loiter/augmentation.hpp"

#include <cmath>

#include "loiter/ephemeris.hpp"
#include "loiter/errors.hpp"

namespace loiter {

void DilationParam::validate() const {
    if (!(s_min > 0.0) || !(s_max >= s_min))
        throw ConfigError("dilation bounds need 0 < s_min <= s_max");
}

double dilation_eval(const Eigen::Vector2d& S, double u) {
    constexpr double slack = 1e-9;
    if (u < -slack || u > 1.0 + slack)
        throw DynamicsError("dilation evaluated outside its arc");
    const double uc = u < 0.0 ? 0.0 : (u > 1.0 ? 1.0 : u);
    return (1.0 - uc) * S[0] + uc * S[1];
}

Eigen::RowVector2d dilation_basis(double u) { return {1.0 - u, u}; }

Vec8 augmented_rhs(const AugmentedState& xs, double s,
                   const TargetEphemeris& eph, const GravParams& p,
                   const PathConstraintSet& c) {
    Vec8 out;
    out.head<6>() = relative_rhs(xs.x, xs.t, eph, p) * s;
    out[6] = penalty_lambda(xs.x, c) * s;
    out[7] = s;
    return out;
}

Mat8 augmented_jacobian(const AugmentedState& xs, double s,
                        const TargetEphemeris& eph, const GravParams& p,
                        const PathConstraintSet& c) {
    Mat8 jac = Mat8::Zero();
    jac.topLeftCorner<6, 6>() = relative_jacobian(xs.x, xs.t, eph, p) * s;
    jac.block<6, 1>(0, 7) = relative_rhs_time_partial(xs.x, xs.t, eph, p) * s;
    jac.block<1, 6>(6, 0) = penalty_lambda_gradient(xs.x, c).transpose() * s;
    return jac;  // y and t rows have no state feedback beyond the above
}

Vec8 augmented_s_partial(const AugmentedState& xs, const TargetEphemeris& eph,
                         const GravParams& p, const PathConstraintSet& c) {
    return augmented_rhs(xs, 1.0, eph, p, c);
}

Eigen::Matrix<double, 8, 3> augmented_allocation() {
    Eigen::Matrix<double, 8, 3> b = Eigen::Matrix<double, 8, 3>::Zero();
    b.block<3, 3>(3, 0).setIdentity();
    return b;
}

IsoperimetricResult isoperimetric_check(const ArcTrace& trace, double budget) {
    const Eigen::Index n = trace.tau.size();
    if (n < 2 || trace.integrand.size() != n)
        throw ConfigError("accumulator trace needs matching grids, >= 2 points");
    const double h = trace.tau[1] - trace.tau[0];
    if (!(h > 0.0)) throw ConfigError("accumulator trace grid must ascend");
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double hi = trace.tau[i + 1] - trace.tau[i];
        if (std::abs(hi - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw ConfigError("accumulator trace grid must be uniform");
    }
    if (!trace.integrand.allFinite())
        throw ConfigError("accumulator trace has non-finite samples");

    // Composite Simpson; a trailing odd interval count is closed with the
    // 3/8 rule (or a single trapezoid when only one interval exists).
    const auto& f = trace.integrand;
    Eigen::Index m = n - 1;  // interval count
    double integral = 0.0;
    if (m == 1) {
        integral = 0.5 * h * (f[0] + f[1]);
        m = 0;
    } else if (m % 2 == 1) {
        integral = 3.0 * h / 8.0 *
                   (f[m - 3] + 3.0 * f[m - 2] + 3.0 * f[m - 1] + f[m]);
        m -= 3;
    }
    if (m >= 2) {
        double acc = f[0] + f[m];
        for (Eigen::Index i = 1; i < m; ++i)
            acc += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
        integral += h / 3.0 * acc;
    }
    return {integral, integral <= budget};
}

}  // namespace loiter
