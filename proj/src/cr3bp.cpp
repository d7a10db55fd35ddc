// cr3bp.cpp: synodic-frame CR3BP accelerations, Jacobians, and the
// relative-to-target dynamics built on the target ephemeris.

#include "loiter/cr3bp.hpp"

#include <cmath>

#include "loiter/ephemeris.hpp"

namespace loiter {

GravParams GravParams::earth_moon() {
    GravParams p;
    // Standard Earth-Moon mass ratio.
    p.mu = 1.215058560962404e-2;
    p.length_unit_km = 384400.0;
    // Time unit from the mean motion: t_u = sqrt(a^3 / (GM_E + GM_M)) with
    // the DE430 GM sum 403503.2355 km^3/s^2, so one normalized time unit is
    // about 4.3425 days and the unit circular period is 2*pi.
    const double gm_total = 403503.2355;
    p.time_unit_s = std::sqrt(p.length_unit_km * p.length_unit_km *
                              p.length_unit_km / gm_total);
    return p;
}

namespace {

/// Offsets of the two primaries on the synodic x-axis.
inline Vec3 primary1(const GravParams& p) { return Vec3(-p.mu, 0.0, 0.0); }
inline Vec3 primary2(const GravParams& p) { return Vec3(1.0 - p.mu, 0.0, 0.0); }

void check_separations(double r1, double r2, const GravParams& p) {
    if (r1 < p.position_floor || r2 < p.position_floor) {
        throw DynamicsError("degenerate position: state within floor of a primary");
    }
}

}  // namespace

Vec6 absolute_rhs(const AbsoluteState& s, const GravParams& p) {
    const Vec3 d1 = s.R - primary1(p);
    const Vec3 d2 = s.R - primary2(p);
    const double r1 = d1.norm();
    const double r2 = d2.norm();
    check_separations(r1, r2, p);

    const double r13 = r1 * r1 * r1;
    const double r23 = r2 * r2 * r2;
    const double c1 = (1.0 - p.mu) / r13;
    const double c2 = p.mu / r23;

    Vec6 out;
    out.head<3>() = s.V;
    // Centrifugal + Coriolis + two-body attractions, rotating frame.
    out(3) = s.R.x() + 2.0 * s.V.y() - c1 * d1.x() - c2 * d2.x();
    out(4) = s.R.y() - 2.0 * s.V.x() - c1 * d1.y() - c2 * d2.y();
    out(5) = -c1 * d1.z() - c2 * d2.z();
    return out;
}

Mat6 absolute_jacobian(const AbsoluteState& s, const GravParams& p) {
    const Vec3 d1 = s.R - primary1(p);
    const Vec3 d2 = s.R - primary2(p);
    const double r1 = d1.norm();
    const double r2 = d2.norm();
    check_separations(r1, r2, p);

    const double r13 = r1 * r1 * r1;
    const double r23 = r2 * r2 * r2;
    const double r15 = r13 * r1 * r1;
    const double r25 = r23 * r2 * r2;

    // Gravity gradient: -nu * (I/rho^3 - 3 d d^T / rho^5) per primary.
    Mat3 grad = Mat3::Zero();
    grad -= (1.0 - p.mu) * (Mat3::Identity() / r13 - 3.0 * d1 * d1.transpose() / r15);
    grad -= p.mu * (Mat3::Identity() / r23 - 3.0 * d2 * d2.transpose() / r25);
    // Centrifugal part of the rotating frame.
    grad(0, 0) += 1.0;
    grad(1, 1) += 1.0;

    Mat6 jac = Mat6::Zero();
    jac.topRightCorner<3, 3>() = Mat3::Identity();
    jac.bottomLeftCorner<3, 3>() = grad;
    jac(3, 4) = 2.0;  // Coriolis
    jac(4, 3) = -2.0;
    return jac;
}

double jacobi_constant(const AbsoluteState& s, const GravParams& p) {
    const double r1 = (s.R - primary1(p)).norm();
    const double r2 = (s.R - primary2(p)).norm();
    const double omega2 = s.R.x() * s.R.x() + s.R.y() * s.R.y();
    return omega2 + 2.0 * (1.0 - p.mu) / r1 + 2.0 * p.mu / r2 - s.V.squaredNorm();
}

Vec6 relative_rhs(const RelativeState& x, double t, const TargetEphemeris& eph,
                  const GravParams& p) {
    const AbsoluteState target = eph.state_at(t);
    AbsoluteState chaser;
    chaser.R = target.R + x.r;
    chaser.V = target.V + x.v;
    return absolute_rhs(chaser, p) - absolute_rhs(target, p);
}

Mat6 relative_jacobian(const RelativeState& x, double t,
                       const TargetEphemeris& eph, const GravParams& p) {
    const AbsoluteState target = eph.state_at(t);
    AbsoluteState chaser;
    chaser.R = target.R + x.r;
    chaser.V = target.V + x.v;
    return absolute_jacobian(chaser, p);
}

Vec6 relative_rhs_time_partial(const RelativeState& x, double t,
                               const TargetEphemeris& eph,
                               const GravParams& p) {
    const AbsoluteState target = eph.state_at(t);
    AbsoluteState chaser;
    chaser.R = target.R + x.r;
    chaser.V = target.V + x.v;
    const Vec6 target_rate = absolute_rhs(target, p);
    return (absolute_jacobian(chaser, p) - absolute_jacobian(target, p)) *
           target_rate;
}

}  // namespace loiter
