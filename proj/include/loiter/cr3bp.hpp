// cr3bp.hpp: normalized Earth-Moon circular restricted three-body dynamics in
// the synodic (rotating) frame, chaser-relative-to-target dynamics, and the
// analytic Jacobians needed by the linearization machinery.
//
// Units: positions/velocities/times are normalized by the mean Earth-Moon
// distance and the mean motion. GravParams carries the conversion constants.

#pragma once

#include <Eigen/Dense>

#include "loiter/errors.hpp"

namespace loiter {

using Vec3 = Eigen::Vector3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;

/// Mass ratio and normalization constants of the rotating-frame model.
struct GravParams {
    double mu = 0.0;             ///< mass ratio m2/(m1+m2), dimensionless
    double length_unit_km = 0.0; ///< km per normalized distance
    double time_unit_s = 0.0;    ///< s per normalized time (1/mean motion)
    double position_floor = 1e-12; ///< degenerate-position guard (normalized)

    /// km/s per normalized velocity.
    double velocity_unit_kmps() const { return length_unit_km / time_unit_s; }

    double km_to_norm(double km) const { return km / length_unit_km; }
    double norm_to_km(double x) const { return x * length_unit_km; }
    double days_to_norm(double d) const { return d * 86400.0 / time_unit_s; }
    double norm_to_days(double t) const { return t * time_unit_s / 86400.0; }
    double kmps_to_norm(double v) const { return v / velocity_unit_kmps(); }
    double norm_to_kmps(double v) const { return v * velocity_unit_kmps(); }

    /// Earth-Moon system: standard mass ratio, 384400 km mean distance, and
    /// the time unit that makes the mean motion unity (derived once from the
    /// DE-series GM sum; see cr3bp.cpp).
    static GravParams earth_moon();
};

/// Inertial particle state in the synodic frame, normalized units.
struct AbsoluteState {
    Vec3 R = Vec3::Zero(); ///< position
    Vec3 V = Vec3::Zero(); ///< velocity

    Vec6 pack() const {
        Vec6 s;
        s << R, V;
        return s;
    }
    static AbsoluteState unpack(const Vec6& s) {
        return AbsoluteState{s.head<3>(), s.tail<3>()};
    }
};

/// Chaser state relative to the target, normalized synodic components.
struct RelativeState {
    Vec3 r = Vec3::Zero();
    Vec3 v = Vec3::Zero();

    Vec6 pack() const {
        Vec6 s;
        s << r, v;
        return s;
    }
    static RelativeState unpack(const Vec6& s) {
        return RelativeState{s.head<3>(), s.tail<3>()};
    }
};

/// Synodic-frame equations of motion: first block is V, second block the
/// rotating-frame accelerations with primaries at (-mu,0,0) and (1-mu,0,0).
/// Throws DynamicsError if the state is within position_floor of a primary.
Vec6 absolute_rhs(const AbsoluteState& s, const GravParams& p);

/// Analytic d(absolute_rhs)/d(state), 6x6.
Mat6 absolute_jacobian(const AbsoluteState& s, const GravParams& p);

/// Jacobi integral (synodic frame, normalized; constant along trajectories).
double jacobi_constant(const AbsoluteState& s, const GravParams& p);

class TargetEphemeris;  // ephemeris.hpp

/// Exact nonlinear relative dynamics: f(x,t) = f_a(X_T(t)+x) - f_a(X_T(t)).
Vec6 relative_rhs(const RelativeState& x, double t, const TargetEphemeris& eph,
                  const GravParams& p);

/// d(relative_rhs)/dx = absolute_jacobian evaluated at X_T(t) + x.
Mat6 relative_jacobian(const RelativeState& x, double t,
                       const TargetEphemeris& eph, const GravParams& p);

/// Explicit time partial of the relative dynamics, entering through the
/// target motion: [J_a(X_T+x) - J_a(X_T)] * f_a(X_T).
Vec6 relative_rhs_time_partial(const RelativeState& x, double t,
                               const TargetEphemeris& eph,
                               const GravParams& p);

}  // namespace loiter
