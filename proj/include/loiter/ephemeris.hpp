// ephemeris.hpp: dense-output target trajectory. Built once per solve by
// adaptive integration of the absolute dynamics from the configured initial
// state; immutable afterwards and safe for concurrent reads.

#pragma once

#include "loiter/cr3bp.hpp"
#include "loiter/ode.hpp"

namespace loiter {

class TargetEphemeris {
  public:
    TargetEphemeris() = default;

    double t0() const { return t0_; }
    double t_end() const { return sol_.t_end(); }
    double tolerance() const { return tol_; }
    bool covers(double t) const {
        return t >= t0_ && t <= sol_.t_end();
    }

    /// Target state at normalized time t; throws DynamicsError out of span.
    AbsoluteState state_at(double t) const {
        return AbsoluteState::unpack(sol_.evaluate(t));
    }

    friend TargetEphemeris build_target_ephemeris(const AbsoluteState& X0,
                                                  double t0, double horizon,
                                                  const GravParams& p,
                                                  double tol);

  private:
    DenseOdeSolution sol_;
    double t0_ = 0.0;
    double tol_ = 0.0;
};

/// Integrates the target dynamics over [t0, t0 + horizon] with mixed
/// absolute/relative tolerance tol and stores the dense output.
TargetEphemeris build_target_ephemeris(const AbsoluteState& X0, double t0,
                                       double horizon, const GravParams& p,
                                       double tol);

}  // namespace loiter
