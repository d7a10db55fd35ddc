#include "loiter/ephemeris.hpp"

#include "loiter/errors.hpp"

namespace loiter {

TargetEphemeris build_target_ephemeris(const AbsoluteState& X0, double t0,
                                       double horizon, const GravParams& p,
                                       double tol) {
    if (!(horizon > 0.0)) {
        throw DynamicsError("target ephemeris horizon must be positive");
    }
    OdeOptions opt;
    opt.rtol = tol;
    opt.atol = tol * 1e-2;

    OdeRhs rhs = [&p](double /*t*/, const Eigen::VectorXd& y,
                      Eigen::VectorXd& dy) {
        dy = absolute_rhs(AbsoluteState::unpack(y), p);
    };

    TargetEphemeris eph;
    eph.sol_ = dopri5_dense(rhs, t0, t0 + horizon, X0.pack(), opt);
    eph.t0_ = t0;
    eph.tol_ = tol;
    return eph;
}

}  // namespace loiter
