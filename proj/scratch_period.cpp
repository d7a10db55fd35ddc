// scratch: measure target-orbit period by closest return to the initial state
#include <cstdio>
#include <cmath>
#include "loiter/cr3bp.hpp"
#include "loiter/ephemeris.hpp"

using namespace loiter;

int main() {
    const GravParams p = GravParams::earth_moon();
    AbsoluteState X0;
    X0.R << 0.987360158, 0.0, 0.008773055;
    X0.V << 0.0, 1.634461555, 0.0;
    const double t_hi = p.days_to_norm(7.5);
    const TargetEphemeris eph = build_target_ephemeris(X0, 0.0, t_hi, p, 1e-12);
    double best_t = 0, best_d = 1e300;
    for (int i = 0; i <= 200000; ++i) {
        const double t = p.days_to_norm(5.5) + (t_hi - p.days_to_norm(5.5)) * i / 200000.0;
        const AbsoluteState X = eph.state_at(t);
        Eigen::Matrix<double, 6, 1> d;
        d << (X.R - X0.R), (X.V - X0.V);
        const double dist = d.head<3>().norm() * p.length_unit_km;
        if (dist < best_d) { best_d = dist; best_t = t; }
    }
    std::printf("closest return: %.6f days, position miss %.6f km\n",
                p.norm_to_days(best_t), best_d);
    // perigee radius over one period (sanity: NRHO perilune)
    double rmin = 1e300, rmax = 0;
    for (int i = 0; i <= 20000; ++i) {
        const double t = best_t * i / 20000.0;
        const AbsoluteState X = eph.state_at(t);
        const double r_moon = ((X.R - Eigen::Vector3d(1 - p.mu, 0, 0)).norm()) * p.length_unit_km;
        rmin = std::min(rmin, r_moon);
        rmax = std::max(rmax, r_moon);
    }
    std::printf("moon-centred radius over one period: [%.1f, %.1f] km\n", rmin, rmax);
    return 0;
}
