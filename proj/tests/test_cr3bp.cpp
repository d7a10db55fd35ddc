// Rotating-frame dynamics checks: an independently coded scalar right-hand
// side, physical-constant pins, analytic Jacobians against central
// differences, Jacobi-constant conservation, and the chaser-relative
// formulation's defining identities.

#include <cmath>
#include <random>

#include "doctest.h"
#include "loiter/cr3bp.hpp"
#include "loiter/ephemeris.hpp"
#include "loiter/ode.hpp"

using namespace loiter;

namespace {

// Plain-arithmetic synodic-frame acceleration, written without any shared
// helpers so a transcription slip in the library cannot hide here too.
void scalar_rhs(const double s[6], double mu, double out[6]) {
    const double x = s[0], y = s[1], z = s[2];
    const double vx = s[3], vy = s[4], vz = s[5];
    const double d1x = x + mu, d2x = x - (1.0 - mu);
    const double r1 = std::sqrt(d1x * d1x + y * y + z * z);
    const double r2 = std::sqrt(d2x * d2x + y * y + z * z);
    const double c1 = (1.0 - mu) / (r1 * r1 * r1);
    const double c2 = mu / (r2 * r2 * r2);
    out[0] = vx;
    out[1] = vy;
    out[2] = vz;
    out[3] = x + 2.0 * vy - c1 * d1x - c2 * d2x;
    out[4] = y - 2.0 * vx - c1 * y - c2 * y;
    out[5] = -c1 * z - c2 * z;
}

AbsoluteState random_state(std::mt19937& gen) {
    std::uniform_real_distribution<double> pos(-1.5, 1.5);
    std::uniform_real_distribution<double> vel(-2.0, 2.0);
    AbsoluteState s;
    for (int i = 0; i < 3; ++i) {
        s.R[i] = pos(gen);
        s.V[i] = vel(gen);
    }
    return s;
}

bool near_primary(const AbsoluteState& s, double mu, double floor) {
    const Vec3 p1(-mu, 0.0, 0.0), p2(1.0 - mu, 0.0, 0.0);
    return (s.R - p1).norm() < floor || (s.R - p2).norm() < floor;
}

}  // namespace

TEST_CASE("earth-moon constants") {
    const GravParams p = GravParams::earth_moon();
    CHECK(p.mu == doctest::Approx(1.215058560962404e-2).epsilon(1e-15));
    CHECK(p.length_unit_km == 384400.0);
    // Time unit follows from the mean motion; one revolution is 2*pi.
    const double expected_tu =
        std::sqrt(384400.0 * 384400.0 * 384400.0 / 403503.2355);
    CHECK(p.time_unit_s == doctest::Approx(expected_tu).epsilon(1e-15));
    CHECK(p.norm_to_days(1.0) == doctest::Approx(4.3425).epsilon(1e-3));
    // Unit round trips.
    CHECK(p.km_to_norm(p.norm_to_km(0.37)) == doctest::Approx(0.37).epsilon(1e-15));
    CHECK(p.kmps_to_norm(p.norm_to_kmps(1.3)) == doctest::Approx(1.3).epsilon(1e-15));
    CHECK(p.days_to_norm(p.norm_to_days(2.9)) == doctest::Approx(2.9).epsilon(1e-15));
}

TEST_CASE("synodic right-hand side matches a scalar transcription") {
    const GravParams p = GravParams::earth_moon();
    std::mt19937 gen(20240811);
    for (int trial = 0; trial < 200; ++trial) {
        const AbsoluteState s = random_state(gen);
        if (near_primary(s, p.mu, 1e-3)) continue;
        double in[6], ref[6];
        const Vec6 packed = s.pack();
        for (int i = 0; i < 6; ++i) in[i] = packed[i];
        scalar_rhs(in, p.mu, ref);
        const Vec6 got = absolute_rhs(s, p);
        for (int i = 0; i < 6; ++i)
            CHECK(got[i] == doctest::Approx(ref[i]).epsilon(1e-14));
    }
}

TEST_CASE("acceleration blows up inside the position floor") {
    GravParams p = GravParams::earth_moon();
    p.position_floor = 1e-6;
    AbsoluteState s;
    s.R = Vec3(1.0 - p.mu + 1e-9, 0.0, 0.0);  // essentially on the small primary
    CHECK_THROWS_AS(absolute_rhs(s, p), DynamicsError);
}

TEST_CASE("analytic jacobian agrees with central differences") {
    const GravParams p = GravParams::earth_moon();
    std::mt19937 gen(77);
    int tested = 0;
    while (tested < 50) {
        const AbsoluteState s = random_state(gen);
        if (near_primary(s, p.mu, 5e-2)) continue;
        ++tested;
        const Mat6 J = absolute_jacobian(s, p);
        const double h = 1e-6;
        Mat6 fd;
        for (int c = 0; c < 6; ++c) {
            Vec6 hi = s.pack(), lo = s.pack();
            hi[c] += h;
            lo[c] -= h;
            fd.col(c) = (absolute_rhs(AbsoluteState::unpack(hi), p) -
                         absolute_rhs(AbsoluteState::unpack(lo), p)) /
                        (2.0 * h);
        }
        const double scale = std::max(1.0, J.norm());
        CHECK((J - fd).norm() / scale < 1e-6);
    }
}

TEST_CASE("jacobi constant is conserved along an integrated trajectory") {
    const GravParams p = GravParams::earth_moon();
    AbsoluteState s0;
    s0.R = Vec3(0.987360158, 0.0, 0.008773055);
    s0.V = Vec3(0.0, 1.634461555, 0.0);
    const double C0 = jacobi_constant(s0, p);

    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    const OdeRhs f = [&](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
        dx = absolute_rhs(AbsoluteState::unpack(x), p);
    };
    const DenseOdeSolution sol = dopri5_dense(f, 0.0, 12.0, s0.pack(), o);
    double worst = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double t = 12.0 * i / 40.0;
        const double C = jacobi_constant(
            AbsoluteState::unpack(sol.evaluate(t)), p);
        worst = std::max(worst, std::abs(C - C0));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("jacobi gradient is orthogonal to the flow") {
    // dC/dt = grad(C) . f vanishes identically; probe it with differences.
    const GravParams p = GravParams::earth_moon();
    std::mt19937 gen(99);
    int tested = 0;
    while (tested < 20) {
        const AbsoluteState s = random_state(gen);
        if (near_primary(s, p.mu, 5e-2)) continue;
        ++tested;
        const Vec6 f = absolute_rhs(s, p);
        const double h = 1e-7;
        double dot = 0.0;
        for (int c = 0; c < 6; ++c) {
            Vec6 hi = s.pack(), lo = s.pack();
            hi[c] += h;
            lo[c] -= h;
            const double g =
                (jacobi_constant(AbsoluteState::unpack(hi), p) -
                 jacobi_constant(AbsoluteState::unpack(lo), p)) /
                (2.0 * h);
            dot += g * f[c];
        }
        CHECK(std::abs(dot) < 1e-5);
    }
}

TEST_CASE("relative dynamics equal the difference of absolute flows") {
    const GravParams p = GravParams::earth_moon();
    AbsoluteState X0;
    X0.R = Vec3(0.987360158, 0.0, 0.008773055);
    X0.V = Vec3(0.0, 1.634461555, 0.0);
    const TargetEphemeris eph = build_target_ephemeris(X0, 0.0, 10.0, p, 1e-12);

    std::mt19937 gen(4242);
    std::uniform_real_distribution<double> du(-1e-4, 1e-4);
    std::uniform_real_distribution<double> dt(0.5, 9.5);
    for (int trial = 0; trial < 40; ++trial) {
        RelativeState x;
        for (int i = 0; i < 3; ++i) {
            x.r[i] = du(gen);
            x.v[i] = du(gen);
        }
        const double t = dt(gen);
        const AbsoluteState T = eph.state_at(t);
        AbsoluteState chaser;
        chaser.R = T.R + x.r;
        chaser.V = T.V + x.v;
        const Vec6 expect = absolute_rhs(chaser, p) - absolute_rhs(T, p);
        const Vec6 got = relative_rhs(x, t, eph, p);
        CHECK((got - expect).norm() < 1e-14);

        const Mat6 J = relative_jacobian(x, t, eph, p);
        const Mat6 Jabs = absolute_jacobian(chaser, p);
        CHECK((J - Jabs).norm() < 1e-14);
    }
}

TEST_CASE("relative time partial matches differencing the ephemeris") {
    const GravParams p = GravParams::earth_moon();
    AbsoluteState X0;
    X0.R = Vec3(0.987360158, 0.0, 0.008773055);
    X0.V = Vec3(0.0, 1.634461555, 0.0);
    const TargetEphemeris eph = build_target_ephemeris(X0, 0.0, 10.0, p, 1e-12);

    RelativeState x;
    x.r = Vec3(2e-5, -1e-5, 5e-6);
    x.v = Vec3(-3e-6, 1e-6, 2e-6);
    for (double t : {1.0, 3.7, 8.2}) {
        const double h = 1e-5;
        const Vec6 fd =
            (relative_rhs(x, t + h, eph, p) - relative_rhs(x, t - h, eph, p)) /
            (2.0 * h);
        const Vec6 an = relative_rhs_time_partial(x, t, eph, p);
        // The finite difference carries ephemeris interpolation noise, so the
        // comparison is looser than the state-Jacobian one.
        CHECK((an - fd).norm() < 1e-4 * std::max(1.0, an.norm()));
    }
}
