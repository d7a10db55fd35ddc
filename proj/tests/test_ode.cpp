// Integrator checks against closed-form solutions: endpoint accuracy, dense
// interpolation quality, convergence order of the fixed-step scheme, and the
// guard rails (span, step budget, non-finite states).

#include <cmath>

#include "doctest.h"
#include "loiter/ode.hpp"

using namespace loiter;

namespace {

// x'' = -x as a first-order system; solution rotates at unit rate.
const OdeRhs harmonic = [](double, const Eigen::VectorXd& x,
                           Eigen::VectorXd& dx) {
    dx.resize(2);
    dx[0] = x[1];
    dx[1] = -x[0];
};

Eigen::Vector2d harmonic_exact(double t, double x0, double v0) {
    return Eigen::Vector2d(x0 * std::cos(t) + v0 * std::sin(t),
                           -x0 * std::sin(t) + v0 * std::cos(t));
}

const OdeRhs decay = [](double, const Eigen::VectorXd& x, Eigen::VectorXd& dx) {
    dx = -0.7 * x;
};

}  // namespace

TEST_CASE("adaptive endpoint reproduces closed forms") {
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.25;

    const double T = 4.0 * M_PI;
    const Eigen::VectorXd yT = dopri5_endpoint(harmonic, 0.0, T, y0, o);
    const Eigen::Vector2d exact = harmonic_exact(T, 1.0, 0.25);
    CHECK((yT - Eigen::VectorXd(exact)).norm() < 1e-10);

    Eigen::VectorXd z0(1);
    z0 << 3.0;
    const Eigen::VectorXd zT = dopri5_endpoint(decay, 0.0, 5.0, z0, o);
    CHECK(zT[0] == doctest::Approx(3.0 * std::exp(-3.5)).epsilon(1e-11));
}

TEST_CASE("dense output interpolates accurately between steps") {
    OdeOptions o;
    o.rtol = 1e-11;
    o.atol = 1e-13;
    Eigen::VectorXd y0(2);
    y0 << 0.3, -1.1;
    const DenseOdeSolution sol = dopri5_dense(harmonic, 0.0, 10.0, y0, o);
    CHECK(sol.t_begin() == 0.0);
    CHECK(sol.t_end() == 10.0);
    CHECK(sol.step_count() > 5);

    double worst = 0.0;
    for (int i = 0; i <= 500; ++i) {
        const double t = 10.0 * i / 500.0;
        const Eigen::VectorXd y = sol.evaluate(t);
        const Eigen::Vector2d e = harmonic_exact(t, 0.3, -1.1);
        worst = std::max(worst, (y - Eigen::VectorXd(e)).norm());
    }
    // Dense output is one order lower than the step scheme; give it margin.
    CHECK(worst < 1e-8);

    // The stored end state is the last accepted step's state.
    CHECK((sol.end_state() - sol.evaluate(10.0)).norm() < 1e-12);
}

TEST_CASE("dense evaluation outside the span throws") {
    OdeOptions o;
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    const DenseOdeSolution sol = dopri5_dense(decay, 0.0, 2.0, y0, o);
    CHECK_THROWS_AS(sol.evaluate(-1e-9), DynamicsError);
    CHECK_THROWS_AS(sol.evaluate(2.0 + 1e-9), DynamicsError);
    CHECK_NOTHROW(sol.evaluate(0.0));
    CHECK_NOTHROW(sol.evaluate(2.0));
}

TEST_CASE("endpoint and dense trajectories agree") {
    OdeOptions o;
    o.rtol = 1e-10;
    o.atol = 1e-12;
    Eigen::VectorXd y0(2);
    y0 << -0.5, 0.9;
    const Eigen::VectorXd a = dopri5_endpoint(harmonic, 0.0, 7.3, y0, o);
    const DenseOdeSolution b = dopri5_dense(harmonic, 0.0, 7.3, y0, o);
    CHECK((a - b.end_state()).norm() < 1e-13);
}

TEST_CASE("tighter tolerance buys accuracy") {
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    double prev = 1.0;
    for (double rtol : {1e-6, 1e-9, 1e-12}) {
        OdeOptions o;
        o.rtol = rtol;
        o.atol = 1e-2 * rtol;
        const Eigen::VectorXd yT =
            dopri5_endpoint(harmonic, 0.0, 2.0 * M_PI, y0, o);
        const double err = (yT - y0).norm();  // full revolution returns home
        CHECK(err < 1e3 * rtol);
        CHECK(err <= prev + 1e-15);
        prev = err;
    }
}

TEST_CASE("fixed-step scheme shows fourth-order convergence") {
    Eigen::VectorXd y0(2);
    y0 << 1.0, 0.0;
    const double T = 2.0;
    const Eigen::Vector2d exact = harmonic_exact(T, 1.0, 0.0);

    double e_coarse = 0.0, e_fine = 0.0;
    {
        const Eigen::VectorXd y = rk4_fixed(harmonic, 0.0, T, y0, 40);
        e_coarse = (y - Eigen::VectorXd(exact)).norm();
    }
    {
        const Eigen::VectorXd y = rk4_fixed(harmonic, 0.0, T, y0, 80);
        e_fine = (y - Eigen::VectorXd(exact)).norm();
    }
    const double order = std::log2(e_coarse / e_fine);
    CHECK(order > 3.5);
    CHECK(order < 4.5);
}

TEST_CASE("integrator guard rails") {
    OdeOptions o;
    Eigen::VectorXd y0(1);
    y0 << 1.0;
    // Backward span is rejected.
    CHECK_THROWS_AS(dopri5_endpoint(decay, 1.0, 0.0, y0, o), DynamicsError);
    // A step budget too small for the span is reported, not looped on.
    OdeOptions tight;
    tight.rtol = 1e-13;
    tight.atol = 1e-15;
    tight.max_steps = 3;
    CHECK_THROWS_AS(dopri5_endpoint(harmonic, 0.0, 100.0,
                                    (Eigen::VectorXd(2) << 1.0, 0.0).finished(),
                                    tight),
                    DynamicsError);
    // rk4 needs at least one step.
    CHECK_THROWS_AS(rk4_fixed(decay, 0.0, 1.0, y0, 0), DynamicsError);
}
