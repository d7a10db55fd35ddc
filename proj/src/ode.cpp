// ode.cpp: Dormand-Prince 5(4) with dense output (Hairer-Norsett-Wanner
// coefficients) and classical RK4.

#include "loiter/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace loiter {

namespace {

// Dormand-Prince tableau.
constexpr double c2 = 1.0 / 5.0, c3 = 3.0 / 10.0, c4 = 4.0 / 5.0, c5 = 8.0 / 9.0;
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                 a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0,
                 a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0,
                 a75 = -2187.0 / 6784.0, a76 = 11.0 / 84.0;
// Error coefficients (5th minus embedded 4th order).
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
// Dense-output coefficients.
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

struct StageWork {
    Eigen::VectorXd k1, k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    explicit StageWork(Eigen::Index n)
        : k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n),
          yerr(n) {}
};

/// Scaled RMS error norm of the embedded pair.
double error_norm(const Eigen::VectorXd& yerr, const Eigen::VectorXd& y0,
                  const Eigen::VectorXd& y1, const OdeOptions& o) {
    const Eigen::Index n = yerr.size();
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk =
            o.atol + o.rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double r = yerr(i) / sk;
        acc += r * r;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

/// Conservative automatic initial step (simplified Hairer HINIT).
double initial_step_guess(const OdeRhs& f, double t0, double span,
                          const Eigen::VectorXd& y0, const Eigen::VectorXd& f0,
                          const OdeOptions& o) {
    const Eigen::Index n = y0.size();
    double d0 = 0.0, dd1 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk = o.atol + o.rtol * std::abs(y0(i));
        d0 += (y0(i) / sk) * (y0(i) / sk);
        dd1 += (f0(i) / sk) * (f0(i) / sk);
    }
    d0 = std::sqrt(d0 / static_cast<double>(n));
    dd1 = std::sqrt(dd1 / static_cast<double>(n));
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h0 = std::min(h0, span);

    Eigen::VectorXd y1 = y0 + h0 * f0;
    Eigen::VectorXd f1(n);
    f(t0 + h0, y1, f1);
    double d2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double sk = o.atol + o.rtol * std::abs(y0(i));
        const double r = (f1(i) - f0(i)) / sk;
        d2 += r * r;
    }
    d2 = std::sqrt(d2 / static_cast<double>(n)) / h0;

    const double dm = std::max(dd1, d2);
    double h1 = (dm <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                              : std::pow(0.01 / dm, 0.2);
    return std::min({100.0 * h0, h1, span});
}

/// One Dormand-Prince step from (t, y, k1 = f(t,y)); fills w.ynew, w.yerr,
/// w.k7. Returns false when any stage produced a non-finite value.
bool dp_step(const OdeRhs& f, double t, double h, const Eigen::VectorXd& y,
             StageWork& w) {
    w.ytmp = y + h * (a21 * w.k1);
    f(t + c2 * h, w.ytmp, w.k2);
    w.ytmp = y + h * (a31 * w.k1 + a32 * w.k2);
    f(t + c3 * h, w.ytmp, w.k3);
    w.ytmp = y + h * (a41 * w.k1 + a42 * w.k2 + a43 * w.k3);
    f(t + c4 * h, w.ytmp, w.k4);
    w.ytmp = y + h * (a51 * w.k1 + a52 * w.k2 + a53 * w.k3 + a54 * w.k4);
    f(t + c5 * h, w.ytmp, w.k5);
    w.ytmp = y + h * (a61 * w.k1 + a62 * w.k2 + a63 * w.k3 + a64 * w.k4 +
                      a65 * w.k5);
    f(t + h, w.ytmp, w.k6);
    w.ynew = y + h * (a71 * w.k1 + a73 * w.k3 + a74 * w.k4 + a75 * w.k5 +
                      a76 * w.k6);
    f(t + h, w.ynew, w.k7);
    w.yerr = h * (e1 * w.k1 + e3 * w.k3 + e4 * w.k4 + e5 * w.k5 + e6 * w.k6 +
                  e7 * w.k7);
    return w.ynew.allFinite() && w.yerr.allFinite();
}

/// Core adaptive loop. Invokes on_accept(t, h, y_old, work) per accepted step.
template <typename OnAccept>
Eigen::VectorXd dopri5_core(const OdeRhs& f, double t0, double t1,
                            const Eigen::VectorXd& y0, const OdeOptions& o,
                            std::size_t* steps_out, OnAccept&& on_accept) {
    if (!(t1 > t0)) {
        throw DynamicsError("integration span must be forward (t1 > t0)");
    }
    const Eigen::Index n = y0.size();
    StageWork w(n);
    Eigen::VectorXd y = y0;
    double t = t0;
    f(t, y, w.k1);
    if (!w.k1.allFinite()) {
        throw DynamicsError("non-finite right-hand side at initial state");
    }
    double h = o.initial_step > 0.0
                   ? std::min(o.initial_step, t1 - t0)
                   : initial_step_guess(f, t0, t1 - t0, y, w.k1, o);

    std::size_t n_accepted = 0;
    bool rejected_last = false;
    for (std::size_t iter = 0; iter < o.max_steps; ++iter) {
        if (t >= t1) {
            if (steps_out) *steps_out = n_accepted;
            return y;
        }
        h = std::min(h, t1 - t);
        if (h < 16.0 * std::numeric_limits<double>::epsilon() *
                    std::max(1.0, std::abs(t))) {
            throw DynamicsError("integrator step underflow");
        }
        const bool finite = dp_step(f, t, h, y, w);
        const double err = finite ? error_norm(w.yerr, y, w.ynew, o) : 10.0;
        if (err <= 1.0) {
            on_accept(t, h, y, w);
            t += h;
            y.swap(w.ynew);
            w.k1.swap(w.k7);  // FSAL
            ++n_accepted;
            const double fac =
                std::min(rejected_last ? 1.0 : 5.0,
                         std::max(0.2, 0.9 * std::pow(err > 0 ? 1.0 / err : 1e10,
                                                      0.2)));
            h *= fac;
            rejected_last = false;
        } else {
            h *= std::max(0.2, 0.9 * std::pow(1.0 / err, 0.2));
            rejected_last = true;
        }
    }
    throw DynamicsError("integrator exceeded max_steps");
}

}  // namespace

Eigen::VectorXd DenseOdeSolution::evaluate(double t) const {
    const double slack =
        1e-10 * std::max(1.0, std::abs(t_end_ - t_begin_));
    if (t < t_begin_ - slack || t > t_end_ + slack) {
        throw DynamicsError("dense-output evaluation outside covered span");
    }
    // Binary search for the step containing t.
    std::size_t lo = 0, hi = steps_.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi + 1) / 2;
        if (steps_[mid].t0 <= t) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    const OdeStep& s = steps_[lo];
    double theta = (t - s.t0) / s.h;
    theta = std::clamp(theta, 0.0, 1.0);
    const double theta1 = 1.0 - theta;
    return s.rcont1 +
           theta * (s.rcont2 +
                    theta1 * (s.rcont3 +
                              theta * (s.rcont4 + theta1 * s.rcont5)));
}

DenseOdeSolution dopri5_dense(const OdeRhs& f, double t0, double t1,
                              const Eigen::VectorXd& y0, const OdeOptions& o) {
    DenseOdeSolution sol;
    sol.t_begin_ = t0;
    sol.t_end_ = t1;
    sol.end_state_ = dopri5_core(
        f, t0, t1, y0, o, nullptr,
        [&sol](double t, double h, const Eigen::VectorXd& y, const StageWork& w) {
            OdeStep rec;
            rec.t0 = t;
            rec.h = h;
            rec.rcont1 = y;
            rec.rcont2 = w.ynew - y;
            rec.rcont3 = h * w.k1 - rec.rcont2;
            rec.rcont4 = rec.rcont2 - h * w.k7 - rec.rcont3;
            rec.rcont5 = h * (d1 * w.k1 + d3 * w.k3 + d4 * w.k4 + d5 * w.k5 +
                              d6 * w.k6 + d7 * w.k7);
            sol.steps_.push_back(std::move(rec));
        });
    return sol;
}

Eigen::VectorXd dopri5_endpoint(const OdeRhs& f, double t0, double t1,
                                const Eigen::VectorXd& y0, const OdeOptions& o,
                                std::size_t* n_steps) {
    return dopri5_core(f, t0, t1, y0, o, n_steps,
                       [](double, double, const Eigen::VectorXd&,
                          const StageWork&) {});
}

Eigen::VectorXd rk4_fixed(const OdeRhs& f, double t0, double t1,
                          const Eigen::VectorXd& y0, int n_steps) {
    if (n_steps < 1) {
        throw DynamicsError("rk4_fixed needs n_steps >= 1");
    }
    const double h = (t1 - t0) / n_steps;
    const Eigen::Index n = y0.size();
    Eigen::VectorXd y = y0, k1(n), k2(n), k3(n), k4(n), ytmp(n);
    for (int i = 0; i < n_steps; ++i) {
        const double t = t0 + i * h;
        f(t, y, k1);
        ytmp = y + 0.5 * h * k1;
        f(t + 0.5 * h, ytmp, k2);
        ytmp = y + 0.5 * h * k2;
        f(t + 0.5 * h, ytmp, k3);
        ytmp = y + h * k3;
        f(t + h, ytmp, k4);
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!y.allFinite()) {
            throw DynamicsError("rk4_fixed produced non-finite state");
        }
    }
    return y;
}

}  // namespace loiter
