// shooting.cpp: variational subarc propagation, defects, dense audits.

#include "loiter/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loiter/ephemeris.hpp"
#include "loiter/errors.hpp"

namespace loiter {

void MeshSpec::validate() const {
    if (n_arcs < 1 || subarcs_per_arc < 1)
        throw ConfigError("mesh needs n_arcs >= 1 and subarcs_per_arc >= 1");
}

void Cr3bpArcSystem::rhs(const Eigen::VectorXd& xs, double s,
                         Eigen::VectorXd& out) const {
    const int m = dim();
    const RelativeState x = RelativeState::unpack(xs.head<6>());
    out.resize(m);
    out.head<6>() = relative_rhs(x, xs[m - 1], *eph_, *grav_) * s;
    if (with_y_) out[6] = penalty_lambda(x, *path_) * s;
    out[m - 1] = s;
}

void Cr3bpArcSystem::jacobian(const Eigen::VectorXd& xs, double s,
                              Eigen::MatrixXd& out) const {
    const int m = dim();
    const RelativeState x = RelativeState::unpack(xs.head<6>());
    const double t = xs[m - 1];
    out.setZero(m, m);
    out.topLeftCorner<6, 6>() = relative_jacobian(x, t, *eph_, *grav_) * s;
    out.block<6, 1>(0, m - 1) = relative_rhs_time_partial(x, t, *eph_, *grav_) * s;
    if (with_y_)
        out.block<1, 6>(6, 0) = penalty_lambda_gradient(x, *path_).transpose() * s;
}

double Cr3bpArcSystem::violation_rate(const Eigen::VectorXd& xs) const {
    return penalty_lambda(RelativeState::unpack(xs.head<6>()), *path_);
}

namespace {

/// Right-hand side of [state | transition matrix | dilation sensitivity]
/// flattened column-major; the sensitivity picks up the hold basis so the
/// result differentiates the endpoint against both dilation coefficients.
OdeRhs make_joint_rhs(const ArcSystem& sys, const Eigen::Vector2d& S) {
    const int m = sys.dim();
    return [&sys, S, m](double u, const Eigen::VectorXd& y,
                        Eigen::VectorXd& dy) {
        const double s = dilation_eval(S, u);
        const Eigen::VectorXd xs = y.head(m);
        Eigen::VectorXd f, fs;
        Eigen::MatrixXd A;
        sys.rhs(xs, s, f);
        sys.jacobian(xs, s, A);
        sys.s_partial(xs, fs);
        dy.resize(m + m * m + 2 * m);
        dy.head(m) = f;
        Eigen::Map<const Eigen::MatrixXd> phi(y.data() + m, m, m);
        Eigen::Map<Eigen::MatrixXd> dphi(dy.data() + m, m, m);
        dphi = A * phi;
        Eigen::Map<const Eigen::MatrixXd> sens(y.data() + m + m * m, m, 2);
        Eigen::Map<Eigen::MatrixXd> dsens(dy.data() + m + m * m, m, 2);
        dsens = A * sens + fs * dilation_basis(u);
    };
}

OdeRhs make_state_rhs(const ArcSystem& sys, const Eigen::Vector2d& S) {
    return [&sys, S](double u, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
        sys.rhs(y, dilation_eval(S, u), dy);
    };
}

void check_span(double u0, double u1) {
    if (u0 < -1e-12 || u1 > 1.0 + 1e-12 || u1 < u0)
        throw DynamicsError("subarc span outside its arc");
}

}  // namespace

SubarcResult integrate_span(const ArcSystem& sys, const Eigen::VectorXd& start,
                            const Eigen::Vector2d& S, double u0, double u1,
                            const IntegratorOptions& opts) {
    check_span(u0, u1);
    const int m = sys.dim();
    if (start.size() != m) throw DynamicsError("start state has wrong size");

    SubarcResult res;
    if (u1 == u0) {  // empty span: the map is the identity
        res.end = start;
        res.stm = Eigen::MatrixXd::Identity(m, m);
        res.sens = Eigen::MatrixXd::Zero(m, 2);
        return res;
    }

    Eigen::VectorXd y0(m + m * m + 2 * m);
    y0.head(m) = start;
    Eigen::Map<Eigen::MatrixXd>(y0.data() + m, m, m).setIdentity();
    y0.tail(2 * m).setZero();

    const OdeRhs joint = make_joint_rhs(sys, S);
    Eigen::VectorXd yT;
    if (opts.mode == IntegratorOptions::Mode::adaptive) {
        OdeOptions oo;
        oo.rtol = opts.rtol;
        oo.atol = opts.atol;
        yT = dopri5_endpoint(joint, u0, u1, y0, oo, &res.n_steps);
    } else {
        yT = rk4_fixed(joint, u0, u1, y0, opts.rk4_steps);
        res.n_steps = static_cast<size_t>(opts.rk4_steps);
    }
    res.end = yT.head(m);
    res.stm = Eigen::Map<const Eigen::MatrixXd>(yT.data() + m, m, m);
    res.sens = Eigen::Map<const Eigen::MatrixXd>(yT.data() + m + m * m, m, 2);
    return res;
}

SubarcResult integrate_subarc(const ArcSystem& sys,
                              const Eigen::VectorXd& start,
                              const Eigen::Vector2d& S, int k, int K,
                              const IntegratorOptions& opts) {
    if (K < 1 || k < 0 || k >= K) throw DynamicsError("subarc index out of range");
    const double h = 1.0 / K;
    return integrate_span(sys, start, S, k * h, (k + 1) * h, opts);
}

Eigen::VectorXd integrate_subarc_state(const ArcSystem& sys,
                                       const Eigen::VectorXd& start,
                                       const Eigen::Vector2d& S, int k, int K,
                                       const IntegratorOptions& opts) {
    if (K < 1 || k < 0 || k >= K) throw DynamicsError("subarc index out of range");
    const double h = 1.0 / K;
    const double u0 = k * h, u1 = (k + 1) * h;
    check_span(u0, u1);
    if (start.size() != sys.dim())
        throw DynamicsError("start state has wrong size");

    const OdeRhs f = make_state_rhs(sys, S);
    if (opts.mode == IntegratorOptions::Mode::adaptive) {
        OdeOptions oo;
        oo.rtol = opts.rtol;
        oo.atol = opts.atol;
        return dopri5_endpoint(f, u0, u1, start, oo);
    }
    return rk4_fixed(f, u0, u1, start, opts.rk4_steps);
}

Eigen::VectorXd defect(const ArcSystem& sys, const Eigen::VectorXd& xk,
                       const Eigen::VectorXd& xk1, const Eigen::Vector2d& S,
                       int k, int K, const IntegratorOptions& opts) {
    return xk1 - integrate_subarc_state(sys, xk, S, k, K, opts);
}

DenseOdeSolution propagate_arc_dense(const ArcSystem& sys,
                                     const Eigen::VectorXd& start,
                                     const Eigen::Vector2d& S, double rtol) {
    OdeOptions oo;
    oo.rtol = rtol;
    oo.atol = rtol * 1e-2;
    return dopri5_dense(make_state_rhs(sys, S), 0.0, 1.0, start, oo);
}

DenseVerification dense_verify(const DecisionVector& z, const ArcSystem& sys,
                               const GravParams& grav, double r_min_km,
                               double r_max_km, int grid_points, double rtol) {
    const int n_arcs = z.layout.n_arcs;
    const int m = sys.dim();
    if (m != z.layout.state_dim())
        throw ConfigError("dense audit: system/layout state width mismatch");
    if (grid_points < 2) throw ConfigError("dense audit needs >= 2 grid points");

    std::vector<DenseOdeSolution> flows;
    flows.reserve(n_arcs);
    for (int i = 0; i < n_arcs; ++i)
        flows.push_back(propagate_arc_dense(sys, z.node(i, 0), z.dilation(i), rtol));

    DenseVerification out;
    out.samples.reserve(grid_points);
    const double v_unit_mps = grav.velocity_unit_kmps() * 1e3;
    for (int g = 0; g < grid_points; ++g) {
        const double tau = n_arcs * static_cast<double>(g) / (grid_points - 1);
        const int i = std::min(static_cast<int>(tau), n_arcs - 1);
        const Eigen::VectorXd xs = flows[i].evaluate(tau - i);
        TrajectorySample smp;
        smp.t_norm = xs[m - 1];
        smp.t_days = grav.norm_to_days(xs[m - 1]);
        smp.r_km = xs.head<3>() * grav.length_unit_km;
        smp.v_mps = xs.segment<3>(3) * v_unit_mps;
        smp.radius_km = smp.r_km.norm();
        smp.arc = i + 1;
        smp.y_acc = sys.with_y() ? xs[6] : 0.0;
        out.samples.push_back(smp);
    }

    // Per-arc quadrature of the violation integrand on its own odd grid.
    int per_arc = std::max(32, grid_points / std::max(1, n_arcs));
    if (per_arc % 2 == 1) ++per_arc;  // even interval count for Simpson
    out.arc_budget.resize(n_arcs);
    for (int i = 0; i < n_arcs; ++i) {
        ArcTrace trace;
        trace.tau.setLinSpaced(per_arc + 1, 0.0, 1.0);
        trace.integrand.resize(per_arc + 1);
        const Eigen::Vector2d S = z.dilation(i);
        for (int j = 0; j <= per_arc; ++j) {
            const double u = trace.tau[j];
            trace.integrand[j] =
                sys.violation_rate(flows[i].evaluate(u)) * dilation_eval(S, u);
        }
        out.arc_budget[i] = isoperimetric_check(trace, 0.0).integral;
    }

    out.report = ViolationReport::from_samples(out.samples, r_min_km, r_max_km,
                                               n_arcs);
    return out;
}

std::vector<TrajectorySample> free_drift_samples(const TargetEphemeris& eph,
                                                 const GravParams& grav,
                                                 const Vec6& x0, double t0,
                                                 double T, int n_samples,
                                                 double rtol) {
    if (!(T > 0.0) || n_samples < 2)
        throw ConfigError("drift sampling needs T > 0 and >= 2 samples");
    OdeOptions oo;
    oo.rtol = rtol;
    oo.atol = rtol * 1e-2;
    const OdeRhs f = [&](double t, const Eigen::VectorXd& y,
                         Eigen::VectorXd& dy) {
        dy.resize(6);
        dy = relative_rhs(RelativeState::unpack(y), t, eph, grav).eval();
    };
    const DenseOdeSolution sol = dopri5_dense(f, t0, t0 + T, x0, oo);

    std::vector<TrajectorySample> samples;
    samples.reserve(n_samples);
    const double v_unit_mps = grav.velocity_unit_kmps() * 1e3;
    for (int g = 0; g < n_samples; ++g) {
        const double t = t0 + T * static_cast<double>(g) / (n_samples - 1);
        const Eigen::VectorXd y = sol.evaluate(t);
        TrajectorySample smp;
        smp.t_norm = t - t0;
        smp.t_days = grav.norm_to_days(t - t0);
        smp.r_km = y.head<3>() * grav.length_unit_km;
        smp.v_mps = y.tail<3>() * v_unit_mps;
        smp.radius_km = smp.r_km.norm();
        smp.arc = 1;
        smp.y_acc = 0.0;
        samples.push_back(smp);
    }
    return samples;
}

ViolationReport ViolationReport::from_samples(
    const std::vector<TrajectorySample>& s, double r_min_km, double r_max_km,
    int n_arcs) {
    if (s.size() < 2) throw ConfigError("violation audit needs >= 2 samples");
    if (n_arcs < 1) throw ConfigError("violation audit needs >= 1 arc");
    const double dtau = static_cast<double>(n_arcs) / (s.size() - 1);

    ViolationReport rep;
    rep.arcs.assign(n_arcs, ArcViolation{});
    for (int i = 0; i < n_arcs; ++i) {
        rep.arcs[i].arc = i + 1;
        rep.arcs[i].min_radius_km = std::numeric_limits<double>::infinity();
    }
    rep.min_radius_km = std::numeric_limits<double>::infinity();
    for (const TrajectorySample& smp : s) {
        if (smp.arc < 1 || smp.arc > n_arcs)
            throw ConfigError("sample arc index outside audit range");
        ArcViolation& av = rep.arcs[smp.arc - 1];
        av.min_radius_km = std::min(av.min_radius_km, smp.radius_km);
        av.max_radius_km = std::max(av.max_radius_km, smp.radius_km);
        if (smp.radius_km < r_min_km) ++av.keep_out_hits;
        if (smp.radius_km > r_max_km) {
            av.keep_in_depth_km =
                std::max(av.keep_in_depth_km, smp.radius_km - r_max_km);
            av.keep_in_span += dtau;
        }
        av.y_final = smp.y_acc;  // samples are time-ordered within each arc
    }
    for (const ArcViolation& av : rep.arcs) {
        rep.keep_out_hits += av.keep_out_hits;
        rep.keep_in_depth_km = std::max(rep.keep_in_depth_km, av.keep_in_depth_km);
        rep.keep_in_span += av.keep_in_span;
        rep.min_radius_km = std::min(rep.min_radius_km, av.min_radius_km);
        rep.max_radius_km = std::max(rep.max_radius_km, av.max_radius_km);
    }
    rep.keep_out_clean = rep.keep_out_hits == 0;
    return rep;
}

}  // namespace loiter
