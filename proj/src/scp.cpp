// scp.cpp: exact-penalty merit evaluation and the prox-linear outer loop.

#include "loiter/scp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "loiter/ocp.hpp"

namespace loiter {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

void check_layouts(const DecisionVector& z, const TranscriptionSetup& setup) {
    const DecisionLayout& a = z.layout;
    const DecisionLayout& b = setup.layout;
    if (a.n_arcs != b.n_arcs || a.subarcs != b.subarcs || a.with_y != b.with_y)
        throw ConfigError("decision vector does not match the transcription");
    if (setup.sys == nullptr) throw ConfigError("transcription has no dynamics");
    if (setup.sys->dim() != a.state_dim())
        throw ConfigError("dynamics width does not match the layout");
    if (z.v.size() != a.dim())
        throw ConfigError("decision vector has the wrong length");
}

/// Largest physical time any subarc propagation could reach from z.
double needed_horizon(const DecisionVector& z) {
    const DecisionLayout& l = z.layout;
    double tmax = z.terminal_time();
    for (int i = 0; i < l.n_arcs; ++i) {
        double smax = std::max(z.dilation(i)[0], z.dilation(i)[1]);
        for (int k = 0; k <= l.subarcs; ++k)
            tmax = std::max(tmax, z.node_time(i, k) + smax / l.subarcs);
    }
    return tmax * 1.02;
}

void guard_horizon(const DecisionVector& z, const TranscriptionSetup& setup) {
    if (setup.time_horizon <= 0.0) return;
    const double needed = needed_horizon(z);
    if (needed > setup.time_horizon) throw HorizonExceeded(needed);
}

// Membership slack for the hard-set inequalities. The subproblem enforces
// them exactly, but a cone backend returns them only to its own tolerance,
// so auditing tighter than that would reject every backend step.
constexpr double kIneqSlack = 1e-9;

}  // namespace

MeritBreakdown exact_penalty_objective(const DecisionVector& z,
                                       const TranscriptionSetup& setup,
                                       const PenaltyWeights& w) {
    check_layouts(z, setup);
    const DecisionLayout& l = z.layout;
    const int m = l.state_dim();
    const int K = l.subarcs;

    MeritBreakdown out;
    out.arc_budgets = Eigen::VectorXd::Zero(l.n_arcs);
    const auto fail = [&out](const std::string& note) -> MeritBreakdown& {
        out.in_hard_set = false;
        out.hard_set_note = note;
        out.value = std::numeric_limits<double>::infinity();
        return out;
    };

    // --- hard-set membership -------------------------------------------------
    if (static_cast<int>(setup.discrete.active_mask.size()) != l.impulse_slots())
        throw ConfigError("active_mask length must match impulse slots");
    for (int slot = 0; slot < l.impulse_slots(); ++slot)
        if (setup.discrete.active_mask[slot] == 0 &&
            z.impulse(slot).lpNorm<Eigen::Infinity>() > setup.eq_tol)
            return fail("pinned impulse is nonzero");
    for (int i = 0; i < l.n_arcs; ++i) {
        const Eigen::Vector2d S = z.dilation(i);
        for (int c = 0; c < 2; ++c)
            if (S[c] < setup.dilation.s_min - kIneqSlack ||
                S[c] > setup.dilation.s_max + kIneqSlack)
                return fail("dilation outside its box");
    }
    {  // initial boundary: state = deviation + allocated impulse, y = t = 0
        const Eigen::VectorXd nd = z.node(0, 0);
        Vec6 expected = setup.x_init;
        expected.tail<3>() += Vec3(z.impulse(0));
        if ((nd.head<6>() - expected).lpNorm<Eigen::Infinity>() > setup.eq_tol)
            return fail("initial node violates the boundary condition");
        if (l.with_y && std::abs(nd[6]) > setup.eq_tol)
            return fail("initial accumulator is nonzero");
        if (std::abs(nd[m - 1]) > setup.eq_tol)
            return fail("clock does not start at zero");
    }
    for (int i = 1; i < l.n_arcs; ++i) {  // impulsive jumps between arcs
        const Eigen::VectorXd nd = z.node(i, 0);
        const Eigen::VectorXd prev = z.node(i - 1, K);
        Vec6 expected = prev.head<6>();
        expected.tail<3>() += Vec3(z.impulse(i));
        if ((nd.head<6>() - expected).lpNorm<Eigen::Infinity>() > setup.eq_tol)
            return fail("arc join violates the impulsive jump");
        if (l.with_y && std::abs(nd[6]) > setup.eq_tol)
            return fail("accumulator does not reset at an arc start");
        if (std::abs(nd[m - 1] - prev[m - 1]) > setup.eq_tol)
            return fail("clock jumps between arcs");
    }
    {  // terminal jump carries every extended row
        const Eigen::VectorXd nd = z.terminal();
        Eigen::VectorXd expected = z.node(l.n_arcs - 1, K);
        expected.segment<3>(3) += Vec3(z.impulse(l.n_arcs));
        if ((nd - expected).lpNorm<Eigen::Infinity>() > setup.eq_tol)
            return fail("terminal state violates the final jump");
    }
    if (l.with_y) {
        const double budget = kBudgetMargin * w.eps_relax + kIneqSlack;
        for (int i = 0; i < l.n_arcs; ++i) {
            for (int k = 0; k <= K; ++k)
                if (z.node_y(i, k) < -kIneqSlack)
                    return fail("accumulator went negative");
            for (int k = 0; k < K; ++k)
                if (z.node_y(i, k + 1) - z.node_y(i, k) > budget)
                    return fail("accumulator exceeds a subarc budget");
        }
        if (z.terminal()[6] < -kIneqSlack)
            return fail("terminal accumulator went negative");
    }
    for (int i = 0; i < l.n_arcs; ++i)
        for (int k = 0; k <= K; ++k)
            if (z.node_time(i, k) < -kIneqSlack)
                return fail("clock went negative");
    if (z.terminal_time() < -kIneqSlack) return fail("clock went negative");
    out.in_hard_set = true;

    // --- penalty pieces --------------------------------------------------------
    guard_horizon(z, setup);
    for (int i = 0; i < l.n_arcs; ++i) {
        const Eigen::Vector2d S = z.dilation(i);
        for (int k = 0; k < K; ++k) {
            const Eigen::VectorXd d = defect(*setup.sys, z.node(i, k),
                                             z.node(i, k + 1), S, k, K,
                                             setup.integ);
            out.defect_l1 += d.lpNorm<1>();
            out.max_defect =
                std::max(out.max_defect, d.lpNorm<Eigen::Infinity>());
        }
        if (l.with_y) out.arc_budgets[i] = z.node_y(i, K) - z.node_y(i, 0);
    }
    double impulse_mag = 0.0;
    for (int slot = 0; slot < l.impulse_slots(); ++slot) {
        const Vec3 dv = z.impulse(slot);
        const double g = eval_G(dv, setup.discrete);
        out.impulse_hinge += std::max(0.0, g);
        out.max_impulse_violation = std::max(out.max_impulse_violation, g);
        impulse_mag += dv.norm();
    }
    if (!l.with_y) {
        const double scale = setup.path.r_max;
        const auto add_node = [&](const Eigen::VectorXd& xs) {
            const Eigen::Vector2d g =
                eval_g(RelativeState::unpack(xs.head<6>()), setup.path);
            for (int j = 0; j < 2; ++j)
                out.node_hinge += std::max(0.0, g[j]) / scale;
        };
        for (int i = 0; i < l.n_arcs; ++i)
            for (int k = 0; k <= K; ++k) add_node(z.node(i, k));
        add_node(z.terminal());
    }

    out.cost_term = setup.cost.impulse_weight * impulse_mag;
    if (setup.cost.maximize_final_time) out.cost_term -= z.terminal_time();
    out.value = out.cost_term +
                w.gamma * (out.defect_l1 + out.impulse_hinge + out.node_hinge);
    return out;
}

SolveOutcome prox_linear_solve(
    const DecisionVector& guess, const TranscriptionSetup& setup,
    const PenaltyWeights& w, const BackendOptions& backend,
    const std::function<void(const IterateRecord&)>& on_iterate) {
    w.validate();
    check_layouts(guess, setup);
    const auto t_total = Clock::now();

    DecisionVector z = guess;
    MeritBreakdown cur = exact_penalty_objective(z, setup, w);
    if (!cur.in_hard_set)
        throw SolverError("initial guess violates the hard set: " +
                          cur.hard_set_note);

    SolveOutcome out{SolveReport{}, z};
    SolveReport& rep = out.report;
    rep.backend = backend.name;
    rep.mode = setup.layout.with_y ? "isoperimetric" : "node-only";

    double rho = w.rho0;
    int consecutive_clean = 0;
    bool converged = false;
    std::string status = "iteration-cap";
    std::vector<double> lin_ts, asm_ts, bck_ts, iter_ts;

    for (int j = 1; j <= w.max_iterations; ++j) {
        auto t0 = Clock::now();
        std::vector<SubarcLin> lin = linearize_subarcs(z, setup);
        const double lin_ms = ms_since(t0);

        int rejections = 0, retries = 0;
        bool accepted = false, stalled = false;
        DecisionVector z_next = z;
        MeritBreakdown mer_next;
        SubproblemModel model;
        double asm_ms = 0.0, bck_ms = 0.0;
        int bck_iters = 0;
        while (!accepted && !stalled) {
            t0 = Clock::now();
            model = detail::assemble_subproblem(z, lin, setup, w, rho);
            asm_ms = ms_since(t0);
            t0 = Clock::now();
            const ConeSolution sol = backend_solve(model.problem, backend);
            bck_ms = ms_since(t0);
            bck_iters = sol.iterations;
            if (sol.status == ConeStatus::failure ||
                sol.status == ConeStatus::infeasible) {
                if (++retries > w.max_backend_retries)
                    throw BackendError(
                        std::string("cone backend kept failing (last status ") +
                        to_string(sol.status) + ")");
                rho *= 0.5;  // retry with a stronger proximal pull
                continue;
            }
            z_next = model.extract(sol);
            mer_next = exact_penalty_objective(z_next, setup, w);
            if (mer_next.value <= cur.value + 1e-12) {
                accepted = true;
            } else if (++rejections > w.max_rejections) {
                stalled = true;
            } else {
                rho *= 0.5;
            }
        }
        if (stalled) {
            status = "stalled";
            break;
        }

        IterateRecord rec;
        rec.iteration = j;
        rec.merit = mer_next.value;
        rec.model_objective = model.model_value(z_next.v);
        rec.step_norm = (z_next.v - z.v).norm();
        rec.prox_gradient_norm = rec.step_norm / rho;
        rec.rho = rho;
        rec.rejections = rejections;
        rec.backend_iterations = bck_iters;
        rec.max_defect = mer_next.max_defect;
        rec.max_impulse_violation = mer_next.max_impulse_violation;
        rec.arc_budgets = mer_next.arc_budgets;
        rec.linearize_ms = lin_ms;
        rec.assemble_ms = asm_ms;
        rec.backend_ms = bck_ms;
        rep.iterates.push_back(rec);
        lin_ts.push_back(lin_ms);
        asm_ts.push_back(asm_ms);
        bck_ts.push_back(bck_ms);
        iter_ts.push_back(asm_ms + bck_ms);
        if (on_iterate) on_iterate(rec);

        z = z_next;
        cur = mer_next;
        if (rejections == 0) {
            if (++consecutive_clean >= 3) {
                rho = std::min(rho * 1.5, w.rho_max);
                consecutive_clean = 0;
            }
        } else {
            consecutive_clean = 0;
        }
        if (rec.prox_gradient_norm <= w.eps_stop) {
            converged = true;
            status = "converged";
            break;
        }
    }

    rep.converged = converged;
    rep.status = status;
    rep.iterations = static_cast<int>(rep.iterates.size());
    rep.merit_final = cur.value;
    rep.final_time_norm = z.terminal_time();
    rep.final_time_days = setup.grav.norm_to_days(rep.final_time_norm);
    const double cms = setup.grav.velocity_unit_kmps() * 1e5;
    for (int slot = 0; slot < z.layout.impulse_slots(); ++slot) {
        rep.impulses.push_back(Vec3(z.impulse(slot)));
        if (setup.discrete.active_mask[slot] == 1)
            rep.impulse_cms.push_back(z.impulse(slot).norm() * cms);
    }
    rep.median_linearize_ms = median(lin_ts);
    rep.median_assemble_ms = median(asm_ts);
    rep.median_backend_ms = median(bck_ts);
    rep.median_iter_ms = median(iter_ts);
    rep.total_ms = ms_since(t_total);
    out.z = z;
    return out;
}

}  // namespace loiter
