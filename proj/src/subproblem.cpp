// subproblem.cpp: cone encoding of one prox-linear step. Soft pieces
// (defect l1 norms, impulse-cap hinges, node shell hinges in node-only mode)
// get slack variables; the hard set Z (boundary/jump equalities, impulse
// pins and cones, dilation box, accumulator sign/budget rows) is encoded
// directly. Variable order: decision step (relative to the reference
// iterate), defect slacks, impulse hinges, node hinges, optional
// impulse-magnitude epigraphs. Posing the decision block as a step keeps
// the cone data scaled by the step size instead of the iterate's absolute
// coordinates, which is what lets small prox radii stay well conditioned.

#include <cmath>

#include "loiter/ocp.hpp"
#include "loiter/scp.hpp"

namespace loiter {

namespace {

/// Subarcs are linearized arc-major: index = arc * K + k.
int lin_index(const DecisionLayout& l, int arc, int k) {
    return arc * l.subarcs + k;
}

/// G subgradient at dv (gradient of |dv| away from zero, zero subgradient
/// at the kink so the linearized cap reduces to a satisfied constant).
Vec3 impulse_subgradient(const Vec3& dv) {
    const double nrm = dv.norm();
    return nrm > 1e-14 ? Vec3(dv / nrm) : Vec3(Vec3::Zero());
}

}  // namespace

void PenaltyWeights::validate() const {
    if (!(gamma > 0.0)) throw ConfigError("penalty weight gamma must be positive");
    if (!(rho0 > 0.0) || !(rho_max >= rho0))
        throw ConfigError("prox radius needs 0 < rho0 <= rho_max");
    if (!(eps_stop > 0.0)) throw ConfigError("eps_stop must be positive");
    if (!(eps_relax > 0.0)) throw ConfigError("eps_relax must be positive");
    if (max_iterations < 1 || max_rejections < 1 || max_backend_retries < 1)
        throw ConfigError("iteration caps must be at least 1");
}

std::vector<SubarcLin> linearize_subarcs(const DecisionVector& z,
                                         const TranscriptionSetup& setup) {
    const DecisionLayout& l = z.layout;
    std::vector<SubarcLin> lin(static_cast<size_t>(l.n_arcs) * l.subarcs);
    for (int i = 0; i < l.n_arcs; ++i) {
        const Eigen::Vector2d S = z.dilation(i);
        for (int k = 0; k < l.subarcs; ++k) {
            const Eigen::VectorXd start = z.node(i, k);
            SubarcResult res =
                integrate_subarc(*setup.sys, start, S, k, l.subarcs, setup.integ);
            SubarcLin& sl = lin[lin_index(l, i, k)];
            // The base defect uses the same state-only propagation as the
            // merit so model and merit agree exactly at the base point.
            sl.defect = z.node(i, k + 1) -
                        integrate_subarc_state(*setup.sys, start, S, k,
                                               l.subarcs, setup.integ);
            sl.stm = std::move(res.stm);
            sl.sens = std::move(res.sens);
        }
    }
    return lin;
}

namespace detail {

SubproblemModel assemble_subproblem(const DecisionVector& z_j,
                                    std::vector<SubarcLin> lin,
                                    const TranscriptionSetup& setup,
                                    const PenaltyWeights& w, double rho) {
    const DecisionLayout& l = z_j.layout;
    l.validate();
    setup.discrete.validate();
    if (static_cast<int>(setup.discrete.active_mask.size()) != l.impulse_slots())
        throw ConfigError("active_mask length must match impulse slots");
    if (!(rho > 0.0)) throw ConfigError("prox radius must be positive");

    const int m = l.state_dim();
    const int K = l.subarcs;
    const bool node_rows = !l.with_y;

    SubproblemModel model;
    model.layout = l;
    model.rho = rho;
    model.z_ref = z_j.v;
    model.lin = std::move(lin);
    model.gamma = w.gamma;
    model.gamma_node = node_rows ? w.gamma : 0.0;
    model.node_scale = setup.path.r_max;
    model.maximize_final_time = setup.cost.maximize_final_time;
    model.impulse_weight = setup.cost.impulse_weight;

    ConicBuilder cb;
    const int zv = cb.add_vars(l.dim());  // decision block sits first
    const int defect_slack = cb.add_vars(l.n_arcs * K * m);
    const int hinge_slack = cb.add_vars(l.impulse_slots());
    int node_hinge_slack = -1;
    const int node_total = l.node_count();
    if (node_rows) node_hinge_slack = cb.add_vars(2 * node_total);
    int epi = -1;
    if (setup.cost.impulse_weight != 0.0) epi = cb.add_vars(l.impulse_slots());

    // --- objective ---------------------------------------------------------
    if (setup.cost.maximize_final_time)
        cb.obj_linear(zv + l.terminal_offset() + m - 1, -1.0);
    for (int i = 0; i < l.n_arcs * K * m; ++i)
        cb.obj_linear(defect_slack + i, w.gamma);
    for (int i = 0; i < l.impulse_slots(); ++i)
        cb.obj_linear(hinge_slack + i, w.gamma);
    if (node_rows)
        for (int i = 0; i < 2 * node_total; ++i)
            cb.obj_linear(node_hinge_slack + i, model.gamma_node);
    if (epi >= 0)
        for (int i = 0; i < l.impulse_slots(); ++i)
            cb.obj_linear(epi + i, setup.cost.impulse_weight);
    // In step variables the prox term is the pure quadratic |delta|^2/(2 rho);
    // the only objective constant lost to the cone encoding is the reference
    // cost itself.
    for (int i = 0; i < l.dim(); ++i) cb.obj_quad_diag(zv + i, 1.0 / rho);
    model.obj_offset =
        setup.cost.maximize_final_time ? -z_j.terminal_time() : 0.0;

    // --- defect l1 epigraphs ----------------------------------------------
    // In step variables the linearized defect is simply the base defect plus
    // the first-order response: F(z_j) + d(k+1) - STM d(k) - SENS d(S).
    for (int i = 0; i < l.n_arcs; ++i) {
        const int off_S = zv + l.dilation_offset(i);
        for (int k = 0; k < K; ++k) {
            const SubarcLin& sl = model.lin[lin_index(l, i, k)];
            const int off_k = zv + l.node_offset(i, k);
            const int off_k1 = zv + l.node_offset(i, k + 1);
            const int slack0 = defect_slack + (lin_index(l, i, k)) * m;
            for (int r = 0; r < m; ++r) {
                LinExpr f(sl.defect[r]);
                f.add(off_k1 + r, 1.0);
                for (int c = 0; c < m; ++c)
                    if (sl.stm(r, c) != 0.0) f.add(off_k + c, -sl.stm(r, c));
                for (int c = 0; c < 2; ++c)
                    if (sl.sens(r, c) != 0.0) f.add(off_S + c, -sl.sens(r, c));
                // slack >= |f|: two one-sided rows
                LinExpr upper(-f.c);
                upper.add(slack0 + r, 1.0);
                for (const auto& [var, coeff] : f.terms)
                    upper.add(var, -coeff);
                cb.require_nonneg(upper);
                LinExpr lower(f.c);
                lower.add(slack0 + r, 1.0);
                for (const auto& [var, coeff] : f.terms)
                    lower.add(var, coeff);
                cb.require_nonneg(lower);
            }
        }
    }

    // --- impulse caps: hinge slacks plus hard cones -------------------------
    for (int slot = 0; slot < l.impulse_slots(); ++slot) {
        const int dv0 = zv + l.impulse_offset(slot);
        const Vec3 dv_ref = z_j.impulse(slot);
        const double g0 = eval_G(dv_ref, setup.discrete);
        const Vec3 grad = impulse_subgradient(dv_ref);
        model.impulse_base.push_back(g0);
        model.impulse_grad.push_back(grad);

        LinExpr hinge(-g0);  // u - (G(dv_ref) + grad . d(dv)) >= 0
        hinge.add(hinge_slack + slot, 1.0);
        for (int c = 0; c < 3; ++c)
            if (grad[c] != 0.0) hinge.add(dv0 + c, -grad[c]);
        cb.require_nonneg(hinge);
        cb.require_nonneg(LinExpr(0.0).add(hinge_slack + slot, 1.0));

        // Hard caps and epigraphs act on the absolute impulse dv_ref + d(dv).
        std::vector<LinExpr> cone(4);
        cone[0] = LinExpr(setup.discrete.dv_max);
        for (int c = 0; c < 3; ++c)
            cone[c + 1] = LinExpr(dv_ref[c]).add(dv0 + c, 1.0);
        cb.require_soc(cone);

        if (epi >= 0) {  // |dv| <= epi for the running impulse cost
            std::vector<LinExpr> ec(4);
            ec[0] = LinExpr(0.0).add(epi + slot, 1.0);
            for (int c = 0; c < 3; ++c)
                ec[c + 1] = LinExpr(dv_ref[c]).add(dv0 + c, 1.0);
            cb.require_soc(ec);
        }

        if (setup.discrete.active_mask[slot] == 0)
            for (int c = 0; c < 3; ++c)
                cb.require_zero(LinExpr(dv_ref[c]).add(dv0 + c, 1.0));
    }

    // --- boundary and jump equalities ---------------------------------------
    // Constants are the residuals of each equality at the reference point;
    // they vanish whenever z_j already sits in the hard set.
    const Vec6 x0 = setup.x_init;
    {
        const int nd = zv + l.node_offset(0, 0);
        const int dv0 = zv + l.impulse_offset(0);
        const Eigen::VectorXd rn = z_j.node(0, 0);
        const Vec3 rdv = z_j.impulse(0);
        for (int r = 0; r < 6; ++r) {
            LinExpr e(rn[r] - x0[r] - (r >= 3 ? rdv[r - 3] : 0.0));
            e.add(nd + r, 1.0);
            if (r >= 3) e.add(dv0 + (r - 3), -1.0);
            cb.require_zero(e);
        }
        if (l.with_y) cb.require_zero(LinExpr(rn[6]).add(nd + 6, 1.0));
        cb.require_zero(
            LinExpr(rn[m - 1]).add(nd + m - 1, 1.0));  // t starts at 0
    }
    for (int i = 1; i < l.n_arcs; ++i) {
        const int nd = zv + l.node_offset(i, 0);
        const int prev = zv + l.node_offset(i - 1, K);
        const int dv = zv + l.impulse_offset(i);
        const Eigen::VectorXd rn = z_j.node(i, 0);
        const Eigen::VectorXd rp = z_j.node(i - 1, K);
        const Vec3 rdv = z_j.impulse(i);
        for (int r = 0; r < 6; ++r) {
            LinExpr e(rn[r] - rp[r] - (r >= 3 ? rdv[r - 3] : 0.0));
            e.add(nd + r, 1.0).add(prev + r, -1.0);
            if (r >= 3) e.add(dv + (r - 3), -1.0);
            cb.require_zero(e);
        }
        if (l.with_y)  // accumulator resets at every arc start
            cb.require_zero(LinExpr(rn[6]).add(nd + 6, 1.0));
        cb.require_zero(LinExpr(rn[m - 1] - rp[m - 1])
                            .add(nd + m - 1, 1.0)
                            .add(prev + m - 1, -1.0));
    }
    {
        const int nd = zv + l.terminal_offset();
        const int prev = zv + l.node_offset(l.n_arcs - 1, K);
        const int dv = zv + l.impulse_offset(l.n_arcs);
        const Eigen::VectorXd rn = z_j.terminal();
        const Eigen::VectorXd rp = z_j.node(l.n_arcs - 1, K);
        const Vec3 rdv = z_j.impulse(l.n_arcs);
        for (int r = 0; r < m; ++r) {
            LinExpr e(rn[r] - rp[r] -
                      (r >= 3 && r <= 5 ? rdv[r - 3] : 0.0));
            e.add(nd + r, 1.0).add(prev + r, -1.0);
            if (r >= 3 && r <= 5) e.add(dv + (r - 3), -1.0);
            cb.require_zero(e);  // y and t both carry through
        }
    }

    // --- dilation box --------------------------------------------------------
    setup.dilation.validate();
    for (int i = 0; i < l.n_arcs; ++i) {
        const int off_S = zv + l.dilation_offset(i);
        const Eigen::Vector2d rs = z_j.dilation(i);
        for (int c = 0; c < 2; ++c) {
            if (setup.dilation.s_min == setup.dilation.s_max) {
                cb.require_zero(
                    LinExpr(rs[c] - setup.dilation.s_min).add(off_S + c, 1.0));
            } else {
                cb.require_nonneg(
                    LinExpr(rs[c] - setup.dilation.s_min).add(off_S + c, 1.0));
                cb.require_nonneg(
                    LinExpr(setup.dilation.s_max - rs[c]).add(off_S + c, -1.0));
            }
        }
    }

    // --- accumulator sign and budget rows ------------------------------------
    if (l.with_y) {
        const double budget = kBudgetMargin * w.eps_relax;
        for (int i = 0; i < l.n_arcs; ++i) {
            for (int k = 1; k <= K; ++k)  // k = 0 is pinned to zero above
                cb.require_nonneg(LinExpr(z_j.node_y(i, k))
                                      .add(zv + l.node_offset(i, k) + 6, 1.0));
            for (int k = 0; k < K; ++k) {
                LinExpr e(budget - (z_j.node_y(i, k + 1) - z_j.node_y(i, k)));
                e.add(zv + l.node_offset(i, k + 1) + 6, -1.0);
                e.add(zv + l.node_offset(i, k) + 6, 1.0);
                cb.require_nonneg(e);
            }
        }
        cb.require_nonneg(LinExpr(z_j.terminal()[6])
                              .add(zv + l.terminal_offset() + 6, 1.0));
    }

    // --- time stays nonnegative ----------------------------------------------
    for (int i = 0; i < l.n_arcs; ++i)
        for (int k = 0; k <= K; ++k) {
            if (i == 0 && k == 0) continue;  // pinned to zero exactly
            cb.require_nonneg(
                LinExpr(z_j.node_time(i, k))
                    .add(zv + l.node_offset(i, k) + m - 1, 1.0));
        }
    cb.require_nonneg(LinExpr(z_j.terminal_time())
                          .add(zv + l.terminal_offset() + m - 1, 1.0));

    // --- node shell rows (node-only mode) -------------------------------------
    if (node_rows) {
        setup.path.validate();
        const double scale = setup.path.r_max;
        int node_idx = 0;
        const auto add_node = [&](const Eigen::VectorXd& ref, int off) {
            const RelativeState xr = RelativeState::unpack(ref.head<6>());
            const Eigen::Vector2d g0 = eval_g(xr, setup.path);
            const Eigen::Matrix<double, 2, 6> gg = eval_g_gradient(xr, setup.path);
            model.node_g_base.push_back(g0);
            model.node_g_grad.push_back(gg.leftCols<3>());
            for (int j = 0; j < 2; ++j) {
                const int u = node_hinge_slack + 2 * node_idx + j;
                // u - (g0 + gg . d(pos))/scale >= 0
                LinExpr e(-g0[j] / scale);
                e.add(u, 1.0);
                for (int c = 0; c < 3; ++c)
                    e.add(off + c, -gg(j, c) / scale);
                cb.require_nonneg(e);
                cb.require_nonneg(LinExpr(0.0).add(u, 1.0));
            }
            ++node_idx;
        };
        for (int i = 0; i < l.n_arcs; ++i)
            for (int k = 0; k <= K; ++k)
                add_node(z_j.node(i, k), zv + l.node_offset(i, k));
        add_node(z_j.terminal(), zv + l.terminal_offset());
    }

    model.problem = cb.build();
    return model;
}

}  // namespace detail

SubproblemModel build_subproblem(const DecisionVector& z_j,
                                 const TranscriptionSetup& setup,
                                 const PenaltyWeights& w, double rho) {
    return detail::assemble_subproblem(z_j, linearize_subarcs(z_j, setup),
                                       setup, w, rho);
}

double SubproblemModel::model_value(const Eigen::VectorXd& z) const {
    const DecisionLayout& l = layout;
    if (z.size() != l.dim()) throw ConfigError("model_value: wrong z size");
    const DecisionVector zz{l, z};
    const DecisionVector zr{l, z_ref};
    const int m = l.state_dim();

    double defect_l1 = 0.0;
    for (int i = 0; i < l.n_arcs; ++i)
        for (int k = 0; k < l.subarcs; ++k) {
            const SubarcLin& sl = lin[lin_index(l, i, k)];
            const Eigen::VectorXd f =
                sl.defect + (zz.node(i, k + 1) - zr.node(i, k + 1)) -
                sl.stm * (zz.node(i, k) - zr.node(i, k)) -
                sl.sens * (zz.dilation(i) - zr.dilation(i));
            defect_l1 += f.lpNorm<1>();
        }

    double impulse_hinge = 0.0;
    double impulse_mag = 0.0;
    for (int slot = 0; slot < l.impulse_slots(); ++slot) {
        const Vec3 dv = zz.impulse(slot);
        const double glin = impulse_base[slot] +
                            impulse_grad[slot].dot(dv - Vec3(zr.impulse(slot)));
        impulse_hinge += std::max(0.0, glin);
        impulse_mag += dv.norm();
    }

    double node_hinge = 0.0;
    if (!node_g_base.empty()) {
        int node_idx = 0;
        const auto add = [&](const Eigen::VectorXd& x,
                             const Eigen::VectorXd& xr) {
            for (int j = 0; j < 2; ++j) {
                const double glin =
                    node_g_base[node_idx][j] +
                    node_g_grad[node_idx].row(j).dot(x.head<3>() - xr.head<3>());
                node_hinge += std::max(0.0, glin) / node_scale;
            }
            ++node_idx;
        };
        for (int i = 0; i < l.n_arcs; ++i)
            for (int k = 0; k <= l.subarcs; ++k) add(zz.node(i, k), zr.node(i, k));
        add(zz.terminal(), zr.terminal());
    }

    double cost = impulse_weight * impulse_mag;
    if (maximize_final_time) cost -= z[l.terminal_offset() + m - 1];
    double value = cost;
    value += gamma * (defect_l1 + impulse_hinge);
    value += gamma_node * node_hinge;
    value += (z - z_ref).squaredNorm() / (2.0 * rho);
    return value;
}

DecisionVector SubproblemModel::extract(const ConeSolution& sol) const {
    if (sol.x.size() < layout.dim())
        throw BackendError("backend returned a truncated solution");
    return {layout, z_ref + sol.x.head(layout.dim())};
}

Eigen::VectorXd prox_gradient(const Eigen::VectorXd& z_prev,
                              const Eigen::VectorXd& z_next, double rho) {
    if (!(rho > 0.0)) throw ConfigError("prox radius must be positive");
    return (z_prev - z_next) / rho;
}

}  // namespace loiter
