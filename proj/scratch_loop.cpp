// scratch: hand-rolled prox loop with per-attempt backend diagnostics
#include <cstdio>
#include "loiter/scenarios.hpp"
#include "loiter/scp.hpp"
#include "loiter/conic.hpp"

using namespace loiter;

static void step_blocks(const DecisionVector& a, const DecisionVector& b) {
    const DecisionLayout& l = a.layout;
    double dr = 0, dv = 0, dy = 0, dt = 0, dd = 0, di = 0;
    auto upd = [](double& m, double x) { if (std::abs(x) > m) m = std::abs(x); };
    for (int arc = 0; arc < l.n_arcs; ++arc)
        for (int k = 0; k <= l.subarcs; ++k) {
            const auto na = a.node(arc, k), nb = b.node(arc, k);
            for (int c = 0; c < 3; ++c) upd(dr, na[c] - nb[c]);
            for (int c = 3; c < 6; ++c) upd(dv, na[c] - nb[c]);
            if (l.with_y) upd(dy, na[6] - nb[6]);
            upd(dt, na[l.state_dim() - 1] - nb[l.state_dim() - 1]);
        }
    for (int c = 0; c < l.state_dim(); ++c)
        upd(c < 3 ? dr : c < 6 ? dv : (l.with_y && c == 6) ? dy : dt,
            a.terminal()[c] - b.terminal()[c]);
    for (int arc = 0; arc < l.n_arcs; ++arc)
        for (int c = 0; c < 2; ++c) upd(dd, a.dilation(arc)[c] - b.dilation(arc)[c]);
    for (int s = 0; s <= l.n_arcs; ++s)
        for (int c = 0; c < 3; ++c) upd(di, a.impulse(s)[c] - b.impulse(s)[c]);
    std::printf("      step dr=%.2e dv=%.2e dy=%.2e dt=%.2e ddil=%.2e dimp=%.2e\n",
                dr, dv, dy, dt, dd, di);
}

int main(int argc, char** argv) {
    setvbuf(stdout, nullptr, _IONBF, 0);
    ScenarioConfig cfg = preset_scenario(argc > 1 ? argv[1] : "three-impulse");
    double horizon = 0.0;
    ScenarioProblem p = horizon > 0 ? make_problem(cfg, true, cfg.mesh.subarcs_per_arc, horizon)
                                    : make_problem(cfg);
    const PenaltyWeights& w = cfg.solver;
    DecisionVector z = p.guess;
    MeritBreakdown cur = exact_penalty_objective(z, p.setup, w);
    std::printf("guess merit %.6e\n", cur.value);
    double rho = w.rho0;
    BackendOptions ob;

    for (int j = 1; j <= 8; ++j) {
        const std::vector<SubarcLin> lin = linearize_subarcs(z, p.setup);
        for (int att = 0; att < 12; ++att) {
            const SubproblemModel model =
                detail::assemble_subproblem(z, lin, p.setup, w, rho);
            const ConicProblem& cp = model.problem;
            const ConeSolution s = backend_solve(cp, ob);
            std::printf(
                "  j=%d att=%d rho=%.3e ipm{%s its=%d gap=%.1e "
                "pres=%.1e dres=%.1e}",
                j, att, rho, to_string(s.status),
                s.iterations, s.gap, s.primal_res, s.dual_res);
            if (s.status == ConeStatus::failure ||
                s.status == ConeStatus::infeasible) {
                std::printf(" -> backend reject\n");
                rho *= 0.5;
                continue;
            }
            DecisionVector zn = model.extract(s);
            MeritBreakdown mn;
            try {
                mn = exact_penalty_objective(zn, p.setup, w);
            } catch (const HorizonExceeded& e) {
                std::printf(" horizon retry (needed %.3f)\n", e.needed());
                horizon = 1.5 * e.needed();
                p = make_problem(cfg, true, cfg.mesh.subarcs_per_arc, horizon);
                z = p.guess;
                cur = exact_penalty_objective(z, p.setup, w);
                rho = w.rho0;
                j = 0;
                break;
            }
            std::printf(" merit=%.6e (cur %.6e) %s", mn.value, cur.value,
                        mn.in_hard_set ? "" : mn.hard_set_note.c_str());
            if (mn.value <= cur.value + 1e-12) {
                const double pg = (z.v - zn.v).norm() / rho;
                std::printf(" ACCEPT pg=%.3e\n", pg);
                z = zn;
                cur = mn;
                if (pg <= w.eps_stop) {
                    std::printf("converged at j=%d\n", j);
                    return 0;
                }
                break;
            }
            std::printf(" reject\n");
            std::printf("      model@zn=%.6e cone_obj+c=%.6e\n",
                        model.model_value(zn.v), s.objective + model.obj_offset);
            std::printf("      cand cost=%.3e defl1=%.6e imp_h=%.3e maxdef=%.3e\n",
                        mn.cost_term, mn.defect_l1, mn.impulse_hinge, mn.max_defect);
            step_blocks(z, zn);
            rho *= 0.5;
        }
    }
    std::printf("loop budget exhausted; final merit %.6e\n", cur.value);
    return 0;
}
