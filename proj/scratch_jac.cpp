// scratch: finite-difference audit of the subarc linearization and the model
#include <cstdio>
#include "loiter/scenarios.hpp"
#include "loiter/scp.hpp"
#include "loiter/shooting.hpp"

using namespace loiter;

int main() {
    setvbuf(stdout, nullptr, _IONBF, 0);
    ScenarioConfig cfg = preset_scenario("three-impulse");
    ScenarioProblem p = make_problem(cfg, true, 1, 40.0);
    const PenaltyWeights& w = cfg.solver;
    const DecisionVector& z = p.guess;
    const DecisionLayout& l = z.layout;
    const int K = l.subarcs, dim = l.state_dim();

    // FD vs variational sensitivities, subarc by subarc, at the guess.
    for (int i = 0; i < l.n_arcs; ++i) {
        const Eigen::Vector2d S = z.dilation(i);
        for (int k = 0; k < K; ++k) {
            const Eigen::VectorXd xk = z.node(i, k);
            const SubarcResult r =
                integrate_subarc(*p.setup.sys, xk, S, k, K, p.setup.integ);
            double worst_stm = 0.0, worst_sens = 0.0;
            for (int c = 0; c < dim; ++c) {
                const double h = 1e-7 * std::max(1.0, std::abs(xk[c]));
                Eigen::VectorXd xp = xk, xm = xk;
                xp[c] += h;
                xm[c] -= h;
                if (c == dim - 1 && xm[c] < 0.0) xm[c] = xk[c];  // stay in span
                const Eigen::VectorXd fp =
                    integrate_subarc_state(*p.setup.sys, xp, S, k, K, p.setup.integ);
                const Eigen::VectorXd fm =
                    integrate_subarc_state(*p.setup.sys, xm, S, k, K, p.setup.integ);
                const Eigen::VectorXd fd = (fp - fm) / (xp[c] - xm[c]);
                const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
                worst_stm = std::max(
                    worst_stm, (fd - r.stm.col(c)).cwiseAbs().maxCoeff() / scale);
            }
            for (int c = 0; c < 2; ++c) {
                const double h = 1e-7 * std::max(1.0, std::abs(S[c]));
                Eigen::Vector2d Sp = S, Sm = S;
                Sp[c] += h;
                Sm[c] -= h;
                const Eigen::VectorXd fp =
                    integrate_subarc_state(*p.setup.sys, xk, Sp, k, K, p.setup.integ);
                const Eigen::VectorXd fm =
                    integrate_subarc_state(*p.setup.sys, xk, Sm, k, K, p.setup.integ);
                const Eigen::VectorXd fd = (fp - fm) / (2.0 * h);
                const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
                worst_sens = std::max(
                    worst_sens, (fd - r.sens.col(c)).cwiseAbs().maxCoeff() / scale);
            }
            std::printf("arc %d subarc %d: stm err %.2e sens err %.2e yend=%.3e\n",
                        i, k, worst_stm, worst_sens, r.end[6]);
        }
    }

    // Model consistency at the base point: model_value(z_j) == merit(z_j).
    const MeritBreakdown m0 = exact_penalty_objective(z, p.setup, w);
    const std::vector<SubarcLin> lin = linearize_subarcs(z, p.setup);
    for (double rho : {1.0, 0.25, 1e-3}) {
        const SubproblemModel model =
            detail::assemble_subproblem(z, lin, p.setup, w, rho);
        const double mv = model.model_value(z.v);
        std::printf("rho=%.3e model(z_j)=%.10e merit=%.10e diff=%.2e\n", rho, mv,
                    m0.value, std::abs(mv - m0.value));
    }

    // Directional agreement: merit along the prox step vs the model.
    const SubproblemModel model =
        detail::assemble_subproblem(z, lin, p.setup, w, 0.25);
    BackendOptions ob;
    const ConeSolution s = backend_solve(model.problem, ob);
    std::printf("backend %s\n", to_string(s.status));
    const DecisionVector zn = model.extract(s);
    for (double t : {1e-6, 1e-4, 1e-2, 1.0}) {
        DecisionVector zt = z;
        zt.v = z.v + t * (zn.v - z.v);
        const MeritBreakdown mt = exact_penalty_objective(zt, p.setup, w);
        const double mv = model.model_value(zt.v);
        std::printf("t=%.0e merit=%.10e model=%.10e in_hard=%d\n", t, mt.value,
                    mv, mt.in_hard_set);
    }
    return 0;
}
