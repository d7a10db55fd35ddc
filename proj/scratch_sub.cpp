// scratch: build the first SCP subproblem from the preset and probe backends
#include <cstdio>
#include "loiter/scenarios.hpp"
#include "loiter/scp.hpp"
#include "loiter/conic.hpp"

using namespace loiter;

int main(int argc, char** argv) {
    const double rho = argc > 1 ? std::atof(argv[1]) : 1.0;
    ScenarioConfig cfg = preset_scenario("three-impulse");
    ScenarioProblem p = make_problem(cfg);
    std::printf("decision dim: %d\n", p.guess.layout.dim());

    const MeritBreakdown m0 =
        exact_penalty_objective(p.guess, p.setup, cfg.solver);
    std::printf("guess merit: in_hard_set=%d value=%.6e cost=%.6e defect_l1=%.6e "
                "impulse_hinge=%.6e note=%s\n",
                m0.in_hard_set, m0.value, m0.cost_term, m0.defect_l1,
                m0.impulse_hinge, m0.hard_set_note.c_str());

    const std::vector<SubarcLin> lin = linearize_subarcs(p.guess, p.setup);
    const SubproblemModel model =
        detail::assemble_subproblem(p.guess, lin, p.setup, cfg.solver, rho);
    const ConicProblem& cp = model.problem;
    std::printf("subproblem: n=%d eq=%d nonneg=%d soc_blocks=%zu q_inf=%.3e\n",
                cp.n, static_cast<int>(cp.b.size()), cp.nonneg_dim,
                cp.soc_dims.size(), cp.q.lpNorm<Eigen::Infinity>());
    std::printf("A_inf=%.3e b_inf=%.3e G_inf=%.3e h_inf=%.3e P_max=%.3e\n",
                cp.A.coeffs().abs().maxCoeff(),
                cp.b.lpNorm<Eigen::Infinity>(),
                cp.G.coeffs().abs().maxCoeff(),
                cp.h.lpNorm<Eigen::Infinity>(),
                cp.P.nonZeros() ? cp.P.coeffs().abs().maxCoeff() : 0.0);

    BackendOptions o;
    o.name = "ipm";
    ConeSolution s = backend_solve(cp, o);
    std::printf("ipm: status=%s its=%d gap=%.3e pres=%.3e dres=%.3e obj=%.8e\n",
                to_string(s.status), s.iterations, s.gap, s.primal_res,
                s.dual_res, s.objective);
    if (s.status == ConeStatus::optimal || s.status == ConeStatus::inaccurate) {
        DecisionVector zn = model.extract(s);
        const MeritBreakdown m1 =
            exact_penalty_objective(zn, p.setup, cfg.solver);
        std::printf("ipm z_next merit: in_hard=%d value=%.6e (model=%.6e) note=%s\n",
                    m1.in_hard_set, m1.value, model.model_value(zn.v),
                    m1.hard_set_note.c_str());
    }

    o.name = "admm";
    s = backend_solve(cp, o);
    std::printf("admm: status=%s its=%d pres=%.3e dres=%.3e obj=%.8e\n",
                to_string(s.status), s.iterations, s.primal_res, s.dual_res,
                s.objective);
    if (s.status == ConeStatus::optimal || s.status == ConeStatus::inaccurate) {
        DecisionVector zn = model.extract(s);
        const MeritBreakdown m1 =
            exact_penalty_objective(zn, p.setup, cfg.solver);
        std::printf("admm z_next merit: in_hard=%d value=%.6e (model=%.6e) note=%s\n",
                    m1.in_hard_set, m1.value, model.model_value(zn.v),
                    m1.hard_set_note.c_str());
    }
    return 0;
}
