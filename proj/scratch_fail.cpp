// scratch: trace the interior-point run on the first failing subproblem
#include <cstdio>
#include "loiter/scenarios.hpp"
#include "loiter/scp.hpp"
#include "loiter/conic.hpp"

using namespace loiter;

int main(int argc, char** argv) {
    setvbuf(stdout, nullptr, _IONBF, 0);
    const double rho_probe = argc > 1 ? std::atof(argv[1]) : 0.125;
    ScenarioConfig cfg = preset_scenario("three-impulse");
    ScenarioProblem p = make_problem(cfg, true, 1, 1.5 * 12.731);
    const PenaltyWeights& w = cfg.solver;
    DecisionVector z = p.guess;
    MeritBreakdown cur = exact_penalty_objective(z, p.setup, w);
    BackendOptions ob;

    // Reproduce the accepted first step (rho ladder 1 -> 0.25).
    double rho = w.rho0;
    std::vector<SubarcLin> lin = linearize_subarcs(z, p.setup);
    for (int att = 0; att < 6; ++att) {
        const SubproblemModel model =
            detail::assemble_subproblem(z, lin, p.setup, w, rho);
        const ConeSolution s = backend_solve(model.problem, ob);
        if (s.status == ConeStatus::optimal || s.status == ConeStatus::inaccurate) {
            DecisionVector zn = model.extract(s);
            const MeritBreakdown mn = exact_penalty_objective(zn, p.setup, w);
            if (mn.value <= cur.value + 1e-12) {
                z = zn;
                cur = mn;
                std::printf("accepted step at rho=%.3e merit=%.6e\n", rho, mn.value);
                break;
            }
        }
        rho *= 0.5;
    }

    // Now the failing subproblem, with a full trace.
    lin = linearize_subarcs(z, p.setup);
    const SubproblemModel model =
        detail::assemble_subproblem(z, lin, p.setup, w, rho_probe);
    ob.trace = true;
    const ConeSolution s = backend_solve(model.problem, ob);
    std::printf("probe rho=%.3e -> %s its=%d pres=%.2e dres=%.2e gap=%.2e\n",
                rho_probe, to_string(s.status), s.iterations, s.primal_res,
                s.dual_res, s.gap);
    return 0;
}
