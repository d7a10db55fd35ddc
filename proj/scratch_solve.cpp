// scratch: full scenario solve with per-iteration tracing
#include <cstdio>
#include "loiter/scenarios.hpp"
#include "loiter/scp.hpp"

using namespace loiter;

int main(int argc, char** argv) {
    const std::string name = argc > 1 ? argv[1] : "three-impulse";
    ScenarioConfig cfg = preset_scenario(name);
    if (argc > 2) cfg.mode = argv[2];
    if (argc > 3) cfg.mesh.subarcs_per_arc = std::atoi(argv[3]);
    try {
        const ScenarioSolution sol = solve_scenario(cfg, [](const IterateRecord& r) {
            std::printf(
                "it %3d merit=%.9e model=%.6e step=%.3e pg=%.3e rho=%.3e rej=%d "
                "bk=%d maxdef=%.2e lin=%.0fms asm=%.0fms bck=%.0fms\n",
                r.iteration, r.merit, r.model_objective, r.step_norm,
                r.prox_gradient_norm, r.rho, r.rejections, r.backend_iterations,
                r.max_defect, r.linearize_ms, r.assemble_ms, r.backend_ms);
            std::fflush(stdout);
        });
        const SolveReport& rep = sol.report;
        std::printf("status=%s its=%d t_f=%.4f d merit=%.6e total=%.0f ms\n",
                    rep.status.c_str(), rep.iterations, rep.final_time_days,
                    rep.merit_final, rep.total_ms);
        for (size_t i = 0; i < rep.impulse_cms.size(); ++i)
            std::printf("  impulse %zu: %.4f cm/s\n", i + 1, rep.impulse_cms[i]);
        std::printf("dense: keep-out hits=%d keep-in depth=%.6f km radius=[%.3f, %.3f] km\n",
                    sol.violations.keep_out_hits, sol.violations.keep_in_depth_km,
                    sol.violations.min_radius_km, sol.violations.max_radius_km);
        for (Eigen::Index i = 0; i < sol.arc_budget_quadrature.size(); ++i)
            std::printf("  arc %ld quadrature budget: %.3e\n",
                        static_cast<long>(i + 1), sol.arc_budget_quadrature[i]);
    } catch (const Error& e) {
        std::printf("error: %s\n", e.what());
        return 1;
    }
    return 0;
}
