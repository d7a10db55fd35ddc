// loiter_main.cpp: command-line front end.
//
//   loiter solve   <preset|config.json> [--mode iso|node-only] [--out DIR]
//                  [--nodes N] [--grid N]
//   loiter verify  <solution.json> [--grid N]
//   loiter compare <preset|config.json> [--out DIR] [--grid N]
//   loiter drift   <preset|config.json> [--days D] [--samples N] [--out DIR]
//
// Exit codes: 0 success; 1 verify found violations; 2 configuration error;
// 3 dynamics error; 4 solver error or non-convergence; 5 backend error.
// LOITER_BACKEND overrides the configured cone backend.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"

#include "loiter/errors.hpp"
#include "loiter/node_only.hpp"
#include "loiter/report.hpp"
#include "loiter/scenarios.hpp"
#include "loiter/shooting.hpp"

namespace {

using namespace loiter;

/// A scenario argument is a config path when it names a file, otherwise a
/// preset name.
ScenarioConfig resolve_scenario(const std::string& spec) {
    if (std::filesystem::exists(spec)) return ScenarioConfig::load(spec);
    for (const std::string& p : preset_names())
        if (p == spec) return preset_scenario(spec);
    throw ConfigError("'" + spec +
                      "' is neither a config file nor a preset (presets: "
                      "three-impulse, two-impulse-coast)");
}

void apply_backend_env(ScenarioConfig& cfg) {
    const char* env = std::getenv("LOITER_BACKEND");
    if (env != nullptr && *env != '\0') cfg.backend = env;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
}

int run_solve(const std::string& spec, const std::string& mode,
              const std::string& out_dir, int nodes, int grid) {
    ScenarioConfig cfg = resolve_scenario(spec);
    if (mode == "iso" || mode == "isoperimetric") cfg.mode = "isoperimetric";
    else if (mode == "node-only") cfg.mode = "node-only";
    else if (!mode.empty()) throw ConfigError("--mode must be iso or node-only");
    if (grid > 0) cfg.integration.dense_grid_points = grid;
    if (nodes > 0) {
        if (cfg.mode != "node-only")
            throw ConfigError("--nodes only applies to node-only mode");
        if (nodes < 2) throw ConfigError("--nodes must be at least 2");
        cfg.mesh.subarcs_per_arc = nodes - 1;
    }
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    apply_backend_env(cfg);
    cfg.validate();

    const ScenarioSolution sol = solve_scenario(cfg);
    write_solution_artifacts(sol, cfg.output_dir);
    const std::vector<SummaryRow> rows = {summary_row(sol)};
    const std::string table = summary_text(rows);
    write_text(cfg.output_dir + "/summary.txt", table);
    write_text(cfg.output_dir + "/summary.json",
               summary_json(rows).dump(2) + "\n");
    std::cout << table;
    if (!sol.report.converged) {
        std::cerr << "solver stopped without converging (" << sol.report.status
                  << ")\n";
        return 4;
    }
    return 0;
}

int run_verify(const std::string& path, int grid) {
    const LoadedSolution ls = read_solution_json(path);
    const ScenarioConfig& cfg = ls.config;
    const DecisionVector z{ls.layout, ls.z};

    // Provision the target trajectory over everything the arcs can reach.
    double needed = z.terminal_time();
    for (int i = 0; i < ls.layout.n_arcs; ++i) {
        const Eigen::Vector2d S = z.dilation(i);
        needed = std::max(needed,
                          z.node_time(i, 0) + std::max(S[0], S[1]) + 1e-6);
    }
    const TargetEphemeris eph = build_target_ephemeris(
        cfg.target_initial_state, 0.0, 1.05 * needed, cfg.gravity,
        cfg.integration.ephemeris_tol);
    const PathConstraintSet shell = make_path(cfg);
    const Cr3bpArcSystem sys(eph, cfg.gravity, shell, ls.layout.with_y);
    const int points = grid > 0 ? grid : cfg.integration.dense_grid_points;
    const DenseVerification audit =
        dense_verify(z, sys, cfg.gravity, cfg.r_min_km, cfg.r_max_km, points,
                     cfg.integration.transcription_rtol);

    std::cout << "samples: " << audit.samples.size() << "\n";
    std::cout << "keep-out hits: " << audit.report.keep_out_hits << "\n";
    std::cout << "keep-in excursion depth [km]: "
              << audit.report.keep_in_depth_km << "\n";
    std::cout << "radius range [km]: [" << audit.report.min_radius_km << ", "
              << audit.report.max_radius_km << "]\n";
    bool budgets_ok = true;
    if (ls.layout.with_y) {
        for (Eigen::Index i = 0; i < audit.arc_budget.size(); ++i) {
            const bool ok = audit.arc_budget[i] <= cfg.solver.eps_relax;
            budgets_ok = budgets_ok && ok;
            std::cout << "arc " << (i + 1)
                      << " violation budget: " << audit.arc_budget[i]
                      << (ok ? " (within " : " (EXCEEDS ")
                      << cfg.solver.eps_relax << ")\n";
        }
    }
    const bool pass = audit.report.keep_out_hits == 0 &&
                      audit.report.keep_in_depth_km <= 0.1 && budgets_ok;
    std::cout << (pass ? "PASS" : "FAIL") << "\n";
    return pass ? 0 : 1;
}

int run_compare(const std::string& spec, const std::string& out_dir,
                int grid) {
    ScenarioConfig cfg = resolve_scenario(spec);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    apply_backend_env(cfg);
    cfg.validate();
    RefinementSchedule sched;
    if (grid > 0) sched.grid_points = grid;
    else sched.grid_points = cfg.integration.dense_grid_points;

    const ComparisonReport rep = refine_until_valid(cfg, sched, cfg.solver);
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + cfg.output_dir +
                          "'");
    write_text(cfg.output_dir + "/comparison.json",
               comparison_json(rep).dump(2) + "\n");
    std::cout << comparison_text(rep);
    return 0;
}

int run_drift(const std::string& spec, double days, int samples,
              const std::string& out_dir) {
    ScenarioConfig cfg = resolve_scenario(spec);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    cfg.validate();
    const std::vector<TrajectorySample> traj =
        drift_study(cfg, days, samples);
    double peak = 0.0, peak_day = 0.0;
    for (const TrajectorySample& s : traj)
        if (s.radius_km > peak) {
            peak = s.radius_km;
            peak_day = s.t_days;
        }
    std::error_code ec;
    std::filesystem::create_directories(cfg.output_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + cfg.output_dir +
                          "'");
    write_trajectory_csv(cfg.output_dir + "/drift.csv", traj);
    std::cout << "uncontrolled drift over " << days << " days: peak "
              << peak << " km at day " << peak_day << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"impulsive loiter trajectory optimization (relative CR3BP)"};
    app.require_subcommand(1);

    std::string spec, mode, out_dir, solution_path;
    int nodes = 0, grid = 0, samples = 2000;
    double days = 6.5;

    CLI::App* solve = app.add_subcommand("solve", "optimize a scenario");
    solve->add_option("scenario", spec, "preset name or config path")
        ->required();
    solve->add_option("--mode", mode, "iso or node-only (overrides config)");
    solve->add_option("--out", out_dir, "output directory (overrides config)");
    solve->add_option("--nodes", nodes, "nodes per arc (node-only mode)");
    solve->add_option("--grid", grid, "dense audit grid points");

    CLI::App* verify = app.add_subcommand("verify", "re-audit a solution file");
    verify->add_option("solution", solution_path, "solution.json path")
        ->required();
    verify->add_option("--grid", grid, "dense audit grid points");

    CLI::App* compare =
        app.add_subcommand("compare", "run both pipelines and compare");
    compare->add_option("scenario", spec, "preset name or config path")
        ->required();
    compare->add_option("--out", out_dir, "output directory (overrides config)");
    compare->add_option("--grid", grid, "dense audit grid points");

    CLI::App* drift =
        app.add_subcommand("drift", "uncontrolled deviation propagation");
    drift->add_option("scenario", spec, "preset name or config path")
        ->required();
    drift->add_option("--days", days, "propagation horizon [days]");
    drift->add_option("--samples", samples, "sample count");
    drift->add_option("--out", out_dir, "output directory (overrides config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // bad usage is a configuration error
    }

    try {
        if (solve->parsed()) return run_solve(spec, mode, out_dir, nodes, grid);
        if (verify->parsed()) return run_verify(solution_path, grid);
        if (compare->parsed()) return run_compare(spec, out_dir, grid);
        if (drift->parsed()) return run_drift(spec, days, samples, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DynamicsError& e) {
        std::cerr << "dynamics error: " << e.what() << "\n";
        return 3;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 4;
    } catch (const BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 5;
    }
    return 0;
}
