// node_only.cpp: node-constrained baseline solves and the refinement ladder.

#include "loiter/node_only.hpp"

#include <algorithm>

#include "loiter/errors.hpp"
#include "loiter/ocp.hpp"

namespace loiter {

namespace {

/// Node state vectors the subproblem can actually move: everything except
/// the arc-start nodes and the terminal state, which hard equalities tie to
/// their predecessors.
int free_node_states(const DecisionLayout& l) { return l.n_arcs * l.subarcs; }

/// Max shell violation over all node points of a solved iterate.
double max_node_violation(const ScenarioSolution& sol) {
    const PathConstraintSet path = make_path(sol.config);
    const DecisionVector z{sol.layout, sol.z};
    double worst = -std::numeric_limits<double>::infinity();
    const auto visit = [&](const Eigen::VectorXd& nd) {
        const Eigen::Vector2d g =
            eval_g(RelativeState::unpack(nd.head<6>()), path);
        worst = std::max(worst, g.maxCoeff());
    };
    for (int i = 0; i < sol.layout.n_arcs; ++i)
        for (int k = 0; k <= sol.layout.subarcs; ++k) visit(z.node(i, k));
    visit(z.terminal());
    return worst;
}

bool dense_pass(const ScenarioSolution& sol, double depth_tol_km) {
    return sol.violations.keep_out_hits == 0 &&
           sol.violations.keep_in_depth_km <= depth_tol_km;
}

}  // namespace

void RefinementSchedule::validate() const {
    if (nodes_per_arc.empty())
        throw ConfigError("refinement schedule must list at least one level");
    if (nodes_per_arc.front() < 2)
        throw ConfigError("refinement schedule must start at >= 2 nodes/arc");
    for (size_t i = 1; i < nodes_per_arc.size(); ++i)
        if (nodes_per_arc[i] <= nodes_per_arc[i - 1])
            throw ConfigError("refinement schedule must be strictly ascending");
    if (!(depth_tol_km > 0.0))
        throw ConfigError("refinement depth tolerance must be positive");
    if (grid_points < 3)
        throw ConfigError("refinement dense grid needs at least 3 points");
}

ScenarioSolution solve_node_only_full(const ScenarioConfig& cfg,
                                      int nodes_per_arc,
                                      const PenaltyWeights& w) {
    if (nodes_per_arc < 2)
        throw ConfigError("node-only solve needs at least 2 nodes per arc");
    ScenarioConfig c = cfg;
    c.mode = "node-only";
    c.mesh.subarcs_per_arc = nodes_per_arc - 1;
    c.solver = w;
    return solve_scenario(c);
}

SolveReport solve_node_only(const ScenarioConfig& cfg, int nodes_per_arc,
                            const PenaltyWeights& w) {
    return solve_node_only_full(cfg, nodes_per_arc, w).report;
}

ComparisonReport refine_until_valid(const ScenarioConfig& cfg,
                                    const RefinementSchedule& sched,
                                    const PenaltyWeights& w) {
    sched.validate();
    ComparisonReport out;
    out.scenario = cfg.name;

    // Accumulator pipeline first: it is the reference for every ratio. Both
    // pipelines run the same weights and keep free times so the comparison
    // isolates the constraint-enforcement mechanism alone.
    ScenarioConfig iso_cfg = cfg;
    iso_cfg.mode = "isoperimetric";
    iso_cfg.solver = w;
    iso_cfg.integration.dense_grid_points = sched.grid_points;
    const ScenarioSolution iso = solve_scenario(iso_cfg);
    out.iso = iso.report;
    out.iso_dense_pass = dense_pass(iso, sched.depth_tol_km);
    out.iso_free_node_states = free_node_states(iso.layout);
    out.iso_keep_in_depth_km = iso.violations.keep_in_depth_km;
    out.iso_keep_out_hits = iso.violations.keep_out_hits;
    out.iso_final_time_days = iso.report.final_time_days;

    ScenarioConfig node_cfg = cfg;
    node_cfg.integration.dense_grid_points = sched.grid_points;
    out.cap_reached = true;
    for (int nodes : sched.nodes_per_arc) {
        const ScenarioSolution sol = solve_node_only_full(node_cfg, nodes, w);
        RefinementLevel lvl;
        lvl.nodes_per_arc = nodes;
        lvl.free_node_states = free_node_states(sol.layout);
        lvl.report = sol.report;
        lvl.dense_pass = dense_pass(sol, sched.depth_tol_km);
        lvl.keep_out_hits = sol.violations.keep_out_hits;
        lvl.keep_in_depth_km = sol.violations.keep_in_depth_km;
        lvl.node_violation_max = max_node_violation(sol);
        out.levels.push_back(lvl);
        if (lvl.dense_pass) {
            out.cap_reached = false;
            out.accepted_nodes_per_arc = nodes;
            break;
        }
    }

    // Headline ratios come from the accepted rung, or the densest attempted
    // one when the ladder capped out (conservative: coarser meshes are
    // cheaper, so a capped ladder understates the node-only cost).
    const RefinementLevel& head = out.levels.back();
    out.node_final_time_days = head.report.final_time_days;
    if (out.iso.median_iter_ms > 0.0)
        out.speedup = head.report.median_iter_ms / out.iso.median_iter_ms;
    if (out.iso_free_node_states > 0)
        out.state_ratio = static_cast<double>(head.free_node_states) /
                          out.iso_free_node_states;
    return out;
}

}  // namespace loiter
