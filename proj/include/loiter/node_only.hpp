// node_only.hpp: baseline pipeline that enforces the shell only at
// discretization nodes (no violation accumulator), refined by adding nodes
// until a dense audit passes, and the side-by-side comparison against the
// accumulator-based pipeline.

#pragma once

#include <string>
#include <vector>

#include "loiter/scenarios.hpp"
#include "loiter/scp.hpp"

namespace loiter {

/// Node ladder for the refinement loop.
struct RefinementSchedule {
    std::vector<int> nodes_per_arc = {5, 10, 20, 40, 60};
    double depth_tol_km = 0.1;  ///< dense keep-in excursion pass bound
    int grid_points = 10000;    ///< dense audit grid size

    void validate() const;  ///< nonempty, first >= 2, strictly ascending
};

/// Outcome of one ladder rung.
struct RefinementLevel {
    int nodes_per_arc = 0;
    int free_node_states = 0;  ///< node state vectors not pinned by jumps
    SolveReport report;
    bool dense_pass = false;
    int keep_out_hits = 0;
    double keep_in_depth_km = 0.0;
    double node_violation_max = 0.0;  ///< max g over nodes, normalized
};

/// Both pipelines on one scenario: the accumulator run, the node ladder, and
/// the headline ratios.
struct ComparisonReport {
    std::string scenario;

    SolveReport iso;
    bool iso_dense_pass = false;
    int iso_free_node_states = 0;
    double iso_keep_in_depth_km = 0.0;
    int iso_keep_out_hits = 0;

    std::vector<RefinementLevel> levels;
    bool cap_reached = false;        ///< ladder exhausted without a pass
    int accepted_nodes_per_arc = -1; ///< first passing rung, -1 when capped

    /// Per-iteration subproblem wall time (median assemble+backend), at the
    /// accepted rung over the accumulator run.
    double speedup = 0.0;
    /// Free node-state vectors, accepted rung over accumulator run.
    double state_ratio = 0.0;
    double iso_final_time_days = 0.0;
    double node_final_time_days = 0.0;
};

/// Node-only solve at a fixed mesh density: K = nodes_per_arc - 1 subarcs
/// per arc, 7-wide states, shell rows at every node.
ScenarioSolution solve_node_only_full(const ScenarioConfig& cfg,
                                      int nodes_per_arc,
                                      const PenaltyWeights& w);
SolveReport solve_node_only(const ScenarioConfig& cfg, int nodes_per_arc,
                            const PenaltyWeights& w);

/// Runs the accumulator pipeline once, then climbs the node ladder until the
/// dense audit passes or the ladder is exhausted (reported, not thrown).
ComparisonReport refine_until_valid(const ScenarioConfig& cfg,
                                    const RefinementSchedule& sched,
                                    const PenaltyWeights& w);

}  // namespace loiter
