// scenarios.hpp: named case-study configurations, the on-disk config schema,
// unit conversion into normalized quantities, initial-guess construction, and
// the end-to-end solve wrapper (ephemeris sizing and rebuild-on-overrun).

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "loiter/ephemeris.hpp"
#include "loiter/ocp.hpp"
#include "loiter/scp.hpp"
#include "loiter/shooting.hpp"

#include "json.hpp"

namespace loiter {

/// Transcription grid density (subarcs per coast arc).
struct MeshSettings {
    int subarcs_per_arc = 1;
};

/// Propagator configuration for the transcription and its audits.
struct IntegrationSettings {
    std::string transcription = "adaptive";  ///< "adaptive" | "rk4"
    double transcription_rtol = 1e-11;
    int rk4_steps = 30;           ///< fixed-mode steps per subarc
    double ephemeris_tol = 1e-12;
    int dense_grid_points = 10000;
};

/// Dilation box as multiples of the guess arc duration.
struct DilationSettings {
    double s_min_factor = 0.05;
    double s_max_factor = 20.0;
};

/// One fully specified case study. Values are stored exactly as written in
/// the config file (km, km/s, days); conversions to normalized units happen
/// in the make_* accessors so that save(load(x)) is byte-faithful.
struct ScenarioConfig {
    std::string name;
    GravParams gravity;
    AbsoluteState target_initial_state;

    double r_max_km = 0.0;
    double r_min_km = 0.0;
    int penalty_exponent = 2;
    double violation_unit_km = 0.0;  ///< reference length of the accumulator
    double dv_max_kmps = 0.0;

    int n_arcs = 0;
    std::vector<int> active_mask;    ///< n_arcs + 1 slots, 1 = free
    Vec3 initial_deviation_m = Vec3::Zero();
    double guess_horizon_days = 0.0;

    MeshSettings mesh;
    PenaltyWeights solver;
    IntegrationSettings integration;
    DilationSettings dilation;
    std::string mode = "isoperimetric";  ///< "isoperimetric" | "node-only"
    std::string backend = "ipm";
    std::string output_dir = "out";

    void validate() const;  ///< throws ConfigError naming the broken field

    nlohmann::ordered_json to_json() const;
    /// Strict parse: unknown keys, missing keys, and wrong types are
    /// ConfigErrors carrying the full field path.
    static ScenarioConfig from_json(const nlohmann::json& j);
    static ScenarioConfig load(const std::string& path);
    void save(const std::string& path) const;  ///< canonical 2-space indent
};

/// Embedded presets: "three-impulse" and "two-impulse-coast".
ScenarioConfig preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

// --- normalized views -------------------------------------------------------

PathConstraintSet make_path(const ScenarioConfig& cfg);
DiscreteConstraintSet make_discrete(const ScenarioConfig& cfg);
DilationParam make_dilation(const ScenarioConfig& cfg);
IntegratorOptions make_integrator(const ScenarioConfig& cfg);

/// Initial relative state: configured position deviation, matched velocity.
Vec6 initial_relative_state(const ScenarioConfig& cfg);

/// Guess arc duration (normalized): guess horizon / n_arcs.
double guess_arc_duration(const ScenarioConfig& cfg);

// --- problem assembly -------------------------------------------------------

/// A runnable instance: owns the target ephemeris and the dynamics object
/// the TranscriptionSetup points into. Movable, not copyable; the dynamics
/// inputs live behind stable pointers so moves cannot dangle them.
struct ScenarioProblem {
    ScenarioConfig config;
    std::unique_ptr<TargetEphemeris> eph;
    std::unique_ptr<GravParams> grav;
    std::unique_ptr<PathConstraintSet> path;
    std::unique_ptr<Cr3bpArcSystem> sys;
    TranscriptionSetup setup;
    DecisionVector guess;
};

/// Builds ephemeris (over `horizon_norm`, or 1.5x the guess horizon when 0),
/// dynamics, transcription setup, and the sequential-propagation guess.
/// `with_y`/`subarcs` select the pipeline; defaults follow the config.
ScenarioProblem make_problem(const ScenarioConfig& cfg, bool with_y,
                             int subarcs_per_arc, double horizon_norm = 0.0);
ScenarioProblem make_problem(const ScenarioConfig& cfg);

/// Free-drift node states with zero impulses and constant dilation equal to
/// the guess arc duration; x/t defects vanish by construction.
DecisionVector build_initial_guess(const ScenarioConfig& cfg,
                                   const TargetEphemeris& eph,
                                   const DecisionLayout& layout);

/// Everything a solve produces, self-contained (no live pointers).
struct ScenarioSolution {
    ScenarioConfig config;
    SolveReport report;
    DecisionLayout layout;
    Eigen::VectorXd z;
    std::vector<TrajectorySample> samples;  ///< dense audit of the solution
    ViolationReport violations;
    Eigen::VectorXd arc_budget_quadrature;  ///< dense per-arc accumulator
};

/// End-to-end run: assemble, solve, dense-verify. When a solve needs more
/// ephemeris than provisioned, the span is regrown (1.5x the overrun) and
/// the solve restarts from the original guess, at most three times.
ScenarioSolution solve_scenario(
    const ScenarioConfig& cfg,
    const std::function<void(const IterateRecord&)>& on_iterate = {});

/// Uncontrolled drift from the configured deviation over `horizon_days`,
/// for the drift study and guess audits.
std::vector<TrajectorySample> drift_study(const ScenarioConfig& cfg,
                                          double horizon_days, int n_samples);

}  // namespace loiter
