// report.hpp: emitted artifacts — trajectory CSV, convergence CSV, solution
// JSON (round-trippable), summary tables (text and JSON carrying identical
// values), and comparison-report serialization.

#pragma once

#include <string>
#include <vector>

#include "loiter/node_only.hpp"
#include "loiter/scenarios.hpp"
#include "loiter/trajectory.hpp"

#include "json.hpp"

namespace loiter {

/// Fixed column set; doubles at full precision so a re-loaded trajectory
/// audits identically.
extern const char* const kTrajectoryCsvHeader;

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& samples);
std::vector<TrajectorySample> read_trajectory_csv(const std::string& path);

void write_iterates_csv(const std::string& path,
                        const std::vector<IterateRecord>& iterates);

/// Solution file: config echo, decision layout, flat decision vector, and
/// the solve report. Enough to re-verify without re-solving.
void write_solution_json(const std::string& path, const ScenarioSolution& sol);

struct LoadedSolution {
    ScenarioConfig config;
    DecisionLayout layout;
    Eigen::VectorXd z;
};
LoadedSolution read_solution_json(const std::string& path);

/// One table line per solve (the shape of the result tables).
struct SummaryRow {
    std::string scenario;
    std::string mode;
    double t_final_days = 0.0;
    std::vector<double> impulse_cms;  ///< per active slot
    int iterations = 0;
    double median_iter_ms = 0.0;
    double total_ms = 0.0;
    std::string dense_verdict;  ///< "pass" or "fail"
};

SummaryRow summary_row(const ScenarioSolution& sol, double depth_tol_km = 0.1);

/// Text table and JSON document; both print numbers via the same
/// shortest-round-trip formatter, so the values are character-identical.
std::string summary_text(const std::vector<SummaryRow>& rows);
nlohmann::ordered_json summary_json(const std::vector<SummaryRow>& rows);

nlohmann::ordered_json comparison_json(const ComparisonReport& rep);
std::string comparison_text(const ComparisonReport& rep);

/// Writes trajectory.csv, iterates.csv, and solution.json under dir
/// (creating it), returning the solution.json path.
std::string write_solution_artifacts(const ScenarioSolution& sol,
                                     const std::string& dir);

}  // namespace loiter
