// report.cpp: artifact serialization. CSV numbers are printed with %.17g so
// they reload bit-for-bit; table/JSON numbers share one shortest-round-trip
// formatter so both artifacts carry character-identical values.

#include "loiter/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "loiter/errors.hpp"

namespace loiter {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shortest decimal that round-trips; the one formatter shared by the text
/// table and the JSON document.
std::string num(double v) { return json(v).dump(); }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    return in;
}

json vec_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

double field_num(const json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end() || !it->is_number())
        throw ConfigError(std::string("solution file: bad field '") + key + "'");
    return it->get<double>();
}

}  // namespace

const char* const kTrajectoryCsvHeader =
    "t_days,t_norm,rx_km,ry_km,rz_km,vx_mps,vy_mps,vz_mps,radius_km,arc,y_acc";

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& samples) {
    std::ofstream out = open_out(path);
    out << kTrajectoryCsvHeader << "\n";
    for (const TrajectorySample& s : samples) {
        out << g17(s.t_days) << ',' << g17(s.t_norm) << ',' << g17(s.r_km[0])
            << ',' << g17(s.r_km[1]) << ',' << g17(s.r_km[2]) << ','
            << g17(s.v_mps[0]) << ',' << g17(s.v_mps[1]) << ','
            << g17(s.v_mps[2]) << ',' << g17(s.radius_km) << ',' << s.arc
            << ',' << g17(s.y_acc) << "\n";
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::vector<TrajectorySample> read_trajectory_csv(const std::string& path) {
    std::ifstream in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line != kTrajectoryCsvHeader)
        throw ConfigError("'" + path + "' is not a trajectory CSV (header)");
    std::vector<TrajectorySample> samples;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        double f[11];
        const char* p = line.c_str();
        for (int i = 0; i < 11; ++i) {
            char* end = nullptr;
            f[i] = std::strtod(p, &end);
            const bool last = i == 10;
            if (end == p || (!last && *end != ',') || (last && *end != '\0'))
                throw ConfigError("'" + path + "' line " +
                                  std::to_string(lineno) + ": malformed row");
            p = last ? end : end + 1;
        }
        TrajectorySample s;
        s.t_days = f[0];
        s.t_norm = f[1];
        s.r_km = Vec3(f[2], f[3], f[4]);
        s.v_mps = Vec3(f[5], f[6], f[7]);
        s.radius_km = f[8];
        s.arc = static_cast<int>(f[9]);
        s.y_acc = f[10];
        samples.push_back(s);
    }
    return samples;
}

void write_iterates_csv(const std::string& path,
                        const std::vector<IterateRecord>& iterates) {
    std::ofstream out = open_out(path);
    out << "iteration,merit,model_objective,step_norm,prox_gradient_norm,rho,"
           "rejections,backend_iterations,max_defect,max_impulse_violation,"
           "linearize_ms,assemble_ms,backend_ms\n";
    for (const IterateRecord& r : iterates) {
        out << r.iteration << ',' << g17(r.merit) << ','
            << g17(r.model_objective) << ',' << g17(r.step_norm) << ','
            << g17(r.prox_gradient_norm) << ',' << g17(r.rho) << ','
            << r.rejections << ',' << r.backend_iterations << ','
            << g17(r.max_defect) << ',' << g17(r.max_impulse_violation) << ','
            << g17(r.linearize_ms) << ',' << g17(r.assemble_ms) << ','
            << g17(r.backend_ms) << "\n";
    }
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

namespace {

ordered_json report_json(const SolveReport& r) {
    ordered_json j;
    j["scenario"] = r.scenario;
    j["mode"] = r.mode;
    j["backend"] = r.backend;
    j["converged"] = r.converged;
    j["status"] = r.status;
    j["iterations"] = r.iterations;
    j["merit_final"] = r.merit_final;
    j["final_time_norm"] = r.final_time_norm;
    j["final_time_days"] = r.final_time_days;
    json imp = json::array();
    for (const Vec3& dv : r.impulses)
        imp.push_back(json::array({dv[0], dv[1], dv[2]}));
    j["impulses"] = imp;
    j["impulse_cms"] = r.impulse_cms;
    j["median_linearize_ms"] = r.median_linearize_ms;
    j["median_assemble_ms"] = r.median_assemble_ms;
    j["median_backend_ms"] = r.median_backend_ms;
    j["median_iter_ms"] = r.median_iter_ms;
    j["total_ms"] = r.total_ms;
    return j;
}

}  // namespace

void write_solution_json(const std::string& path, const ScenarioSolution& sol) {
    ordered_json j;
    j["config"] = sol.config.to_json();
    j["layout"] = {{"n_arcs", sol.layout.n_arcs},
                   {"subarcs", sol.layout.subarcs},
                   {"with_y", sol.layout.with_y}};
    j["z"] = vec_json(sol.z);
    j["report"] = report_json(sol.report);
    j["violations"] = {{"keep_out_hits", sol.violations.keep_out_hits},
                       {"keep_in_depth_km", sol.violations.keep_in_depth_km},
                       {"keep_in_span", sol.violations.keep_in_span},
                       {"min_radius_km", sol.violations.min_radius_km},
                       {"max_radius_km", sol.violations.max_radius_km}};
    j["arc_budget_quadrature"] = vec_json(sol.arc_budget_quadrature);
    std::ofstream out = open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw ConfigError("failed writing '" + path + "'");
}

LoadedSolution read_solution_json(const std::string& path) {
    std::ifstream in = open_in(path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
    }
    if (!j.is_object() || !j.contains("config") || !j.contains("layout") ||
        !j.contains("z"))
        throw ConfigError("'" + path + "' is not a solution file");
    LoadedSolution out;
    out.config = ScenarioConfig::from_json(j["config"]);
    const json& l = j["layout"];
    out.layout.n_arcs = static_cast<int>(field_num(l, "n_arcs"));
    out.layout.subarcs = static_cast<int>(field_num(l, "subarcs"));
    if (!l.contains("with_y") || !l["with_y"].is_boolean())
        throw ConfigError("solution file: bad field 'with_y'");
    out.layout.with_y = l["with_y"].get<bool>();
    out.layout.validate();
    const json& z = j["z"];
    if (!z.is_array() ||
        static_cast<int>(z.size()) != out.layout.dim())
        throw ConfigError("solution file: decision vector length mismatch");
    out.z.resize(z.size());
    for (size_t i = 0; i < z.size(); ++i) {
        if (!z[i].is_number())
            throw ConfigError("solution file: decision vector entries");
        out.z[static_cast<Eigen::Index>(i)] = z[i].get<double>();
    }
    return out;
}

SummaryRow summary_row(const ScenarioSolution& sol, double depth_tol_km) {
    SummaryRow row;
    row.scenario = sol.report.scenario;
    row.mode = sol.report.mode;
    row.t_final_days = sol.report.final_time_days;
    row.impulse_cms = sol.report.impulse_cms;
    row.iterations = sol.report.iterations;
    row.median_iter_ms = sol.report.median_iter_ms;
    row.total_ms = sol.report.total_ms;
    const bool pass = sol.violations.keep_out_hits == 0 &&
                      sol.violations.keep_in_depth_km <= depth_tol_km;
    row.dense_verdict = pass ? "pass" : "fail";
    return row;
}

std::string summary_text(const std::vector<SummaryRow>& rows) {
    if (rows.empty()) throw ConfigError("summary needs at least one row");
    const std::vector<std::string> header = {
        "scenario", "mode",    "t_final_d", "dv_cms",
        "its",      "iter_ms", "total_ms",  "dense"};
    std::vector<std::vector<std::string>> cells;
    for (const SummaryRow& r : rows) {
        std::string dv;
        for (size_t i = 0; i < r.impulse_cms.size(); ++i) {
            if (i) dv += "/";
            dv += num(r.impulse_cms[i]);
        }
        cells.push_back({r.scenario, r.mode, num(r.t_final_days), dv,
                         std::to_string(r.iterations), num(r.median_iter_ms),
                         num(r.total_ms), r.dense_verdict});
    }
    std::vector<size_t> width(header.size());
    for (size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream out;
    const auto emit = [&](const std::vector<std::string>& row) {
        for (size_t c = 0; c < row.size(); ++c) {
            out << row[c];
            if (c + 1 < row.size())
                out << std::string(width[c] - row[c].size() + 2, ' ');
        }
        out << "\n";
    };
    emit(header);
    for (const auto& row : cells) emit(row);
    return out.str();
}

ordered_json summary_json(const std::vector<SummaryRow>& rows) {
    if (rows.empty()) throw ConfigError("summary needs at least one row");
    ordered_json doc;
    doc["rows"] = json::array();
    for (const SummaryRow& r : rows) {
        ordered_json row;
        row["scenario"] = r.scenario;
        row["mode"] = r.mode;
        row["t_final_days"] = r.t_final_days;
        row["impulse_cms"] = r.impulse_cms;
        row["iterations"] = r.iterations;
        row["median_iter_ms"] = r.median_iter_ms;
        row["total_ms"] = r.total_ms;
        row["dense_verdict"] = r.dense_verdict;
        doc["rows"].push_back(row);
    }
    return doc;
}

ordered_json comparison_json(const ComparisonReport& rep) {
    ordered_json j;
    j["scenario"] = rep.scenario;
    j["isoperimetric"] = report_json(rep.iso);
    j["isoperimetric"]["dense_pass"] = rep.iso_dense_pass;
    j["isoperimetric"]["free_node_states"] = rep.iso_free_node_states;
    j["isoperimetric"]["keep_in_depth_km"] = rep.iso_keep_in_depth_km;
    j["isoperimetric"]["keep_out_hits"] = rep.iso_keep_out_hits;
    j["levels"] = json::array();
    for (const RefinementLevel& lvl : rep.levels) {
        ordered_json l;
        l["nodes_per_arc"] = lvl.nodes_per_arc;
        l["free_node_states"] = lvl.free_node_states;
        l["iterations"] = lvl.report.iterations;
        l["status"] = lvl.report.status;
        l["final_time_days"] = lvl.report.final_time_days;
        l["median_iter_ms"] = lvl.report.median_iter_ms;
        l["total_ms"] = lvl.report.total_ms;
        l["dense_pass"] = lvl.dense_pass;
        l["keep_out_hits"] = lvl.keep_out_hits;
        l["keep_in_depth_km"] = lvl.keep_in_depth_km;
        l["node_violation_max"] = lvl.node_violation_max;
        j["levels"].push_back(l);
    }
    j["cap_reached"] = rep.cap_reached;
    j["accepted_nodes_per_arc"] = rep.accepted_nodes_per_arc;
    j["speedup"] = rep.speedup;
    j["state_ratio"] = rep.state_ratio;
    j["iso_final_time_days"] = rep.iso_final_time_days;
    j["node_final_time_days"] = rep.node_final_time_days;
    return j;
}

std::string comparison_text(const ComparisonReport& rep) {
    std::ostringstream out;
    out << "scenario: " << rep.scenario << "\n";
    out << "isoperimetric: t_final_d=" << num(rep.iso_final_time_days)
        << "  its=" << rep.iso.iterations
        << "  iter_ms=" << num(rep.iso.median_iter_ms)
        << "  dense=" << (rep.iso_dense_pass ? "pass" : "fail")
        << "  free_node_states=" << rep.iso_free_node_states << "\n";
    out << "node-only ladder:\n";
    for (const RefinementLevel& lvl : rep.levels) {
        out << "  nodes/arc=" << lvl.nodes_per_arc
            << "  its=" << lvl.report.iterations
            << "  t_final_d=" << num(lvl.report.final_time_days)
            << "  iter_ms=" << num(lvl.report.median_iter_ms)
            << "  depth_km=" << num(lvl.keep_in_depth_km)
            << "  dense=" << (lvl.dense_pass ? "pass" : "fail") << "\n";
    }
    if (rep.cap_reached)
        out << "ladder exhausted without a dense pass\n";
    else
        out << "accepted at " << rep.accepted_nodes_per_arc << " nodes/arc\n";
    out << "per-iteration time ratio (node-only / isoperimetric): "
        << num(rep.speedup) << "\n";
    out << "free node-state ratio: " << num(rep.state_ratio) << "\n";
    return out.str();
}

std::string write_solution_artifacts(const ScenarioSolution& sol,
                                     const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + dir + "': " +
                          ec.message());
    write_trajectory_csv(dir + "/trajectory.csv", sol.samples);
    write_iterates_csv(dir + "/iterates.csv", sol.report.iterates);
    const std::string solution_path = dir + "/solution.json";
    write_solution_json(solution_path, sol);
    return solution_path;
}

}  // namespace loiter
