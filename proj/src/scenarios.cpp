// scenarios.cpp: config schema (strict parse, canonical emit), the two
// embedded case-study presets, unit conversion into normalized quantities,
// guess construction, and the end-to-end solve wrapper.

#include "loiter/scenarios.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <string>

#include "loiter/errors.hpp"

namespace loiter {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

/// Rejects keys outside the schema so typos fail loudly instead of being
/// silently ignored.
void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> keys) {
    if (!j.is_object()) bad(path.empty() ? "<root>" : path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : keys) known = known || it.key() == k;
        if (!known) bad(join(path, it.key()), "unknown key");
    }
}

const json& need(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) bad(path.empty() ? "<root>" : path, "expected an object");
    const auto it = j.find(key);
    if (it == j.end()) bad(join(path, key), "missing");
    return *it;
}

double need_num(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_number()) bad(join(path, key), "expected a number");
    return v.get<double>();
}

int need_int(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_number_integer()) bad(join(path, key), "expected an integer");
    return v.get<int>();
}

std::string need_str(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_string()) bad(join(path, key), "expected a string");
    return v.get<std::string>();
}

Vec3 need_vec3(const json& j, const std::string& path, const char* key) {
    const json& v = need(j, path, key);
    if (!v.is_array() || v.size() != 3)
        bad(join(path, key), "expected an array of 3 numbers");
    Vec3 out;
    for (int i = 0; i < 3; ++i) {
        if (!v[i].is_number())
            bad(join(path, key), "expected an array of 3 numbers");
        out[i] = v[i].get<double>();
    }
    return out;
}

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

void ScenarioConfig::validate() const {
    if (name.empty()) bad("name", "must be nonempty");
    if (!(gravity.mu > 0.0 && gravity.mu < 0.5))
        bad("gravity.mu", "must be in (0, 0.5)");
    if (!(gravity.length_unit_km > 0.0))
        bad("gravity.length_unit_km", "must be positive");
    if (!(gravity.time_unit_s > 0.0))
        bad("gravity.time_unit_s", "must be positive");
    if (!(r_min_km > 0.0) || !(r_min_km < r_max_km))
        bad("constraints.r_min_km", "needs 0 < r_min_km < r_max_km");
    if (penalty_exponent <= 1)
        bad("constraints.penalty_exponent", "must exceed 1");
    if (!(violation_unit_km > 0.0))
        bad("constraints.violation_unit_km", "must be positive");
    if (!(dv_max_kmps > 0.0)) bad("constraints.dv_max_kmps", "must be positive");
    if (n_arcs < 1) bad("impulses.n_arcs", "must be at least 1");
    if (static_cast<int>(active_mask.size()) != n_arcs + 1)
        bad("impulses.active_mask", "needs n_arcs + 1 entries");
    int active = 0;
    for (int v : active_mask) {
        if (v != 0 && v != 1) bad("impulses.active_mask", "entries must be 0 or 1");
        active += v;
    }
    if (active == 0) bad("impulses.active_mask", "needs at least one free slot");
    if (!initial_deviation_m.allFinite() || initial_deviation_m.norm() == 0.0)
        bad("initial_deviation_m", "must be finite and nonzero");
    if (!(guess_horizon_days > 0.0))
        bad("guess_horizon_days", "must be positive");
    if (mesh.subarcs_per_arc < 1)
        bad("mesh.subarcs_per_arc", "must be at least 1");
    try {
        solver.validate();
    } catch (const ConfigError& e) {
        bad("solver", e.what());
    }
    if (integration.transcription != "adaptive" &&
        integration.transcription != "rk4")
        bad("integration.transcription", "must be \"adaptive\" or \"rk4\"");
    if (!(integration.transcription_rtol > 0.0))
        bad("integration.transcription_rtol", "must be positive");
    if (integration.rk4_steps < 1)
        bad("integration.rk4_steps", "must be at least 1");
    if (!(integration.ephemeris_tol > 0.0))
        bad("integration.ephemeris_tol", "must be positive");
    if (integration.dense_grid_points < 3)
        bad("integration.dense_grid_points", "must be at least 3");
    if (!(dilation.s_min_factor > 0.0))
        bad("dilation.s_min_factor", "must be positive");
    if (!(dilation.s_max_factor >= dilation.s_min_factor))
        bad("dilation.s_max_factor", "must be >= s_min_factor");
    if (mode != "isoperimetric" && mode != "node-only")
        bad("mode", "must be \"isoperimetric\" or \"node-only\"");
    if (backend != "ipm" && backend != "admm")
        bad("backend", "must be \"ipm\" or \"admm\"");
    if (output_dir.empty()) bad("output_dir", "must be nonempty");
}

ordered_json ScenarioConfig::to_json() const {
    ordered_json j;
    j["name"] = name;
    j["gravity"] = {{"mu", gravity.mu},
                    {"length_unit_km", gravity.length_unit_km},
                    {"time_unit_s", gravity.time_unit_s}};
    j["target_initial_state"] = {{"position", vec3_json(target_initial_state.R)},
                                 {"velocity", vec3_json(target_initial_state.V)}};
    j["constraints"] = {{"r_max_km", r_max_km},
                        {"r_min_km", r_min_km},
                        {"penalty_exponent", penalty_exponent},
                        {"violation_unit_km", violation_unit_km},
                        {"dv_max_kmps", dv_max_kmps}};
    j["impulses"] = {{"n_arcs", n_arcs}, {"active_mask", active_mask}};
    j["initial_deviation_m"] = vec3_json(initial_deviation_m);
    j["guess_horizon_days"] = guess_horizon_days;
    j["mesh"] = {{"subarcs_per_arc", mesh.subarcs_per_arc}};
    j["solver"] = {{"gamma", solver.gamma},
                   {"rho", solver.rho0},
                   {"rho_max", solver.rho_max},
                   {"eps_stop", solver.eps_stop},
                   {"eps_relax", solver.eps_relax},
                   {"j_max", solver.max_iterations},
                   {"backtrack_cap", solver.max_rejections},
                   {"retry_cap", solver.max_backend_retries}};
    j["integration"] = {{"transcription", integration.transcription},
                        {"transcription_rtol", integration.transcription_rtol},
                        {"rk4_steps", integration.rk4_steps},
                        {"ephemeris_tol", integration.ephemeris_tol},
                        {"dense_grid_points", integration.dense_grid_points}};
    j["dilation"] = {{"s_min_factor", dilation.s_min_factor},
                     {"s_max_factor", dilation.s_max_factor}};
    j["mode"] = mode;
    j["backend"] = backend;
    j["output_dir"] = output_dir;
    return j;
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
    check_keys(j, "",
               {"name", "gravity", "target_initial_state", "constraints",
                "impulses", "initial_deviation_m", "guess_horizon_days", "mesh",
                "solver", "integration", "dilation", "mode", "backend",
                "output_dir"});
    ScenarioConfig c;
    c.name = need_str(j, "", "name");
    {
        const json& g = need(j, "", "gravity");
        check_keys(g, "gravity", {"mu", "length_unit_km", "time_unit_s"});
        c.gravity.mu = need_num(g, "gravity", "mu");
        c.gravity.length_unit_km = need_num(g, "gravity", "length_unit_km");
        c.gravity.time_unit_s = need_num(g, "gravity", "time_unit_s");
    }
    {
        const json& t = need(j, "", "target_initial_state");
        check_keys(t, "target_initial_state", {"position", "velocity"});
        c.target_initial_state.R = need_vec3(t, "target_initial_state", "position");
        c.target_initial_state.V = need_vec3(t, "target_initial_state", "velocity");
    }
    {
        const json& k = need(j, "", "constraints");
        check_keys(k, "constraints",
                   {"r_max_km", "r_min_km", "penalty_exponent",
                    "violation_unit_km", "dv_max_kmps"});
        c.r_max_km = need_num(k, "constraints", "r_max_km");
        c.r_min_km = need_num(k, "constraints", "r_min_km");
        c.penalty_exponent = need_int(k, "constraints", "penalty_exponent");
        c.violation_unit_km = need_num(k, "constraints", "violation_unit_km");
        c.dv_max_kmps = need_num(k, "constraints", "dv_max_kmps");
    }
    {
        const json& im = need(j, "", "impulses");
        check_keys(im, "impulses", {"n_arcs", "active_mask"});
        c.n_arcs = need_int(im, "impulses", "n_arcs");
        const json& mask = need(im, "impulses", "active_mask");
        if (!mask.is_array()) bad("impulses.active_mask", "expected an array");
        c.active_mask.clear();
        for (const json& v : mask) {
            if (!v.is_number_integer())
                bad("impulses.active_mask", "entries must be integers");
            c.active_mask.push_back(v.get<int>());
        }
    }
    c.initial_deviation_m = need_vec3(j, "", "initial_deviation_m");
    c.guess_horizon_days = need_num(j, "", "guess_horizon_days");
    {
        const json& m = need(j, "", "mesh");
        check_keys(m, "mesh", {"subarcs_per_arc"});
        c.mesh.subarcs_per_arc = need_int(m, "mesh", "subarcs_per_arc");
    }
    {
        const json& s = need(j, "", "solver");
        check_keys(s, "solver",
                   {"gamma", "rho", "rho_max", "eps_stop", "eps_relax", "j_max",
                    "backtrack_cap", "retry_cap"});
        c.solver.gamma = need_num(s, "solver", "gamma");
        c.solver.rho0 = need_num(s, "solver", "rho");
        c.solver.rho_max = need_num(s, "solver", "rho_max");
        c.solver.eps_stop = need_num(s, "solver", "eps_stop");
        c.solver.eps_relax = need_num(s, "solver", "eps_relax");
        c.solver.max_iterations = need_int(s, "solver", "j_max");
        c.solver.max_rejections = need_int(s, "solver", "backtrack_cap");
        c.solver.max_backend_retries = need_int(s, "solver", "retry_cap");
    }
    {
        const json& in = need(j, "", "integration");
        check_keys(in, "integration",
                   {"transcription", "transcription_rtol", "rk4_steps",
                    "ephemeris_tol", "dense_grid_points"});
        c.integration.transcription = need_str(in, "integration", "transcription");
        c.integration.transcription_rtol =
            need_num(in, "integration", "transcription_rtol");
        c.integration.rk4_steps = need_int(in, "integration", "rk4_steps");
        c.integration.ephemeris_tol = need_num(in, "integration", "ephemeris_tol");
        c.integration.dense_grid_points =
            need_int(in, "integration", "dense_grid_points");
    }
    {
        const json& d = need(j, "", "dilation");
        check_keys(d, "dilation", {"s_min_factor", "s_max_factor"});
        c.dilation.s_min_factor = need_num(d, "dilation", "s_min_factor");
        c.dilation.s_max_factor = need_num(d, "dilation", "s_max_factor");
    }
    c.mode = need_str(j, "", "mode");
    c.backend = need_str(j, "", "backend");
    c.output_dir = need_str(j, "", "output_dir");
    c.validate();
    return c;
}

ScenarioConfig ScenarioConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " +
                          e.what());
    }
    return from_json(j);
}

void ScenarioConfig::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file '" + path + "'");
    out << to_json().dump(2) << "\n";
    if (!out) throw ConfigError("failed writing config file '" + path + "'");
}

ScenarioConfig preset_scenario(const std::string& name) {
    ScenarioConfig c;
    c.gravity = GravParams::earth_moon();
    // Target: perilune of the 9:2 resonant southern L2 halo, synodic frame.
    c.target_initial_state.R = Vec3(0.987360158, 0.0, 0.008773055);
    c.target_initial_state.V = Vec3(0.0, 1.634461555, 0.0);
    c.r_max_km = 15.0;
    c.r_min_km = 0.3;
    c.penalty_exponent = 2;
    c.violation_unit_km = 15.0;  // accumulator counts (violation / r_max)^n
    c.dv_max_kmps = 2.5e-4;
    c.n_arcs = 3;
    if (name == "three-impulse") {
        c.name = name;
        c.active_mask = {1, 1, 1, 0};
        c.initial_deviation_m = Vec3(400.0, 0.0, 0.0);
        c.guess_horizon_days = 24.0;
    } else if (name == "two-impulse-coast") {
        c.name = name;
        c.active_mask = {0, 1, 1, 0};
        c.initial_deviation_m = Vec3(0.0, 400.0, 0.0);
        c.guess_horizon_days = 21.0;
    } else {
        throw ConfigError("unknown preset '" + name +
                          "' (try three-impulse or two-impulse-coast)");
    }
    c.validate();
    return c;
}

std::vector<std::string> preset_names() {
    return {"three-impulse", "two-impulse-coast"};
}

PathConstraintSet make_path(const ScenarioConfig& cfg) {
    PathConstraintSet p;
    p.r_max = cfg.gravity.km_to_norm(cfg.r_max_km);
    p.r_min = cfg.gravity.km_to_norm(cfg.r_min_km);
    p.penalty_exponent = cfg.penalty_exponent;
    p.violation_unit = cfg.gravity.km_to_norm(cfg.violation_unit_km);
    p.validate();
    return p;
}

DiscreteConstraintSet make_discrete(const ScenarioConfig& cfg) {
    DiscreteConstraintSet d;
    d.dv_max = cfg.gravity.kmps_to_norm(cfg.dv_max_kmps);
    d.active_mask = cfg.active_mask;
    d.validate();
    return d;
}

double guess_arc_duration(const ScenarioConfig& cfg) {
    return cfg.gravity.days_to_norm(cfg.guess_horizon_days) / cfg.n_arcs;
}

DilationParam make_dilation(const ScenarioConfig& cfg) {
    const double s_nom = guess_arc_duration(cfg);
    DilationParam d;
    d.s_min = cfg.dilation.s_min_factor * s_nom;
    d.s_max = cfg.dilation.s_max_factor * s_nom;
    d.validate();
    return d;
}

IntegratorOptions make_integrator(const ScenarioConfig& cfg) {
    IntegratorOptions o;
    o.mode = cfg.integration.transcription == "rk4"
                 ? IntegratorOptions::Mode::rk4_fixed
                 : IntegratorOptions::Mode::adaptive;
    o.rtol = cfg.integration.transcription_rtol;
    o.atol = 1e-2 * o.rtol;
    o.rk4_steps = cfg.integration.rk4_steps;
    return o;
}

Vec6 initial_relative_state(const ScenarioConfig& cfg) {
    Vec6 x = Vec6::Zero();
    x.head<3>() =
        cfg.initial_deviation_m / (1000.0 * cfg.gravity.length_unit_km);
    return x;
}

DecisionVector build_initial_guess(const ScenarioConfig& cfg,
                                   const TargetEphemeris& eph,
                                   const DecisionLayout& layout) {
    layout.validate();
    if (layout.n_arcs != cfg.n_arcs)
        throw ConfigError("guess layout does not match the scenario arc count");
    const PathConstraintSet path = make_path(cfg);
    const Cr3bpArcSystem sys(eph, cfg.gravity, path, layout.with_y);
    const IntegratorOptions integ = make_integrator(cfg);
    const int K = layout.subarcs;
    const double dur = guess_arc_duration(cfg);
    const Eigen::Vector2d S(dur, dur);

    DecisionVector z = DecisionVector::zeros(layout);
    Eigen::VectorXd cur = Eigen::VectorXd::Zero(layout.state_dim());
    cur.head<6>() = initial_relative_state(cfg);
    for (int i = 0; i < layout.n_arcs; ++i) {
        z.dilation(i) = S;
        if (layout.with_y) cur[6] = 0.0;  // per-arc accumulator reset
        z.node(i, 0) = cur;
        for (int k = 0; k < K; ++k) {
            // Propagate from the stored node so the x/t defect rows vanish
            // bit-for-bit; the accumulator row is re-zeroed at every node and
            // its defect carries the (penalized) violation integral instead.
            cur = integrate_subarc_state(sys, z.node(i, k), S, k, K, integ);
            if (layout.with_y) cur[6] = 0.0;
            z.node(i, k + 1) = cur;
        }
    }
    z.terminal() = z.node(layout.n_arcs - 1, K);
    return z;  // impulses stay zero
}

ScenarioProblem make_problem(const ScenarioConfig& cfg, bool with_y,
                             int subarcs_per_arc, double horizon_norm) {
    cfg.validate();
    if (subarcs_per_arc < 1)
        throw ConfigError("subarcs_per_arc must be at least 1");
    ScenarioProblem p;
    p.config = cfg;
    p.grav = std::make_unique<GravParams>(cfg.gravity);
    p.path = std::make_unique<PathConstraintSet>(make_path(cfg));
    const double guess_T = cfg.gravity.days_to_norm(cfg.guess_horizon_days);
    const double horizon = horizon_norm > 0.0 ? horizon_norm : 1.5 * guess_T;
    p.eph = std::make_unique<TargetEphemeris>(
        build_target_ephemeris(cfg.target_initial_state, 0.0, horizon, *p.grav,
                               cfg.integration.ephemeris_tol));
    p.sys = std::make_unique<Cr3bpArcSystem>(*p.eph, *p.grav, *p.path, with_y);

    DecisionLayout layout;
    layout.n_arcs = cfg.n_arcs;
    layout.subarcs = subarcs_per_arc;
    layout.with_y = with_y;
    layout.validate();

    p.setup.sys = p.sys.get();
    p.setup.layout = layout;
    p.setup.integ = make_integrator(cfg);
    p.setup.dilation = make_dilation(cfg);
    p.setup.discrete = make_discrete(cfg);
    p.setup.path = *p.path;
    p.setup.cost = CostSpec{};
    p.setup.grav = cfg.gravity;
    p.setup.x_init = initial_relative_state(cfg);
    p.setup.time_horizon = p.eph->t_end();
    p.guess = build_initial_guess(cfg, *p.eph, layout);
    return p;
}

ScenarioProblem make_problem(const ScenarioConfig& cfg) {
    return make_problem(cfg, cfg.mode == "isoperimetric",
                        cfg.mesh.subarcs_per_arc, 0.0);
}

ScenarioSolution solve_scenario(
    const ScenarioConfig& cfg,
    const std::function<void(const IterateRecord&)>& on_iterate) {
    cfg.validate();
    BackendOptions backend;
    backend.name = cfg.backend;
    const bool with_y = cfg.mode == "isoperimetric";

    double horizon = 0.0;  // 0 = the default 1.5x guess horizon
    for (int attempt = 0;; ++attempt) {
        ScenarioProblem p =
            make_problem(cfg, with_y, cfg.mesh.subarcs_per_arc, horizon);
        SolveOutcome outcome{SolveReport{}, p.guess};
        try {
            outcome =
                prox_linear_solve(p.guess, p.setup, cfg.solver, backend,
                                  on_iterate);
        } catch (const HorizonExceeded& e) {
            // An iterate wants more target trajectory than provisioned:
            // regrow the span and restart from the untouched guess.
            if (attempt >= 3) throw;
            horizon = 1.5 * e.needed();
            continue;
        }
        DenseVerification audit = dense_verify(
            outcome.z, *p.sys, *p.grav, cfg.r_min_km, cfg.r_max_km,
            cfg.integration.dense_grid_points, cfg.integration.transcription_rtol);
        ScenarioSolution sol;
        sol.config = cfg;
        sol.report = outcome.report;
        sol.report.scenario = cfg.name;
        sol.layout = outcome.z.layout;
        sol.z = outcome.z.v;
        sol.samples = std::move(audit.samples);
        sol.violations = audit.report;
        sol.arc_budget_quadrature = audit.arc_budget;
        return sol;
    }
}

std::vector<TrajectorySample> drift_study(const ScenarioConfig& cfg,
                                          double horizon_days, int n_samples) {
    cfg.validate();
    if (!(horizon_days > 0.0) || n_samples < 2)
        throw ConfigError("drift study needs a positive horizon and >= 2 samples");
    const double T = cfg.gravity.days_to_norm(horizon_days);
    const TargetEphemeris eph =
        build_target_ephemeris(cfg.target_initial_state, 0.0, 1.02 * T,
                               cfg.gravity, cfg.integration.ephemeris_tol);
    return free_drift_samples(eph, cfg.gravity, initial_relative_state(cfg),
                              0.0, T, n_samples,
                              cfg.integration.transcription_rtol);
}

}  // namespace loiter
