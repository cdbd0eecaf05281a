// config.hpp - run configuration: one JSON document with nested sections,
// every key optional with a default, unknown keys rejected
#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safenav/attack.hpp"
#include "safenav/brain.hpp"
#include "safenav/metrics.hpp"
#include "safenav/prompting.hpp"
#include "safenav/validation.hpp"
#include "safenav/world.hpp"

namespace safenav {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Everything a single trial needs; embedded in every trial log.
struct TrialSettings {
    WorldConfig world;
    SafetyParams safety;
    TaskConfig task;
    AttackConfig attack;
    double approach_margin_mm = 100.0;
    int step_budget = 20;

    /// Centre distance at which the robot counts as having reached the target.
    double completion_distance() const { return world.robot_radius_mm + world.target_radius_mm + approach_margin_mm; }
    friend bool operator==(const TrialSettings&, const TrialSettings&) = default;
};

struct BrainSettings {
    BrainKind kind = BrainKind::scripted_secured;
    double step_cap_mm = 600.0;
    double sweep_deg = 50.0;
    double detour_deg = 45.0;
    std::string endpoint;  // http://host:port/path, remote only
    std::string model;
    std::string api_key_env = "SAFENAV_API_KEY";
    double timeout_s = 60.0;
};

struct SuiteConfig {
    std::vector<ScenarioKind> scenarios{std::begin(kAllScenarios), std::end(kAllScenarios)};
    std::vector<bool> secured{false, true};
    std::vector<bool> attacked{false, true};
    int trials_per_cell = 10;
    std::uint64_t base_seed = 1;
};

struct OutputConfig {
    std::string directory = "safenav-out";
    int jobs = 1;
};

struct RunConfig {
    TrialSettings trial;
    MetricsConfig metrics;
    BrainSettings brain;
    SuiteConfig suite;
    OutputConfig output;
};

namespace detail {

class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + " must be an object");
    }

    template <class T>
    void get(const char* key, T& out) {
        known_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(path_ + "." + key + " has the wrong type");
        }
    }

    template <class F>
    void section(const char* key, F&& f) {
        known_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end()) return;
        Section s(*it, path_ + "." + key);
        f(s);
        s.done();
    }

    void done() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!known_.count(it.key())) throw ConfigError("unknown key " + path_ + "." + it.key());
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

}  // namespace detail

inline json to_json(const WorldConfig& c) {
    return {{"arena_width_mm", c.arena_width_mm},
            {"arena_height_mm", c.arena_height_mm},
            {"robot_radius_mm", c.robot_radius_mm},
            {"target_radius_mm", c.target_radius_mm},
            {"lidar_beams", c.lidar_beams},
            {"lidar_max_range_mm", c.lidar_max_range_mm},
            {"camera_fov_half_deg", c.camera_fov_half_deg},
            {"static_obstacles", c.static_obstacles},
            {"dynamic_obstacles", c.dynamic_obstacles},
            {"static_radius_min_mm", c.static_radius_min_mm},
            {"static_radius_max_mm", c.static_radius_max_mm},
            {"dynamic_radius_mm", c.dynamic_radius_mm},
            {"dynamic_speed_mm", c.dynamic_speed_mm},
            {"spawn_gap_mm", c.spawn_gap_mm},
            {"robot_clearance_mm", c.robot_clearance_mm},
            {"min_target_distance_mm", c.min_target_distance_mm},
            {"max_spawn_attempts", c.max_spawn_attempts}};
}

inline void read(detail::Section& s, WorldConfig& c) {
    s.get("arena_width_mm", c.arena_width_mm);
    s.get("arena_height_mm", c.arena_height_mm);
    s.get("robot_radius_mm", c.robot_radius_mm);
    s.get("target_radius_mm", c.target_radius_mm);
    s.get("lidar_beams", c.lidar_beams);
    s.get("lidar_max_range_mm", c.lidar_max_range_mm);
    s.get("camera_fov_half_deg", c.camera_fov_half_deg);
    s.get("static_obstacles", c.static_obstacles);
    s.get("dynamic_obstacles", c.dynamic_obstacles);
    s.get("static_radius_min_mm", c.static_radius_min_mm);
    s.get("static_radius_max_mm", c.static_radius_max_mm);
    s.get("dynamic_radius_mm", c.dynamic_radius_mm);
    s.get("dynamic_speed_mm", c.dynamic_speed_mm);
    s.get("spawn_gap_mm", c.spawn_gap_mm);
    s.get("robot_clearance_mm", c.robot_clearance_mm);
    s.get("min_target_distance_mm", c.min_target_distance_mm);
    s.get("max_spawn_attempts", c.max_spawn_attempts);
}

inline json to_json(const SafetyParams& p) {
    return {{"angular_spread_deg", p.angular_spread_deg},
            {"safety_distance_mm", p.safety_distance_mm},
            {"failure_threshold", p.failure_threshold}};
}

inline void read(detail::Section& s, SafetyParams& p) {
    s.get("angular_spread_deg", p.angular_spread_deg);
    s.get("safety_distance_mm", p.safety_distance_mm);
    s.get("failure_threshold", p.failure_threshold);
}

inline json to_json(const AttackConfig& a) {
    return {{"rate", a.rate}, {"templates", a.templates}, {"seed", a.seed}};
}

inline void read(detail::Section& s, AttackConfig& a) {
    s.get("rate", a.rate);
    s.get("templates", a.templates);
    s.get("seed", a.seed);
}

/// The subset of settings a trial log carries.
inline json to_json(const TrialSettings& t) {
    return {{"world", to_json(t.world)},
            {"safety", to_json(t.safety)},
            {"task", {{"role", t.task.role}, {"task", t.task.task}, {"approach_margin_mm", t.approach_margin_mm}}},
            {"attack", to_json(t.attack)},
            {"step_budget", t.step_budget}};
}

inline void check(const TrialSettings& t) {
    detail::check_config(t.world);
    t.safety.check();
    t.attack.check();
    if (t.attack.templates.empty()) throw ConfigError("attack.templates must not be empty");
    if (t.task.task.empty()) throw ConfigError("task.task must not be empty");
    if (!(t.approach_margin_mm >= 0)) throw ConfigError("task.approach_margin_mm must be non-negative");
    if (t.step_budget < 1) throw ConfigError("step_budget must be positive");
}

inline TrialSettings trial_settings_from_json(const json& j) {
    TrialSettings t;
    detail::Section root(j, "settings");
    root.section("world", [&](auto& s) { read(s, t.world); });
    root.section("safety", [&](auto& s) { read(s, t.safety); });
    root.section("task", [&](auto& s) {
        s.get("role", t.task.role);
        s.get("task", t.task.task);
        s.get("approach_margin_mm", t.approach_margin_mm);
    });
    root.section("attack", [&](auto& s) { read(s, t.attack); });
    root.get("step_budget", t.step_budget);
    root.done();
    try {
        check(t);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return t;
}

inline json to_json(const RunConfig& c) {
    json settings = to_json(c.trial);
    json metrics = {{"alpha", c.metrics.alpha},
                    {"beta", c.metrics.beta},
                    {"step_budget", c.metrics.step_budget},
                    {"s_max_mode", c.metrics.s_max_mode == SMaxMode::empirical ? "empirical" : "fixed"},
                    {"s_max_fixed", c.metrics.s_max_fixed ? json(*c.metrics.s_max_fixed) : json(nullptr)}};
    json scenarios = json::array();
    for (auto k : c.suite.scenarios) scenarios.push_back(std::string(to_string(k)));
    return {{"world", settings["world"]},
            {"safety", settings["safety"]},
            {"task", settings["task"]},
            {"attack", settings["attack"]},
            {"metrics", metrics},
            {"brain", {{"kind", to_string(c.brain.kind)},
                       {"step_cap_mm", c.brain.step_cap_mm},
                       {"sweep_deg", c.brain.sweep_deg},
                       {"detour_deg", c.brain.detour_deg},
                       {"endpoint", c.brain.endpoint},
                       {"model", c.brain.model},
                       {"api_key_env", c.brain.api_key_env},
                       {"timeout_s", c.brain.timeout_s}}},
            {"suite", {{"scenarios", scenarios},
                       {"secured", c.suite.secured},
                       {"attacked", c.suite.attacked},
                       {"trials_per_cell", c.suite.trials_per_cell},
                       {"base_seed", c.suite.base_seed}}},
            {"output", {{"directory", c.output.directory}, {"jobs", c.output.jobs}}}};
}

/// Cross-field checks and defaults that depend on other fields.
inline void resolve(RunConfig& c) {
    c.trial.step_budget = c.metrics.step_budget;
    if (!c.metrics.s_max_fixed) c.metrics.s_max_fixed = c.metrics.step_budget;
    try {
        check(c.trial);
        c.metrics.check();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.suite.trials_per_cell < 1) throw ConfigError("suite.trials_per_cell must be >= 1");
    if (c.suite.scenarios.empty() || c.suite.secured.empty() || c.suite.attacked.empty())
        throw ConfigError("suite matrix dimensions must not be empty");
    if (c.output.jobs < 1) throw ConfigError("output.jobs must be >= 1");
    if (!(c.brain.step_cap_mm > 0) || !(c.brain.sweep_deg > 0 && c.brain.sweep_deg < 360) ||
        !(c.brain.detour_deg > 0 && c.brain.detour_deg < 360))
        throw ConfigError("brain step_cap_mm, sweep_deg and detour_deg must be positive (angles below 360)");
    if (!(c.brain.timeout_s > 0)) throw ConfigError("brain.timeout_s must be positive");
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig c;
    detail::Section root(j, "config");
    root.section("world", [&](auto& s) { read(s, c.trial.world); });
    root.section("safety", [&](auto& s) { read(s, c.trial.safety); });
    root.section("task", [&](auto& s) {
        s.get("role", c.trial.task.role);
        s.get("task", c.trial.task.task);
        s.get("approach_margin_mm", c.trial.approach_margin_mm);
    });
    root.section("attack", [&](auto& s) { read(s, c.trial.attack); });
    root.section("metrics", [&](auto& s) {
        s.get("alpha", c.metrics.alpha);
        s.get("beta", c.metrics.beta);
        s.get("step_budget", c.metrics.step_budget);
        std::string mode = "empirical";
        s.get("s_max_mode", mode);
        if (mode == "empirical") c.metrics.s_max_mode = SMaxMode::empirical;
        else if (mode == "fixed") c.metrics.s_max_mode = SMaxMode::fixed;
        else throw ConfigError("metrics.s_max_mode must be 'empirical' or 'fixed'");
        json fixed;
        s.get("s_max_fixed", fixed);
        if (fixed.is_number()) c.metrics.s_max_fixed = fixed.get<double>();
        else if (!fixed.is_null()) throw ConfigError("metrics.s_max_fixed must be a number or null");
    });
    root.section("brain", [&](auto& s) {
        std::string kind = to_string(c.brain.kind);
        s.get("kind", kind);
        try {
            c.brain.kind = parse_brain_kind(kind);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        s.get("step_cap_mm", c.brain.step_cap_mm);
        s.get("sweep_deg", c.brain.sweep_deg);
        s.get("detour_deg", c.brain.detour_deg);
        s.get("endpoint", c.brain.endpoint);
        s.get("model", c.brain.model);
        s.get("api_key_env", c.brain.api_key_env);
        s.get("timeout_s", c.brain.timeout_s);
    });
    root.section("suite", [&](auto& s) {
        std::vector<std::string> names;
        s.get("scenarios", names);
        if (!names.empty()) {
            c.suite.scenarios.clear();
            try {
                for (const auto& n : names) c.suite.scenarios.push_back(parse_scenario(n));
            } catch (const std::invalid_argument& e) {
                throw ConfigError(e.what());
            }
        }
        s.get("secured", c.suite.secured);
        s.get("attacked", c.suite.attacked);
        s.get("trials_per_cell", c.suite.trials_per_cell);
        s.get("base_seed", c.suite.base_seed);
    });
    root.section("output", [&](auto& s) {
        s.get("directory", c.output.directory);
        s.get("jobs", c.output.jobs);
    });
    root.done();
    resolve(c);
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j = json::parse(in, nullptr, false, /*ignore_comments=*/true);
    if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
    return run_config_from_json(j);
}

inline ScriptedPolicy scripted_policy(const RunConfig& c) {
    ScriptedPolicy p;
    p.step_cap_mm = c.brain.step_cap_mm;
    p.sweep_deg = c.brain.sweep_deg;
    p.detour_deg = c.brain.detour_deg;
    p.approach_offset_mm = c.trial.world.robot_radius_mm + c.trial.world.target_radius_mm + c.trial.approach_margin_mm / 2;
    p.detour_clearance_mm = c.trial.world.robot_radius_mm + c.trial.safety.safety_distance_mm;
    return p;
}

}  // namespace safenav
