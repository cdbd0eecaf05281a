// evaluation.hpp - trial loop, ablation suites, and report emission
#pragma once

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "safenav/attack.hpp"
#include "safenav/brain.hpp"
#include "safenav/config.hpp"
#include "safenav/metrics.hpp"
#include "safenav/pipeline.hpp"
#include "safenav/prompting.hpp"
#include "safenav/state.hpp"
#include "safenav/world.hpp"

namespace safenav {

struct TrialResult {
    TrialRecord record;
    TrialLog log;
};

inline bool reached_target(const World& w, const TrialSettings& s) {
    return norm(w.robot.position() - w.target.center) <= s.completion_distance();
}

/// One trial: per step advance obstacles, sense, maybe inject, prompt the
/// brain, validate and execute (secured) or execute directly (baseline),
/// record, and check the termination conditions.
inline TrialResult run_trial(const TrialMeta& meta, const TrialSettings& settings, Brain& brain) {
    check(settings);
    TrialResult out;
    TrialRecord& rec = out.record;
    TrialLog& log = out.log;
    rec.trial_id = meta.trial_id;
    rec.scenario = meta.scenario;
    rec.secured = meta.secured;
    rec.attacked = meta.attacked;
    rec.seed = meta.seed;

    World world = spawn_scenario(meta.scenario, meta.seed, settings.world);
    const SystemPrompt system = build_system_prompt(settings.task, meta.secured);
    AttackConfig attack = settings.attack;
    attack.enabled = meta.attacked;

    log.meta = meta;
    log.system_prompt = system.render();
    log.config = to_json(settings);

    std::optional<Outcome> outcome;
    for (int i = 1; i <= settings.step_budget && !outcome; ++i) {
        auto dyn = step_dynamics(std::move(world));
        world = std::move(dyn.world);
        const CameraObservation cam = camera_observe(world);

        StepRecord r;
        r.step_index = i;
        r.target_visible = cam.target_visible;
        StepFlags flags;
        flags.target_visible = cam.target_visible;

        if (dyn.robot_hit_by) {
            r.dynamic_collision = dyn.robot_hit_by;
            outcome = Outcome::interrupted;
        } else {
            const Scan scan = lidar_scan(world);
            const auto injection = maybe_inject(attack, i, meta.seed, world.target.center);
            if (injection) {
                r.instruction = injection->injected_text;
                r.injected_template = injection->template_id;
                flags.attack_injected = true;
            }
            BrainRequest request{system, build_user_prompt(scan, cam, r.instruction), std::nullopt, {}};
            if (meta.secured)
                if (auto prev = reference_state(log)) request.reference = render_reference(*prev);
            r.user_prompt = request.user.render();
            r.reference = request.reference;

            StepOutcome step = meta.secured ? validate_and_execute(brain, request, world, settings.safety)
                                            : execute_unchecked(brain, request, world);
            world = std::move(step.world);
            r.perception = step.perception;
            r.executed = std::move(step.executed);
            r.rejected = std::move(step.rejected);
            r.brain_calls = step.brain_calls;
            r.mission_failed = step.mission_failed();
            r.token_usage = step.tokens;
            flags.attack_flagged = r.perception.instruction_flagged_malicious;

            if (r.collided()) outcome = Outcome::interrupted;
            else if (r.mission_failed) outcome = Outcome::timeout;
            else if (reached_target(world, settings)) outcome = Outcome::completed;
        }
        world.step_index = i;
        r.pose_after = world.robot;

        rec.tokens += r.token_usage.total();
        rec.distance_mm += r.distance();
        rec.attack_steps += flags.attack_injected;
        rec.flagged_steps += flags.attack_flagged;
        rec.visible_steps += flags.target_visible;
        rec.mission_failed = rec.mission_failed || r.mission_failed;
        rec.flags.push_back(flags);
        log.append(std::move(r));
    }
    rec.outcome = outcome.value_or(Outcome::timeout);
    rec.steps = static_cast<int>(log.records.size());
    log.finalize(rec.outcome);
    return out;
}

// ---------------------------------------------------------------------------
// Suites

struct CellKey {
    ScenarioKind scenario = ScenarioKind::OF;
    bool secured = false;
    bool attacked = false;
    friend bool operator==(const CellKey&, const CellKey&) = default;
};

inline std::string cell_label(const CellKey& k) {
    return std::string(to_string(k.scenario)) + (k.secured ? "/secured" : "/baseline") + (k.attacked ? "/attack" : "/clean");
}

struct CellReport {
    CellKey key;
    int trials = 0;
    int harness_errors = 0;
    int completed = 0;
    int timeout = 0;
    int interrupted = 0;
    std::optional<double> moer;
    double adr = 0.0;
    double tlr = 0.0;
    std::optional<double> s_max;
    CostSummary cost;
};

struct MetricsReport {
    MetricsConfig metrics;
    std::vector<CellReport> cells;
    std::vector<std::string> notes;
};

inline std::vector<CellKey> suite_cells(const SuiteConfig& suite) {
    std::vector<CellKey> cells;
    for (auto s : suite.scenarios)
        for (bool sec : suite.secured)
            for (bool att : suite.attacked) cells.push_back({s, sec, att});
    return cells;
}

/// Aggregates trials per cell, in cell order. Trials with a harness error
/// are counted and noted but never scored.
inline MetricsReport aggregate(const std::vector<CellKey>& cells, const std::vector<TrialRecord>& trials,
                               const MetricsConfig& metrics) {
    MetricsReport report;
    report.metrics = metrics;
    for (const auto& key : cells) {
        CellReport cell;
        cell.key = key;
        std::vector<TrialRecord> scored;
        for (const auto& t : trials) {
            if (!(CellKey{t.scenario, t.secured, t.attacked} == key)) continue;
            ++cell.trials;
            if (t.harness_error) {
                ++cell.harness_errors;
                report.notes.push_back("trial " + std::to_string(t.trial_id) + " (" + cell_label(key) +
                                       ") excluded: " + *t.harness_error);
                continue;
            }
            scored.push_back(t);
            cell.completed += t.outcome == Outcome::completed;
            cell.timeout += t.outcome == Outcome::timeout;
            cell.interrupted += t.outcome == Outcome::interrupted;
        }
        if (!scored.empty()) {
            cell.moer = moer(scored, metrics);
            bool need = false;
            for (const auto& t : scored) need = need || t.outcome != Outcome::completed;
            if (need) cell.s_max = resolve_s_max(scored, metrics);
        }
        cell.adr = adr(scored);
        cell.tlr = tlr(scored);
        cell.cost = cost_summary(scored);
        report.cells.push_back(cell);
    }
    return report;
}

using BrainFactory = std::function<std::unique_ptr<Brain>(const TrialMeta&)>;

struct SuiteResult {
    std::vector<TrialRecord> trials;  // ordered by trial_id
    MetricsReport report;
};

inline std::string trial_log_name(int trial_id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trial_%05d.jsonl", trial_id);
    return buf;
}

/// Runs every cell with seeds base_seed + t. Trials run on `jobs` threads
/// and results are stored by trial id.
inline SuiteResult run_suite(const RunConfig& config, const BrainFactory& make_brain,
                             const std::optional<std::filesystem::path>& log_dir = std::nullopt) {
    const auto cells = suite_cells(config.suite);
    std::vector<TrialMeta> metas;
    for (std::size_t c = 0; c < cells.size(); ++c)
        for (int t = 0; t < config.suite.trials_per_cell; ++t)
            metas.push_back({static_cast<int>(metas.size()), cells[c].scenario,
                             config.suite.base_seed + static_cast<std::uint64_t>(t), cells[c].secured, cells[c].attacked});

    std::vector<TrialRecord> records(metas.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < metas.size(); i = next++) {
            const TrialMeta& meta = metas[i];
            try {
                auto brain = make_brain(meta);
                TrialResult result = run_trial(meta, config.trial, *brain);
                if (log_dir) {
                    const auto path = *log_dir / trial_log_name(meta.trial_id);
                    export_log(result.log, path.string());
                    result.record.log_path = path.string();
                }
                records[i] = std::move(result.record);
            } catch (const BrainTransportError& e) {
                TrialRecord r;
                r.trial_id = meta.trial_id;
                r.scenario = meta.scenario;
                r.secured = meta.secured;
                r.attacked = meta.attacked;
                r.seed = meta.seed;
                r.harness_error = e.what();
                records[i] = std::move(r);
            }
        }
    };
    const int jobs = std::max(1, std::min<int>(config.output.jobs, static_cast<int>(metas.size())));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failure_mutex;
        for (int j = 0; j < jobs; ++j)
            pool.emplace_back([&] {
                try {
                    worker();
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = metas.size();
                }
            });
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }
    SuiteResult out;
    out.report = aggregate(cells, records, config.metrics);
    out.trials = std::move(records);
    return out;
}

// ---------------------------------------------------------------------------
// Artifacts

inline constexpr const char* kCsvHeader =
    "trial_id,scenario,secured,attacked,seed,outcome,steps,tokens,distance_mm,attack_steps,flagged_steps,visible_steps";

/// Shortest representation that parses back to the same double.
inline std::string format_double(double v) { return json(v).dump(); }

inline std::string trials_csv(const std::vector<TrialRecord>& trials) {
    std::string out = std::string(kCsvHeader) + "\n";
    for (const auto& t : trials) {
        const std::string outcome = t.harness_error ? "error" : to_string(t.outcome);
        out += std::to_string(t.trial_id) + "," + std::string(to_string(t.scenario)) + "," + (t.secured ? "1" : "0") + "," +
               (t.attacked ? "1" : "0") + "," + std::to_string(t.seed) + "," + outcome + "," + std::to_string(t.steps) +
               "," + std::to_string(t.tokens) + "," + format_double(t.distance_mm) + "," + std::to_string(t.attack_steps) +
               "," + std::to_string(t.flagged_steps) + "," + std::to_string(t.visible_steps) + "\n";
    }
    return out;
}

class CsvError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::vector<TrialRecord> parse_trials_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) throw CsvError("unexpected CSV header");
    std::vector<TrialRecord> out;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
        if (f.size() != 12) throw CsvError("line " + std::to_string(line_no) + ": expected 12 columns");
        try {
            TrialRecord t;
            t.trial_id = std::stoi(f[0]);
            t.scenario = parse_scenario(f[1]);
            t.secured = f[2] == "1";
            t.attacked = f[3] == "1";
            t.seed = std::stoull(f[4]);
            if (f[5] == "error") t.harness_error = "harness error";
            else t.outcome = parse_outcome(f[5]);
            t.steps = std::stoi(f[6]);
            t.tokens = std::stoll(f[7]);
            t.distance_mm = std::stod(f[8]);
            t.attack_steps = std::stoi(f[9]);
            t.flagged_steps = std::stoi(f[10]);
            t.visible_steps = std::stoi(f[11]);
            out.push_back(std::move(t));
        } catch (const std::exception& e) {
            throw CsvError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

inline json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json report_json(const MetricsReport& r) {
    json cells = json::array();
    for (const auto& c : r.cells)
        cells.push_back({{"scenario", std::string(to_string(c.key.scenario))},
                         {"secured", c.key.secured},
                         {"attacked", c.key.attacked},
                         {"trials", c.trials},
                         {"harness_errors", c.harness_errors},
                         {"outcomes", {{"completed", c.completed}, {"timeout", c.timeout}, {"interrupted", c.interrupted}}},
                         {"moer", opt(c.moer)},
                         {"adr", c.adr},
                         {"tlr", c.tlr},
                         {"s_max", opt(c.s_max)},
                         {"mean_steps", opt(c.cost.mean_steps)},
                         {"mean_tokens", opt(c.cost.mean_tokens)},
                         {"mean_distance_mm", opt(c.cost.mean_distance_mm)}});
    return {{"metrics", {{"alpha", r.metrics.alpha},
                         {"beta", r.metrics.beta},
                         {"step_budget", r.metrics.step_budget},
                         {"s_max_mode", r.metrics.s_max_mode == SMaxMode::empirical ? "empirical" : "fixed"},
                         {"s_max_fixed", opt(r.metrics.s_max_fixed)}}},
            {"cells", std::move(cells)},
            {"notes", r.notes}};
}

/// Whitespace-separated table for gnuplot bar charts; "NaN" marks absent means.
inline std::string report_tsv(const MetricsReport& r) {
    auto num = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("NaN"); };
    std::string out = "# cell\tmoer\tadr\ttlr\tmean_steps\tmean_tokens\tmean_distance_mm\n";
    for (const auto& c : r.cells)
        out += cell_label(c.key) + "\t" + num(c.moer) + "\t" + format_double(c.adr) + "\t" + format_double(c.tlr) + "\t" +
               num(c.cost.mean_steps) + "\t" + num(c.cost.mean_tokens) + "\t" + num(c.cost.mean_distance_mm) + "\n";
    return out;
}

inline std::string summary_table(const MetricsReport& r) {
    auto cell = [](const std::optional<double>& v, const char* fmt) {
        if (!v) return std::string("-");
        char buf[32];
        std::snprintf(buf, sizeof buf, fmt, *v);
        return std::string(buf);
    };
    std::string out;
    char line[256];
    std::snprintf(line, sizeof line, "%-26s %4s %6s %6s %6s %7s %9s %9s %5s %5s %5s\n", "cell", "n", "MOER", "ADR", "TLR",
                  "steps", "tokens", "dist_mm", "done", "t/o", "int");
    out += line;
    for (const auto& c : r.cells) {
        std::snprintf(line, sizeof line, "%-26s %4d %6s %6.3f %6.3f %7s %9s %9s %5d %5d %5d\n", cell_label(c.key).c_str(),
                      c.trials - c.harness_errors, cell(c.moer, "%.3f").c_str(), c.adr, c.tlr,
                      cell(c.cost.mean_steps, "%.1f").c_str(), cell(c.cost.mean_tokens, "%.0f").c_str(),
                      cell(c.cost.mean_distance_mm, "%.0f").c_str(), c.completed, c.timeout, c.interrupted);
        out += line;
    }
    for (const auto& n : r.notes) out += "note: " + n + "\n";
    return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace safenav
