// safenav - run ablation suites, replay trial logs, spot-check the validator
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "safenav/config.hpp"
#include "safenav/evaluation.hpp"
#include "safenav/remote_brain.hpp"
#include "safenav/replay.hpp"
#include "safenav/validator_oracle.hpp"

namespace fs = std::filesystem;
using namespace safenav;

namespace {

constexpr int kExitMismatch = 1;
constexpr int kExitError = 2;
constexpr int kExitConfigMismatch = 3;

struct RunOptions {
    std::string config_path;
    std::vector<std::string> scenarios;
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
    std::optional<std::string> brain;
    std::optional<double> attack_rate;
    std::optional<int> step_budget;
    std::string secured;
    std::string attacked;
};

json load_config_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j = json::parse(in, nullptr, false, true);
    if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
    if (!j.is_object()) throw ConfigError(path + " must hold a JSON object");
    return j;
}

json both_flag(const std::string& v) {
    if (v == "yes") return json::array({true});
    if (v == "no") return json::array({false});
    return json::array({false, true});
}

RunConfig build_run_config(const RunOptions& o) {
    json j = load_config_json(o.config_path);
    auto set = [&](const char* section, const char* key, json value) {
        if (!j.contains(section)) j[section] = json::object();
        j[section][key] = std::move(value);
    };
    if (!o.scenarios.empty()) set("suite", "scenarios", o.scenarios);
    if (o.trials) set("suite", "trials_per_cell", *o.trials);
    if (o.seed) set("suite", "base_seed", *o.seed);
    if (o.jobs) set("output", "jobs", *o.jobs);
    if (o.out) set("output", "directory", *o.out);
    if (o.brain) set("brain", "kind", *o.brain);
    if (o.attack_rate) set("attack", "rate", *o.attack_rate);
    if (o.step_budget) set("metrics", "step_budget", *o.step_budget);
    if (!o.secured.empty()) set("suite", "secured", both_flag(o.secured));
    if (!o.attacked.empty()) set("suite", "attacked", both_flag(o.attacked));
    return run_config_from_json(j);
}

BrainFactory brain_factory(const RunConfig& c, const fs::path& out_dir) {
    if (c.brain.kind != BrainKind::remote) {
        const ScriptedPolicy policy = scripted_policy(c);
        const BrainKind kind = c.brain.kind;
        return [=](const TrialMeta&) { return std::make_unique<ScriptedBrain>(kind, policy); };
    }
    RemoteSettings base{c.brain.endpoint, c.brain.model, c.brain.api_key_env, c.brain.timeout_s, {}};
    RemoteBrain probe(base);  // fail fast on missing endpoint or credentials
    fs::create_directories(out_dir / "transcripts");
    return [=](const TrialMeta& m) {
        RemoteSettings s = base;
        s.transcript_path = (out_dir / "transcripts" / trial_log_name(m.trial_id)).string();
        return std::make_unique<RemoteBrain>(s);
    };
}

int cmd_run(const RunOptions& o) {
    RunConfig config = build_run_config(o);
    const fs::path out(config.output.directory);
    const fs::path logs = out / "logs";
    fs::create_directories(logs);
    for (const auto& entry : fs::directory_iterator(logs))
        if (entry.path().extension() == ".jsonl") fs::remove(entry.path());

    write_file(out / "config.resolved.json", to_json(config).dump(2) + "\n");
    SuiteResult result = run_suite(config, brain_factory(config, out), logs);
    write_file(out / "trials.csv", trials_csv(result.trials));
    write_file(out / "report.json", report_json(result.report).dump(2) + "\n");
    write_file(out / "report.tsv", report_tsv(result.report));
    std::cout << summary_table(result.report);
    std::cout << "artifacts written to " << out.string() << "\n";
    for (const auto& t : result.trials)
        if (t.harness_error) {
            std::cerr << "harness failure in " << result.report.notes.size() << " trial(s); see notes above\n";
            return kExitError;
        }
    return 0;
}

int cmd_replay(const std::string& path) {
    TrialLog log;
    try {
        log = import_log(path);
    } catch (const LogFormatError& e) {
        std::cerr << "config mismatch: " << path << ": " << e.what() << "\n";
        return kExitConfigMismatch;
    }
    const ReplayReport r = replay(log);
    switch (r.kind) {
        case ReplayReport::Kind::match:
            std::cout << path << ": " << log.records.size() << " steps reproduced exactly\n";
            return 0;
        case ReplayReport::Kind::config_mismatch:
            std::cerr << "config mismatch: " << path << ": " << r.message << "\n";
            return kExitConfigMismatch;
        case ReplayReport::Kind::mismatch:
            std::cerr << "mismatch: " << path;
            if (r.step) std::cerr << " at step " << *r.step;
            std::cerr << ": " << r.message << "\n";
            return kExitMismatch;
    }
    return kExitError;
}

int cmd_check_validator(int samples, std::uint64_t seed) {
    const oracle::CheckReport r = oracle::check_against_oracle(samples, seed);
    std::cout << r.samples << " cases, " << r.mismatches << " mismatches\n";
    if (r.first_counterexample) {
        std::cout << "counterexample:\n" << *r.first_counterexample << "\n";
        return kExitMismatch;
    }
    return 0;
}

std::vector<CellKey> cells_in_order(const std::vector<TrialRecord>& trials) {
    std::vector<CellKey> cells;
    for (const auto& t : trials) {
        CellKey k{t.scenario, t.secured, t.attacked};
        if (std::find(cells.begin(), cells.end(), k) == cells.end()) cells.push_back(k);
    }
    return cells;
}

int cmd_report(const std::string& csv_path, const std::string& config_path, const std::string& json_out) {
    std::ifstream in(csv_path);
    if (!in) throw std::runtime_error("cannot open " + csv_path);
    const auto trials = parse_trials_csv(in);
    const RunConfig config = run_config_from_json(load_config_json(config_path));
    const MetricsReport report = aggregate(cells_in_order(trials), trials, config.metrics);
    std::cout << summary_table(report);
    if (!json_out.empty()) write_file(json_out, report_json(report).dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"safenav: embodied-agent safety testbed"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run the scenario x secured x attacked suite");
    run_cmd->add_option("-c,--config", run.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    run_cmd->add_option("--scenario", run.scenarios, "Scenario(s): OF, SO, DO, MO");
    run_cmd->add_option("--trials", run.trials, "Trials per cell")->check(CLI::PositiveNumber);
    run_cmd->add_option("--seed", run.seed, "Base seed");
    run_cmd->add_option("--jobs", run.jobs, "Parallel trials")->check(CLI::PositiveNumber);
    run_cmd->add_option("--out", run.out, "Output directory");
    run_cmd->add_option("--brain", run.brain, "scripted_naive, scripted_secured or remote");
    run_cmd->add_option("--attack-rate", run.attack_rate, "Injection probability per step")->check(CLI::Range(0.0, 1.0));
    run_cmd->add_option("--step-budget", run.step_budget, "Steps per trial")->check(CLI::PositiveNumber);
    run_cmd->add_option("--secured", run.secured, "yes, no or both")->check(CLI::IsMember({"yes", "no", "both"}));
    run_cmd->add_option("--attacked", run.attacked, "yes, no or both")->check(CLI::IsMember({"yes", "no", "both"}));

    std::string log_path;
    auto* replay_cmd = app.add_subcommand("replay", "Re-simulate a trial log and verify it");
    replay_cmd->add_option("log", log_path, "Trial log (.jsonl)")->required()->check(CLI::ExistingFile);

    int samples = 1000;
    std::uint64_t check_seed = 1;
    auto* check_cmd = app.add_subcommand("check-validator", "Compare the validator against a brute-force oracle");
    check_cmd->add_option("--samples", samples, "Random cases")->check(CLI::PositiveNumber);
    check_cmd->add_option("--seed", check_seed, "RNG seed");

    std::string csv_path, report_config, report_json_out;
    auto* report_cmd = app.add_subcommand("report", "Re-render the metrics report from a trials CSV");
    report_cmd->add_option("csv", csv_path, "trials.csv from a run")->required()->check(CLI::ExistingFile);
    report_cmd->add_option("-c,--config", report_config, "Configuration with metric parameters")->check(CLI::ExistingFile);
    report_cmd->add_option("--json", report_json_out, "Also write the report as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (*replay_cmd) return cmd_replay(log_path);
        if (*check_cmd) return cmd_check_validator(samples, check_seed);
        if (*report_cmd) return cmd_report(csv_path, report_config, report_json_out);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
    }
    return kExitError;
}
