// state.hpp - append-only per-trial history and the reference state handed
// back to the brain
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safenav/prompting.hpp"
#include "safenav/validation.hpp"
#include "safenav/world.hpp"

namespace safenav {

inline constexpr int kLogFormatVersion = 1;
inline constexpr const char* kLogFormatName = "safenav-trial-log";

class SequencingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

enum class Outcome { completed, timeout, interrupted };

inline const char* to_string(Outcome o) {
    switch (o) {
        case Outcome::completed: return "completed";
        case Outcome::timeout: return "timeout";
        case Outcome::interrupted: return "interrupted";
    }
    return "?";
}

inline Outcome parse_outcome(std::string_view s) {
    if (s == "completed") return Outcome::completed;
    if (s == "timeout") return Outcome::timeout;
    if (s == "interrupted") return Outcome::interrupted;
    throw std::invalid_argument("unknown outcome '" + std::string(s) + "'");
}

struct ExecutedSignal {
    ControlSignal signal;
    ExecutionResult result;
    std::optional<ValidationVerdict> verdict;  // absent when the pipeline does not validate
    std::string justification;
    friend bool operator==(const ExecutedSignal&, const ExecutedSignal&) = default;
};

/// R_i: the executed (g_ij, e_ij) pairs of step i plus what produced them.
struct StepRecord {
    int step_index = 0;
    std::string instruction;
    std::optional<int> injected_template;
    bool target_visible = false;
    std::string user_prompt;
    std::optional<std::string> reference;
    Perception perception;
    std::vector<ExecutedSignal> executed;
    std::vector<RejectedAttempt> rejected;
    int brain_calls = 0;
    bool mission_failed = false;
    std::optional<std::string> dynamic_collision;
    Pose pose_after;
    TokenUsage token_usage;

    std::size_t rejected_count() const { return rejected.size(); }
    bool collided() const {
        if (dynamic_collision) return true;
        for (const auto& e : executed)
            if (e.result.hit()) return true;
        return false;
    }
    double distance() const {
        double d = 0;
        for (const auto& e : executed)
            if (is_straight(e.signal)) d += e.result.traveled;
        return d;
    }
    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TrialMeta {
    int trial_id = 0;
    ScenarioKind scenario = ScenarioKind::OF;
    std::uint64_t seed = 0;
    bool secured = false;
    bool attacked = false;
    friend bool operator==(const TrialMeta&, const TrialMeta&) = default;
};

struct TrialLog {
    TrialMeta meta;
    std::vector<StepRecord> records;
    std::optional<Outcome> outcome;
    std::string system_prompt;
    nlohmann::json config;  // resolved settings needed to re-simulate the trial
    int format_version = kLogFormatVersion;

    int last_index() const { return records.empty() ? 0 : records.back().step_index; }

    void append(StepRecord record) {
        if (outcome) throw SequencingError("trial log is finalized");
        if (record.step_index != last_index() + 1)
            throw SequencingError("expected step " + std::to_string(last_index() + 1) + ", got " +
                                  std::to_string(record.step_index));
        records.push_back(std::move(record));
    }

    void finalize(Outcome o) {
        if (outcome) throw SequencingError("trial outcome already set");
        outcome = o;
    }
    friend bool operator==(const TrialLog&, const TrialLog&) = default;
};

inline TrialLog record_step(TrialLog log, StepRecord record) {
    log.append(std::move(record));
    return log;
}

/// Only the most recent record is ever shown to the brain.
inline std::optional<StepRecord> reference_state(const TrialLog& log) {
    if (log.records.empty()) return std::nullopt;
    return log.records.back();
}

inline std::string describe(const ExecutionResult& r, const ControlSignal& s) {
    std::string out = to_string(r.status);
    if (is_straight(s)) out += ", traveled " + format_number(r.traveled) + " mm";
    else out += ", turned " + format_number(r.turned) + " deg";
    if (r.collided_with) out += ", contact with " + *r.collided_with;
    return out;
}

inline std::string render_reference(const StepRecord& r) {
    std::string out = "Previous step " + std::to_string(r.step_index) + ":\n";
    if (r.executed.empty()) out += "- no control signals were executed\n";
    for (std::size_t i = 0; i < r.executed.size(); ++i) {
        const auto& e = r.executed[i];
        out += "- Control " + std::to_string(i + 1) + ": " + describe(e.signal) + " -> " + describe(e.result, e.signal) +
               ". Justification: " + e.justification + "\n";
    }
    if (r.dynamic_collision) out += "- a moving obstacle (" + *r.dynamic_collision + ") hit the robot\n";
    return out;
}

// ---------------------------------------------------------------------------
// JSON-lines persistence

inline json to_json(const Pose& p) { return {{"x", p.x}, {"y", p.y}, {"heading", p.heading}}; }
inline Pose pose_from_json(const json& j) { return {j.at("x").get<double>(), j.at("y").get<double>(), j.at("heading").get<double>()}; }

inline json to_json(const TokenUsage& t) { return {{"prompt_tokens", t.prompt_tokens}, {"completion_tokens", t.completion_tokens}}; }
inline TokenUsage token_usage_from_json(const json& j) {
    return {j.at("prompt_tokens").get<std::int64_t>(), j.at("completion_tokens").get<std::int64_t>()};
}

template <class T>
json optional_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<T>();
}

inline json to_json(const ExecutionResult& r) {
    return {{"status", to_string(r.status)}, {"traveled", r.traveled}, {"turned", r.turned},
            {"collided_with", optional_json(r.collided_with)}};
}

inline ExecutionResult execution_result_from_json(const json& j) {
    ExecutionResult r;
    r.status = parse_exec_status(j.at("status").get<std::string>());
    r.traveled = j.at("traveled").get<double>();
    r.turned = j.at("turned").get<double>();
    r.collided_with = optional_from<std::string>(j, "collided_with");
    return r;
}

inline json to_json(const ValidationVerdict& v) {
    json beams = json::array();
    for (const auto& b : v.violating_beams) beams.push_back({b.angle_deg, b.reading_mm, b.required_mm});
    return {{"valid", v.valid}, {"violating_beams", std::move(beams)}, {"signal", signal_to_json(v.checked_signal)}};
}

inline ValidationVerdict verdict_from_json(const json& j) {
    ValidationVerdict v;
    v.valid = j.at("valid").get<bool>();
    for (const auto& b : j.at("violating_beams")) v.violating_beams.push_back({b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>()});
    v.checked_signal = signal_from_json(j.at("signal"));
    return v;
}

inline json commands_to_json(const CommandList& c) {
    json out = json::array();
    for (const auto& s : c) out.push_back(signal_to_json(s));
    return out;
}

inline CommandList commands_from_json(const json& j) {
    CommandList out;
    for (const auto& s : j) out.push_back(signal_from_json(s));
    return out;
}

inline json to_json(const RejectedAttempt& a) {
    return {{"commands", commands_to_json(a.commands)},
            {"failed_index", optional_json(a.failed_index)},
            {"verdict", a.verdict ? to_json(*a.verdict) : json(nullptr)},
            {"error", a.error}};
}

inline RejectedAttempt rejected_from_json(const json& j) {
    RejectedAttempt a;
    a.commands = commands_from_json(j.at("commands"));
    a.failed_index = optional_from<std::size_t>(j, "failed_index");
    if (!j.at("verdict").is_null()) a.verdict = verdict_from_json(j.at("verdict"));
    a.error = j.at("error").get<std::string>();
    return a;
}

inline json to_json(const StepRecord& r) {
    json executed = json::array();
    for (const auto& e : r.executed)
        executed.push_back({{"signal", signal_to_json(e.signal)},
                            {"result", to_json(e.result)},
                            {"verdict", e.verdict ? to_json(*e.verdict) : json(nullptr)},
                            {"justification", e.justification}});
    json rejected = json::array();
    for (const auto& a : r.rejected) rejected.push_back(to_json(a));
    return {{"step", r.step_index},
            {"instruction", r.instruction},
            {"injected_template", optional_json(r.injected_template)},
            {"target_visible", r.target_visible},
            {"user_prompt", r.user_prompt},
            {"reference", optional_json(r.reference)},
            {"perception", perception_to_json(r.perception)},
            {"executed", std::move(executed)},
            {"rejected", std::move(rejected)},
            {"rejected_count", r.rejected_count()},
            {"brain_calls", r.brain_calls},
            {"mission_failed", r.mission_failed},
            {"dynamic_collision", optional_json(r.dynamic_collision)},
            {"collision", r.collided()},
            {"pose", to_json(r.pose_after)},
            {"token_usage", to_json(r.token_usage)}};
}

inline StepRecord step_record_from_json(const json& j) {
    StepRecord r;
    r.step_index = j.at("step").get<int>();
    r.instruction = j.at("instruction").get<std::string>();
    r.injected_template = optional_from<int>(j, "injected_template");
    r.target_visible = j.at("target_visible").get<bool>();
    r.user_prompt = j.at("user_prompt").get<std::string>();
    r.reference = optional_from<std::string>(j, "reference");
    r.perception = perception_from_json(j.at("perception"));
    for (const auto& e : j.at("executed")) {
        ExecutedSignal x;
        x.signal = signal_from_json(e.at("signal"));
        x.result = execution_result_from_json(e.at("result"));
        if (!e.at("verdict").is_null()) x.verdict = verdict_from_json(e.at("verdict"));
        x.justification = e.at("justification").get<std::string>();
        r.executed.push_back(std::move(x));
    }
    for (const auto& a : j.at("rejected")) r.rejected.push_back(rejected_from_json(a));
    r.brain_calls = j.at("brain_calls").get<int>();
    r.mission_failed = j.at("mission_failed").get<bool>();
    r.dynamic_collision = optional_from<std::string>(j, "dynamic_collision");
    r.pose_after = pose_from_json(j.at("pose"));
    r.token_usage = token_usage_from_json(j.at("token_usage"));
    return r;
}

inline json trailer_json(const TrialLog& log) {
    return {{"trailer", true},
            {"format", kLogFormatName},
            {"version", log.format_version},
            {"trial_id", log.meta.trial_id},
            {"scenario", std::string(to_string(log.meta.scenario))},
            {"seed", log.meta.seed},
            {"secured", log.meta.secured},
            {"attacked", log.meta.attacked},
            {"outcome", log.outcome ? json(to_string(*log.outcome)) : json(nullptr)},
            {"steps", log.records.size()},
            {"system_prompt", log.system_prompt},
            {"config", log.config}};
}

/// One JSON object per step followed by a trailer line with the outcome.
inline std::string to_jsonl(const TrialLog& log) {
    std::string out;
    for (const auto& r : log.records) out += to_json(r).dump() + "\n";
    out += trailer_json(log).dump() + "\n";
    return out;
}

class LogFormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline TrialLog from_jsonl(std::istream& in) {
    TrialLog log;
    std::string line;
    bool have_trailer = false;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (have_trailer) throw LogFormatError("content after trailer at line " + std::to_string(line_no));
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw LogFormatError("line " + std::to_string(line_no) + " is not valid JSON");
        try {
            if (j.contains("trailer")) {
                if (j.at("format").get<std::string>() != kLogFormatName) throw LogFormatError("not a trial log");
                log.meta.trial_id = j.at("trial_id").get<int>();
                log.meta.scenario = parse_scenario(j.at("scenario").get<std::string>());
                log.meta.seed = j.at("seed").get<std::uint64_t>();
                log.meta.secured = j.at("secured").get<bool>();
                log.meta.attacked = j.at("attacked").get<bool>();
                if (!j.at("outcome").is_null()) log.outcome = parse_outcome(j.at("outcome").get<std::string>());
                log.system_prompt = j.at("system_prompt").get<std::string>();
                log.config = j.at("config");
                log.format_version = j.at("version").get<int>();
                have_trailer = true;
            } else {
                log.append(step_record_from_json(j));
            }
        } catch (const json::exception& e) {
            throw LogFormatError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const SchemaError& e) {
            throw LogFormatError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const SequencingError& e) {
            throw LogFormatError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const std::invalid_argument& e) {
            throw LogFormatError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (!have_trailer) throw LogFormatError("trial log has no trailer line");
    return log;
}

inline void export_log(const TrialLog& log, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << to_jsonl(log);
    if (!out) throw std::runtime_error("write failed for " + path);
}

inline TrialLog import_log(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return from_jsonl(in);
}

}  // namespace safenav
