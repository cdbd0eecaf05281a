// replay.hpp - re-simulate a trial log from its recorded signals and check
// that every execution result and verdict comes out the same
#pragma once

#include <deque>
#include <optional>
#include <string>
#include <variant>

#include "safenav/brain.hpp"
#include "safenav/config.hpp"
#include "safenav/evaluation.hpp"
#include "safenav/state.hpp"

namespace safenav {

class ReplayExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Plays back the brain outputs stored in a log, one call at a time: each
/// rejected attempt of a step, then the executed commands.
class RecordedBrain final : public Brain {
public:
    explicit RecordedBrain(const TrialLog& log) {
        for (const auto& r : log.records) {
            bool first = true;
            auto tokens = [&] {
                TokenUsage t = first ? r.token_usage : TokenUsage{};
                first = false;
                return t;
            };
            for (const auto& a : r.rejected) {
                Call c;
                c.step = r.step_index;
                if (a.commands.empty()) {
                    c.schema_error = a.error;
                } else {
                    c.response.action = a.commands;
                    c.response.justifications.assign(a.commands.size(), "");
                }
                c.response.perception = r.perception;
                c.response.token_usage = tokens();
                calls_.push_back(std::move(c));
            }
            if (!r.executed.empty()) {
                Call c;
                c.step = r.step_index;
                for (const auto& e : r.executed) {
                    c.response.action.push_back(e.signal);
                    c.response.justifications.push_back(e.justification);
                }
                c.response.perception = r.perception;
                c.response.token_usage = tokens();
                calls_.push_back(std::move(c));
            }
        }
    }

    BrainResponse generate(const BrainRequest&) override {
        if (calls_.empty()) throw ReplayExhausted("log has no more recorded brain outputs");
        Call c = std::move(calls_.front());
        calls_.pop_front();
        last_step_ = c.step;
        if (c.schema_error) throw SchemaError(*c.schema_error);
        return c.response;
    }

    std::size_t remaining() const { return calls_.size(); }
    int last_step() const { return last_step_; }

private:
    struct Call {
        int step = 0;
        BrainResponse response;
        std::optional<std::string> schema_error;
    };
    std::deque<Call> calls_;
    int last_step_ = 0;
};

struct ReplayReport {
    enum class Kind { match, mismatch, config_mismatch };
    Kind kind = Kind::match;
    std::optional<int> step;  // first diverging step
    std::string message;
    bool ok() const { return kind == Kind::match; }
};

namespace detail {

/// Name of the first differing field, or empty when equal.
inline std::string first_difference(const StepRecord& a, const StepRecord& b) {
    if (a.instruction != b.instruction || a.injected_template != b.injected_template) return "instruction";
    if (a.target_visible != b.target_visible) return "target_visible";
    if (a.user_prompt != b.user_prompt) return "user_prompt";
    if (a.reference != b.reference) return "reference";
    if (a.dynamic_collision != b.dynamic_collision) return "dynamic_collision";
    if (a.brain_calls != b.brain_calls) return "brain_calls";
    if (a.rejected.size() != b.rejected.size()) return "rejected";
    for (std::size_t i = 0; i < a.rejected.size(); ++i)
        if (!(a.rejected[i] == b.rejected[i])) return "rejected[" + std::to_string(i) + "]";
    if (a.executed.size() != b.executed.size()) return "executed";
    for (std::size_t i = 0; i < a.executed.size(); ++i) {
        const auto& x = a.executed[i];
        const auto& y = b.executed[i];
        const std::string at = "executed[" + std::to_string(i) + "]";
        if (!(x.signal == y.signal)) return at + ".signal";
        if (x.result.status != y.result.status) return at + ".status";
        if (x.result.traveled != y.result.traveled) return at + ".traveled";
        if (x.result.turned != y.result.turned) return at + ".turned";
        if (x.result.collided_with != y.result.collided_with) return at + ".collided_with";
        if (!(x.verdict == y.verdict)) return at + ".verdict";
        if (x.justification != y.justification) return at + ".justification";
    }
    if (a.mission_failed != b.mission_failed) return "mission_failed";
    if (!(a.pose_after == b.pose_after)) return "pose_after";
    if (!(a.perception == b.perception)) return "perception";
    if (!(a.token_usage == b.token_usage)) return "token_usage";
    return {};
}

}  // namespace detail

/// Checks that the log can be re-simulated by this build: same format
/// version, a settings snapshot that parses strictly and round-trips, and
/// the same system prompt.
inline std::optional<std::string> config_mismatch(const TrialLog& log, TrialSettings* settings_out = nullptr) {
    if (log.format_version != kLogFormatVersion)
        return "log format version " + std::to_string(log.format_version) + ", this build reads " +
               std::to_string(kLogFormatVersion);
    TrialSettings settings;
    try {
        settings = trial_settings_from_json(log.config);
    } catch (const std::exception& e) {
        return std::string("settings snapshot rejected: ") + e.what();
    }
    if (to_json(settings) != log.config) return "settings snapshot does not match this build's settings layout";
    if (build_system_prompt(settings.task, log.meta.secured).render() != log.system_prompt)
        return "recorded system prompt differs from the one this build renders";
    if (settings_out) *settings_out = std::move(settings);
    return std::nullopt;
}

inline ReplayReport replay(const TrialLog& log) {
    ReplayReport report;
    TrialSettings settings;
    if (auto why = config_mismatch(log, &settings)) {
        report.kind = ReplayReport::Kind::config_mismatch;
        report.message = *why;
        return report;
    }
    RecordedBrain brain(log);
    TrialLog fresh;
    try {
        fresh = run_trial(log.meta, settings, brain).log;
    } catch (const ReplayExhausted&) {
        report.kind = ReplayReport::Kind::mismatch;
        report.step = brain.last_step() + 1;
        report.message = "re-simulation requested more brain outputs than the log holds";
        return report;
    }
    const std::size_t n = std::min(fresh.records.size(), log.records.size());
    for (std::size_t i = 0; i < n; ++i) {
        const std::string diff = detail::first_difference(log.records[i], fresh.records[i]);
        if (!diff.empty()) {
            report.kind = ReplayReport::Kind::mismatch;
            report.step = log.records[i].step_index;
            report.message = "field " + diff + " differs";
            return report;
        }
    }
    if (fresh.records.size() != log.records.size()) {
        report.kind = ReplayReport::Kind::mismatch;
        report.step = static_cast<int>(n + 1);
        report.message = "log has " + std::to_string(log.records.size()) + " steps, re-simulation has " +
                         std::to_string(fresh.records.size());
        return report;
    }
    if (fresh.outcome != log.outcome) {
        report.kind = ReplayReport::Kind::mismatch;
        report.message = "outcome differs";
        return report;
    }
    if (brain.remaining() != 0) {
        report.kind = ReplayReport::Kind::mismatch;
        report.message = "log holds brain outputs the re-simulation never requested";
    }
    return report;
}

}  // namespace safenav
