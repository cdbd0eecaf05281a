// pipeline.hpp - validate-then-execute with bounded retries
#pragma once

#include <optional>
#include <vector>

#include "safenav/brain.hpp"
#include "safenav/state.hpp"
#include "safenav/validation.hpp"
#include "safenav/world.hpp"

namespace safenav {

/// Per-signal verdicts from validating a command list against the scan the
/// robot would actually see before each signal.
struct DryRun {
    std::vector<ValidationVerdict> verdicts;
    std::optional<std::size_t> failed_index;
    bool valid() const { return !failed_index; }
};

/// Validates each signal in order, re-scanning a copy of the world after
/// every signal that passes. Stops at the first failure, or at a simulated
/// contact (the real run would stop there too).
inline DryRun dry_run_validate(World world, const CommandList& commands, const SafetyParams& params) {
    DryRun out;
    for (std::size_t j = 0; j < commands.size(); ++j) {
        out.verdicts.push_back(validate(commands[j], lidar_scan(world), params));
        if (!out.verdicts.back().valid) {
            out.failed_index = j;
            return out;
        }
        auto applied = apply_signal(std::move(world), commands[j]);
        if (applied.result.hit()) return out;
        world = std::move(applied.world);
    }
    return out;
}

struct StepOutcome {
    enum class Status { executed, mission_failed };
    Status status = Status::executed;
    std::vector<ExecutedSignal> executed;
    std::vector<RejectedAttempt> rejected;
    Perception perception;
    int brain_calls = 0;
    TokenUsage tokens;
    World world;

    bool mission_failed() const { return status == Status::mission_failed; }
    bool collided() const {
        for (const auto& e : executed)
            if (e.result.hit()) return true;
        return false;
    }
};

namespace detail {

inline void execute_all(StepOutcome& out, const BrainResponse& response, const std::vector<ValidationVerdict>* verdicts) {
    for (std::size_t j = 0; j < response.action.size(); ++j) {
        auto applied = apply_signal(std::move(out.world), response.action[j]);
        out.world = std::move(applied.world);
        ExecutedSignal e{response.action[j], applied.result, std::nullopt, response.justifications[j]};
        if (verdicts && j < verdicts->size()) e.verdict = (*verdicts)[j];
        out.executed.push_back(std::move(e));
        if (applied.result.hit()) break;
    }
}

}  // namespace detail

/// Obtain C from the brain; execute it when every signal passes, otherwise
/// re-ask with the rejection attached while fewer than N retries were used.
/// The brain is called at most N + 1 times. BrainTransportError propagates.
inline StepOutcome validate_and_execute(Brain& brain, BrainRequest request, World world, const SafetyParams& params) {
    params.check();
    StepOutcome out;
    out.world = std::move(world);
    int failures = 0;
    while (true) {
        RejectedAttempt attempt;
        ++out.brain_calls;
        try {
            BrainResponse response = brain.generate(request);
            out.tokens += response.token_usage;
            out.perception = response.perception;
            DryRun dry = dry_run_validate(out.world, response.action, params);
            if (dry.valid()) {
                detail::execute_all(out, response, &dry.verdicts);
                return out;
            }
            attempt.commands = response.action;
            attempt.failed_index = dry.failed_index;
            attempt.verdict = dry.verdicts.back();
        } catch (const SchemaError& e) {
            attempt.error = e.what();
        }
        out.rejected.push_back(attempt);
        if (failures >= params.failure_threshold) {
            out.status = StepOutcome::Status::mission_failed;
            return out;
        }
        ++failures;
        request.retry_context.push_back(std::move(attempt));
    }
}

/// Baseline path: one brain call, commands run as issued.
inline StepOutcome execute_unchecked(Brain& brain, const BrainRequest& request, World world) {
    StepOutcome out;
    out.world = std::move(world);
    ++out.brain_calls;
    try {
        BrainResponse response = brain.generate(request);
        out.tokens += response.token_usage;
        out.perception = response.perception;
        detail::execute_all(out, response, nullptr);
    } catch (const SchemaError& e) {
        RejectedAttempt attempt;
        attempt.error = e.what();
        out.rejected.push_back(std::move(attempt));
    }
    return out;
}

}  // namespace safenav
