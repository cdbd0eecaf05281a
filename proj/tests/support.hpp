// Shared fixtures for the unit and acceptance tests.
#pragma once

#include <cmath>
#include <deque>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "safenav/brain.hpp"
#include "safenav/pipeline.hpp"
#include "safenav/world.hpp"

namespace safenav::testing {

/// Empty arena with the robot at the centre facing +x and the target parked
/// in the north-west corner.
inline World open_world(Pose robot = {2000, 2000, 0}) {
    World w;
    w.kind = ScenarioKind::OF;
    w.robot = robot;
    w.target = {{300, 3700}, w.config.target_radius_mm};
    return w;
}

inline Scan uniform_scan(double reading, int beams = 360) {
    Scan s;
    s.beam_count = beams;
    s.angular_resolution = 360.0 / beams;
    s.max_range = 9999;
    s.distances.assign(static_cast<std::size_t>(beams), reading);
    return s;
}

inline Straight forward(double d) { return {StraightDirection::forward, d}; }
inline Straight backward(double d) { return {StraightDirection::backward, d}; }
inline Turn left(double a) { return {TurnDirection::left, a}; }
inline Turn right(double a) { return {TurnDirection::right, a}; }

inline BrainResponse respond(CommandList action) {
    BrainResponse r;
    r.perception.human_instruction_result = "No human instruction.";
    r.justifications.assign(action.size(), "fixture");
    r.action = std::move(action);
    r.token_usage = {10, 5};
    return r;
}

/// Replies with a fixed sequence of responses and counts calls. An empty
/// command list in the sequence raises a schema error instead.
class SequenceBrain final : public Brain {
public:
    explicit SequenceBrain(std::vector<CommandList> replies) : replies_(replies.begin(), replies.end()) {}

    BrainResponse generate(const BrainRequest& request) override {
        ++calls;
        requests.push_back(request);
        if (replies_.empty()) throw std::logic_error("SequenceBrain ran out of replies");
        CommandList next = replies_.front();
        if (replies_.size() > 1) replies_.pop_front();
        if (next.empty()) throw SchemaError("fixture schema error");
        return respond(std::move(next));
    }

    int calls = 0;
    std::vector<BrainRequest> requests;

private:
    std::deque<CommandList> replies_;
};

/// Fresh temporary directory removed on destruction.
struct TempDir {
    std::filesystem::path path;
    TempDir() {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("safenav-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace safenav::testing
