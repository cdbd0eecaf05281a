#include <gtest/gtest.h>

#include <random>

#include "safenav/pipeline.hpp"
#include "safenav/validation.hpp"
#include "safenav/validator_oracle.hpp"
#include "support.hpp"

using namespace safenav;
using namespace safenav::testing;

TEST(Validate, TurnIsValidRegardlessOfReadings) {
    const auto v = validate(right(170), uniform_scan(10), {});
    EXPECT_TRUE(v.valid);
    EXPECT_TRUE(v.violating_beams.empty());
}

TEST(Validate, StraightWithEnoughClearanceIsValid) {
    EXPECT_TRUE(validate(forward(500), uniform_scan(900), {}).valid);
}

TEST(Validate, ShortBeamInsideWindowIsReported) {
    Scan s = uniform_scan(5000);
    s.distances[5] = 650;
    const auto v = validate(forward(500), s, {15, 200, 3});
    EXPECT_FALSE(v.valid);
    ASSERT_EQ(v.violating_beams.size(), 1u);
    EXPECT_EQ(v.violating_beams[0], (ViolatingBeam{5, 650, 700}));
}

TEST(Validate, ZeroDistanceStillNeedsClearance) {
    Scan s = uniform_scan(5000);
    s.distances[0] = 150;
    EXPECT_FALSE(validate(forward(0), s, {}).valid);
}

TEST(Validate, BeamsOutsideWindowAreIgnored) {
    Scan s = uniform_scan(5000);
    s.distances[16] = 10;
    s.distances[344] = 10;
    s.distances[90] = 10;
    EXPECT_TRUE(validate(forward(500), s, {15, 200, 3}).valid);
    s.distances[15] = 10;
    EXPECT_FALSE(validate(forward(500), s, {15, 200, 3}).valid);
}

TEST(Validate, WindowEdgesOnBothSidesAreInclusive) {
    Scan s = uniform_scan(5000);
    s.distances[345] = 10;
    const auto v = validate(forward(100), s, {15, 200, 3});
    ASSERT_EQ(v.violating_beams.size(), 1u);
    EXPECT_DOUBLE_EQ(v.violating_beams[0].angle_deg, -15);
}

TEST(Validate, BackwardChecksRearWindow) {
    Scan s = uniform_scan(5000);
    s.distances[0] = 10;
    EXPECT_TRUE(validate(backward(300), s, {}).valid);
    s.distances[190] = 10;
    const auto v = validate(backward(300), s, {});
    ASSERT_FALSE(v.valid);
    EXPECT_DOUBLE_EQ(v.violating_beams[0].angle_deg, -170);
}

TEST(Validate, ExactBoundaryIsValid) {
    EXPECT_TRUE(validate(forward(500), uniform_scan(700), {15, 200, 3}).valid);
    EXPECT_FALSE(validate(forward(500.5), uniform_scan(700), {15, 200, 3}).valid);
}

TEST(ValidateProperty, AgreesWithBruteForceOracle) {
    const auto report = oracle::check_against_oracle(5000, 99);
    EXPECT_EQ(report.mismatches, 0) << report.first_counterexample.value_or("");
}

TEST(ValidateProperty, CheckerCatchesAnOffByOneWindow) {
    // Drops the last beam of the window.
    oracle::Validator narrowed = [](const ControlSignal& s, const Scan& scan, const SafetyParams& p) {
        SafetyParams q = p;
        q.angular_spread_deg = std::max(0.0, p.angular_spread_deg - scan.angular_resolution);
        return validate(s, scan, q);
    };
    const auto report = oracle::check_against_oracle(1000, 1, narrowed);
    EXPECT_GT(report.mismatches, 0);
    ASSERT_TRUE(report.first_counterexample.has_value());
    EXPECT_NE(report.first_counterexample->find("beam"), std::string::npos);
}

TEST(ValidateProperty, LongerMovesNeverBecomeValid) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        auto c = oracle::random_case(rng);
        auto* s = std::get_if<Straight>(&c.signal);
        if (!s) continue;
        const bool short_ok = validate(*s, c.scan, c.params).valid;
        Straight longer = *s;
        longer.distance_mm += 50;
        if (!short_ok) EXPECT_FALSE(validate(longer, c.scan, c.params).valid);
        SafetyParams stricter = c.params;
        stricter.safety_distance_mm += 50;
        if (!short_ok) EXPECT_FALSE(validate(*s, c.scan, stricter).valid);
    }
}

TEST(ValidateProperty, TurnsAreNeutral) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 500; ++i) {
        auto c = oracle::random_case(rng);
        EXPECT_TRUE(validate(left(1 + static_cast<double>(rng() % 359)), c.scan, c.params).valid);
    }
}

// ---------------------------------------------------------------------------
// Retry loop

namespace {

// Wall 1000 mm ahead (robot centre at 3000, east wall at 4000).
World corridor() { return open_world({3000, 2000, 0}); }

const CommandList kValid{forward(300)};
const CommandList kInvalid{forward(900)};

BrainRequest request() { return {build_system_prompt({}, true), {}, std::nullopt, {}}; }

}  // namespace

TEST(RetryLoop, ValidFirstTryExecutesWithOneCall) {
    SequenceBrain brain({kValid});
    const auto out = validate_and_execute(brain, request(), corridor(), {});
    EXPECT_EQ(brain.calls, 1);
    EXPECT_EQ(out.brain_calls, 1);
    EXPECT_FALSE(out.mission_failed());
    EXPECT_TRUE(out.rejected.empty());
    ASSERT_EQ(out.executed.size(), 1u);
    EXPECT_DOUBLE_EQ(out.world.robot.x, 3300);
}

TEST(RetryLoop, TwoRejectionsThenExecution) {
    SequenceBrain brain({kInvalid, kInvalid, kValid});
    const auto out = validate_and_execute(brain, request(), corridor(), {15, 200, 3});
    EXPECT_EQ(brain.calls, 3);
    EXPECT_FALSE(out.mission_failed());
    EXPECT_EQ(out.rejected.size(), 2u);
    ASSERT_EQ(out.executed.size(), 1u);
    EXPECT_EQ(brain.requests[2].retry_context.size(), 2u);
    EXPECT_EQ(*out.rejected[0].failed_index, 0u);
}

TEST(RetryLoop, FourRejectionsFailTheMission) {
    SequenceBrain brain({kInvalid});
    const auto out = validate_and_execute(brain, request(), corridor(), {15, 200, 3});
    EXPECT_EQ(brain.calls, 4);
    EXPECT_TRUE(out.mission_failed());
    EXPECT_TRUE(out.executed.empty());
    EXPECT_EQ(out.rejected.size(), 4u);
    EXPECT_DOUBLE_EQ(out.world.robot.x, 3000);
}

TEST(RetryLoop, CallCountIsBoundedByThresholdPlusOne) {
    for (int n = 1; n <= 6; ++n) {
        SequenceBrain brain({kInvalid});
        validate_and_execute(brain, request(), corridor(), {15, 200, n});
        EXPECT_EQ(brain.calls, n + 1);
    }
}

TEST(RetryLoop, SchemaErrorCountsAsFailedAttempt) {
    SequenceBrain brain({{}, kValid});
    const auto out = validate_and_execute(brain, request(), corridor(), {});
    EXPECT_EQ(brain.calls, 2);
    ASSERT_EQ(out.rejected.size(), 1u);
    EXPECT_FALSE(out.rejected[0].error.empty());
    EXPECT_EQ(out.executed.size(), 1u);
}

TEST(RetryLoop, LaterSignalsAreCheckedFromWhereEarlierOnesLeaveTheRobot) {
    // Each move is fine on its own scan; together they reach the wall.
    SequenceBrain brain({{forward(500), forward(500)}, kValid});
    const auto out = validate_and_execute(brain, request(), corridor(), {});
    ASSERT_EQ(out.rejected.size(), 1u);
    EXPECT_EQ(*out.rejected[0].failed_index, 1u);
    const auto dry = dry_run_validate(corridor(), {left(90), right(90), forward(500)}, {});
    EXPECT_TRUE(dry.valid());
    EXPECT_EQ(dry.verdicts.size(), 3u);
}

TEST(RetryLoop, TransportErrorsPropagate) {
    struct Broken : Brain {
        BrainResponse generate(const BrainRequest&) override { throw BrainTransportError("down"); }
    } brain;
    EXPECT_THROW(validate_and_execute(brain, request(), corridor(), {}), BrainTransportError);
}

TEST(Unchecked, ExecutesWithoutValidation) {
    SequenceBrain brain({{forward(2000)}});
    const auto out = execute_unchecked(brain, request(), corridor());
    EXPECT_EQ(brain.calls, 1);
    ASSERT_EQ(out.executed.size(), 1u);
    EXPECT_FALSE(out.executed[0].verdict.has_value());
    EXPECT_TRUE(out.collided());
    EXPECT_NEAR(out.executed[0].result.traveled, 820, 1e-9);
}
