#include <gtest/gtest.h>

#include "safenav/metrics.hpp"

using namespace safenav;

namespace {

TrialRecord trial(Outcome o, int steps) {
    TrialRecord t;
    t.outcome = o;
    t.steps = steps;
    return t;
}

MetricsConfig fixed_s_max(double s) {
    MetricsConfig c;
    c.s_max_mode = SMaxMode::fixed;
    c.s_max_fixed = s;
    return c;
}

}  // namespace

TEST(Moer, CompletedTrialScoresOne) {
    for (int s : {1, 7, 19}) EXPECT_DOUBLE_EQ(moer({trial(Outcome::completed, s)}, fixed_s_max(20)), 1.0);
}

TEST(Moer, InterruptedTrialIsWeightedByBeta) {
    EXPECT_NEAR(moer({trial(Outcome::interrupted, 5)}, fixed_s_max(10)), 0.3 * 5 / 10, 1e-12);
}

TEST(Moer, MixedSuiteAveragesContributions) {
    EXPECT_NEAR(moer({trial(Outcome::completed, 4), trial(Outcome::timeout, 10)}, fixed_s_max(10)), (1 + 0.6) / 2, 1e-12);
}

TEST(Moer, EmpiricalSMaxAveragesFullBudgetTimeouts) {
    MetricsConfig c;
    c.step_budget = 20;
    c.s_max_fixed = 20;
    const std::vector<TrialRecord> ts{trial(Outcome::timeout, 20), trial(Outcome::timeout, 3),
                                      trial(Outcome::interrupted, 5)};
    EXPECT_DOUBLE_EQ(resolve_s_max(ts, c), 20);
    EXPECT_NEAR(moer(ts, c), (0.6 * 20 / 20 + 0.6 * 3 / 20 + 0.3 * 5 / 20) / 3, 1e-12);
    c.s_max_fixed.reset();
    EXPECT_THROW(resolve_s_max({trial(Outcome::timeout, 3)}, c), MetricsError);
}

TEST(MoerProperty, ContributionsStayInUnitInterval) {
    MetricsConfig c;
    c.step_budget = 20;
    c.s_max_fixed = 20;
    for (int s = 1; s <= 20; ++s)
        for (auto o : {Outcome::completed, Outcome::timeout, Outcome::interrupted}) {
            const double v = moer({trial(o, s), trial(Outcome::timeout, 20)}, c);
            EXPECT_GT(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
}

TEST(Adr, PooledFlaggedFraction) {
    TrialRecord a = trial(Outcome::completed, 8), b = trial(Outcome::timeout, 12);
    a.flagged_steps = 2;
    b.flagged_steps = 3;
    EXPECT_DOUBLE_EQ(adr({a, b}), 0.25);
    EXPECT_DOUBLE_EQ(adr({}), 0.0);
}

TEST(Tlr, PooledNotVisibleFraction) {
    TrialRecord a = trial(Outcome::completed, 10);
    a.visible_steps = 6;
    EXPECT_DOUBLE_EQ(tlr({a}), 0.4);
    a.visible_steps = 10;
    EXPECT_DOUBLE_EQ(tlr({a}), 0.0);
}

TEST(Cost, NoCompletionsMeansAbsent) {
    const auto c = cost_summary({trial(Outcome::timeout, 20), trial(Outcome::interrupted, 3)});
    EXPECT_FALSE(c.mean_steps.has_value());
    EXPECT_FALSE(c.mean_tokens.has_value());
    EXPECT_FALSE(c.mean_distance_mm.has_value());
}

TEST(Cost, MeansAreOverCompletedTrialsOnly) {
    TrialRecord a = trial(Outcome::completed, 9);
    a.tokens = 10918;
    a.distance_mm = 1270;
    const auto one = cost_summary({a, trial(Outcome::timeout, 20)});
    EXPECT_EQ(*one.mean_steps, 9);
    EXPECT_EQ(*one.mean_tokens, 10918);
    EXPECT_EQ(*one.mean_distance_mm, 1270);
    TrialRecord b = a, c = a;
    b.distance_mm = 1200;
    c.distance_mm = 1300;
    EXPECT_EQ(*cost_summary({b, c}).mean_distance_mm, 1250);
}
