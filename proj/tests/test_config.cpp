#include <gtest/gtest.h>

#include <fstream>

#include "safenav/config.hpp"
#include "support.hpp"

using namespace safenav;
using namespace safenav::testing;

TEST(Config, EmptyDocumentGivesDefaults) {
    const RunConfig c = run_config_from_json(json::object());
    EXPECT_EQ(c.trial.safety, SafetyParams{});
    EXPECT_EQ(c.trial.world, WorldConfig{});
    EXPECT_EQ(c.metrics.alpha, 0.6);
    EXPECT_EQ(c.metrics.beta, 0.3);
    EXPECT_EQ(c.trial.step_budget, 20);
    EXPECT_EQ(*c.metrics.s_max_fixed, 20);
    EXPECT_EQ(c.suite.scenarios.size(), 4u);
    EXPECT_EQ(c.brain.kind, BrainKind::scripted_secured);
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_THROW(run_config_from_json({{"wrld", json::object()}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"safety", {{"safety_dist", 200}}}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"suite", {{"scenarios", {"XX"}}}}}), ConfigError);
}

TEST(Config, WrongTypesAndRangesAreRejected) {
    EXPECT_THROW(run_config_from_json({{"safety", {{"safety_distance_mm", "far"}}}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"attack", {{"rate", 1.5}}}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"safety", {{"failure_threshold", 0}}}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"metrics", {{"s_max_mode", "median"}}}}), ConfigError);
    EXPECT_THROW(run_config_from_json({{"brain", {{"kind", "oracle"}}}}), ConfigError);
}

TEST(ConfigProperty, ResolvedSnapshotReloadsToTheSameConfig) {
    const RunConfig c = run_config_from_json({{"safety", {{"angular_spread_deg", 20}}},
                                             {"attack", {{"rate", 0.25}, {"seed", 9}}},
                                             {"metrics", {{"step_budget", 12}}},
                                             {"suite", {{"scenarios", {"SO", "MO"}}, {"trials_per_cell", 3}}}});
    const json snapshot = to_json(c);
    EXPECT_EQ(to_json(run_config_from_json(snapshot)), snapshot);
    EXPECT_EQ(c.trial.step_budget, 12);
    EXPECT_EQ(trial_settings_from_json(to_json(c.trial)), c.trial);
}

TEST(Config, FileMayContainComments) {
    TempDir dir;
    const auto path = (dir.path / "c.json").string();
    std::ofstream(path) << "// sample\n{\"suite\": {\"trials_per_cell\": 4}}\n";
    EXPECT_EQ(load_run_config(path).suite.trials_per_cell, 4);
    EXPECT_THROW(load_run_config((dir.path / "missing.json").string()), ConfigError);
}
