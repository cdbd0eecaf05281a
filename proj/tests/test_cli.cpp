#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "safenav/evaluation.hpp"
#include "support.hpp"

using namespace safenav;
using namespace safenav::testing;

namespace {

struct Ran {
    int status;
    std::string output;
};

Ran cli(const std::string& args) {
    FILE* p = ::popen((std::string(SAFENAV_CLI) + " " + args + " 2>&1").c_str(), "r");
    std::string out;
    std::array<char, 4096> buf{};
    while (std::fgets(buf.data(), buf.size(), p)) out += buf.data();
    const int raw = ::pclose(p);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST(Cli, ZeroSamplesIsAUsageError) {
    const auto r = cli("check-validator --samples 0");
    EXPECT_NE(r.status, 0);
    EXPECT_EQ(r.output.find("mismatches"), std::string::npos);
}

TEST(Cli, CheckValidatorPasses) {
    const auto r = cli("check-validator --samples 1000 --seed 1");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.output.find("0 mismatches"), std::string::npos);
}

TEST(Cli, DefaultRunPrintsSixteenCells) {
    TempDir dir;
    const auto r = cli("run --trials 1 --out " + dir.path.string());
    ASSERT_EQ(r.status, 0) << r.output;
    int rows = 0;
    for (const char* s : {"OF/", "SO/", "DO/", "MO/"})
        for (std::size_t p = r.output.find(s); p != std::string::npos; p = r.output.find(s, p + 1)) ++rows;
    EXPECT_EQ(rows, 16);
    for (const char* f : {"trials.csv", "report.json", "report.tsv", "config.resolved.json"})
        EXPECT_TRUE(std::filesystem::exists(dir.path / f)) << f;
}

TEST(Cli, SingleTrialRun) {
    TempDir dir;
    const auto r = cli("run --scenario OF --trials 1 --seed 7 --secured yes --attacked no --out " + dir.path.string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_TRUE(std::filesystem::exists(dir.path / "logs" / trial_log_name(0)));
    EXPECT_FALSE(std::filesystem::exists(dir.path / "logs" / trial_log_name(1)));
    EXPECT_NE(slurp(dir.path / "trials.csv").find("\n0,OF,1,0,7,completed,"), std::string::npos);
}

TEST(Cli, ResolvedConfigReproducesTheRun) {
    TempDir a, b;
    ASSERT_EQ(cli("run --scenario SO --trials 2 --seed 5 --attack-rate 0.7 --out " + a.path.string()).status, 0);
    std::string snapshot = slurp(a.path / "config.resolved.json");
    auto j = json::parse(snapshot);
    j["output"]["directory"] = b.path.string();
    std::ofstream(b.path / "c.json") << j.dump();
    ASSERT_EQ(cli("run --config " + (b.path / "c.json").string()).status, 0);
    EXPECT_EQ(slurp(a.path / "trials.csv"), slurp(b.path / "trials.csv"));
    EXPECT_EQ(slurp(a.path / "report.json"), slurp(b.path / "report.json"));
}

TEST(Cli, ConfigErrorsExitNonzero) {
    TempDir dir;
    std::ofstream(dir.path / "bad.json") << R"({"safety": {"spread": 3}})";
    const auto r = cli("run --config " + (dir.path / "bad.json").string());
    EXPECT_NE(r.status, 0);
    EXPECT_NE(r.output.find("config error"), std::string::npos);
}

TEST(Cli, ReplayDistinguishesMatchMismatchAndConfigMismatch) {
    TempDir dir;
    ASSERT_EQ(cli("run --scenario MO --trials 1 --secured yes --attacked yes --out " + dir.path.string()).status, 0);
    const auto log = dir.path / "logs" / trial_log_name(0);
    EXPECT_EQ(cli("replay " + log.string()).status, 0);

    std::string text = slurp(log);
    const auto tampered = dir.path / "tampered.jsonl";
    std::string t = text;
    t.insert(t.find("\"traveled\":") + 11, "9");
    std::ofstream(tampered, std::ios::binary) << t;
    const auto r = cli("replay " + tampered.string());
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.output.find("at step"), std::string::npos);

    const auto older = dir.path / "older.jsonl";
    std::string o = text;
    o.replace(o.find("\"robot_clearance_mm\""), 20, "\"robot_margin_mm\"");
    std::ofstream(older, std::ios::binary) << o;
    const auto m = cli("replay " + older.string());
    EXPECT_EQ(m.status, 3);
    EXPECT_NE(m.output.find("config mismatch"), std::string::npos);
}

TEST(Cli, ReportReRendersFromCsv) {
    TempDir dir;
    ASSERT_EQ(cli("run --trials 2 --out " + dir.path.string()).status, 0);
    const auto r = cli("report " + (dir.path / "trials.csv").string() + " --json " + (dir.path / "again.json").string());
    ASSERT_EQ(r.status, 0) << r.output;
    EXPECT_EQ(slurp(dir.path / "report.json"), slurp(dir.path / "again.json"));
}
