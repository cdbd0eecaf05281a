// validator_oracle.hpp - brute-force reference for the clearance rule and a
// randomized agreement checker
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "safenav/validation.hpp"

namespace safenav::oracle {

/// Visits every beam, keeps the ones whose angular distance to the travel
/// direction is at most r, and tests the inequality on each.
inline ValidationVerdict brute_force_validate(const ControlSignal& signal, const Scan& scan, const SafetyParams& params) {
    ValidationVerdict v;
    v.checked_signal = signal;
    if (std::holds_alternative<Turn>(signal)) return v;
    const auto& s = std::get<Straight>(signal);
    const double travel_dir = s.direction == StraightDirection::forward ? 0.0 : 180.0;
    for (int k = 0; k < scan.beam_count; ++k) {
        const double angle = k * (360.0 / scan.beam_count);
        const double gap = std::fabs(std::remainder(angle - travel_dir, 360.0));
        if (gap > params.angular_spread_deg + kWindowEpsilonDeg) continue;
        const double reading = scan.distances[static_cast<std::size_t>(k)];
        if (!(reading - std::fabs(s.distance_mm) >= params.safety_distance_mm)) {
            double rel = std::remainder(angle, 360.0);
            if (rel == -180.0) rel = 180.0;
            v.violating_beams.push_back({rel, reading, std::fabs(s.distance_mm) + params.safety_distance_mm});
        }
    }
    v.valid = v.violating_beams.empty();
    return v;
}

struct Case {
    ControlSignal signal;
    Scan scan;
    SafetyParams params;
};

/// Random case generator. Readings sit on a 50 mm grid, as do distances and
/// clearances, which makes exact ties common.
inline Case random_case(std::mt19937_64& rng) {
    auto pick = [&](std::uint64_t n) { return static_cast<std::int64_t>(rng() % n); };
    static constexpr int kBeamCounts[] = {8, 36, 72, 90, 180, 360, 720, 7, 100};
    Case c;
    c.scan.beam_count = kBeamCounts[pick(std::size(kBeamCounts))];
    c.scan.angular_resolution = 360.0 / c.scan.beam_count;
    c.scan.max_range = 9999.0;
    c.scan.distances.resize(static_cast<std::size_t>(c.scan.beam_count));
    for (auto& d : c.scan.distances) d = 50.0 * static_cast<double>(1 + pick(60));

    c.params.angular_spread_deg = 0.5 * static_cast<double>(pick(361));
    c.params.safety_distance_mm = 50.0 * static_cast<double>(1 + pick(8));
    c.params.failure_threshold = 3;

    switch (pick(5)) {
        case 0:
            c.signal = Turn{pick(2) ? TurnDirection::left : TurnDirection::right, 1.0 + static_cast<double>(pick(358))};
            break;
        default:
            c.signal = Straight{pick(2) ? StraightDirection::forward : StraightDirection::backward,
                                50.0 * static_cast<double>(pick(40))};
    }
    return c;
}

using Validator = std::function<ValidationVerdict(const ControlSignal&, const Scan&, const SafetyParams&)>;

struct CheckReport {
    int samples = 0;
    int mismatches = 0;
    std::optional<std::string> first_counterexample;
};

inline bool same_verdict(ValidationVerdict a, ValidationVerdict b) {
    auto key = [](const ViolatingBeam& x, const ViolatingBeam& y) { return x.angle_deg < y.angle_deg; };
    std::sort(a.violating_beams.begin(), a.violating_beams.end(), key);
    std::sort(b.violating_beams.begin(), b.violating_beams.end(), key);
    return a == b;
}

inline std::string describe_case(const Case& c, const ValidationVerdict& got, const ValidationVerdict& want) {
    std::ostringstream out;
    out << describe(c.signal) << " with r=" << c.params.angular_spread_deg << " deg, dist=" << c.params.safety_distance_mm
        << " mm, beams=" << c.scan.beam_count << ": validator says " << (got.valid ? "valid" : "invalid") << " ("
        << got.violating_beams.size() << " violating beams), oracle says " << (want.valid ? "valid" : "invalid") << " ("
        << want.violating_beams.size() << " violating beams)";
    return out.str();
}

inline CheckReport check_against_oracle(int samples, std::uint64_t seed, const Validator& validator = validate) {
    CheckReport report;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < samples; ++i) {
        const Case c = random_case(rng);
        const auto got = validator(c.signal, c.scan, c.params);
        const auto want = brute_force_validate(c.signal, c.scan, c.params);
        ++report.samples;
        if (!same_verdict(got, want)) {
            ++report.mismatches;
            if (!report.first_counterexample) report.first_counterexample = describe_case(c, got, want);
        }
    }
    return report;
}

}  // namespace safenav::oracle
