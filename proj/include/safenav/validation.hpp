// validation.hpp - LiDAR clearance rule for control signals
#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <stdexcept>
#include <vector>

#include "safenav/control.hpp"
#include "safenav/geometry.hpp"
#include "safenav/world.hpp"

namespace safenav {

struct SafetyParams {
    double angular_spread_deg = 15.0;  // half-width r of the checked window
    double safety_distance_mm = 200.0;
    int failure_threshold = 3;  // retries allowed per step

    void check() const {
        if (!(angular_spread_deg >= 0 && angular_spread_deg <= 180))
            throw std::invalid_argument("angular_spread_deg must lie in [0, 180]");
        if (!(safety_distance_mm > 0)) throw std::invalid_argument("safety_distance_mm must be positive");
        if (failure_threshold < 1) throw std::invalid_argument("failure_threshold must be >= 1");
    }
    friend bool operator==(const SafetyParams&, const SafetyParams&) = default;
};

struct ViolatingBeam {
    double angle_deg;    // relative to heading, in (-180, 180]
    double reading_mm;
    double required_mm;  // |d| + dist
    friend bool operator==(const ViolatingBeam&, const ViolatingBeam&) = default;
};

struct ValidationVerdict {
    bool valid = true;
    std::vector<ViolatingBeam> violating_beams;
    ControlSignal checked_signal;
    friend bool operator==(const ValidationVerdict&, const ValidationVerdict&) = default;
};

/// Window bounds are widened by this much so beams that land exactly on
/// +-r survive floating-point rounding of k * resolution.
inline constexpr double kWindowEpsilonDeg = 1e-9;

/// Turn is always valid. Straight with distance d is valid iff every beam
/// within +-r of the travel direction reads at least |d| + dist; backward
/// motion is checked against the rear window centred on 180 degrees.
inline ValidationVerdict validate(const ControlSignal& signal, const Scan& scan, const SafetyParams& params) {
    ValidationVerdict v;
    v.checked_signal = signal;
    const auto* straight = std::get_if<Straight>(&signal);
    if (!straight) return v;

    const double d = std::fabs(straight->distance_mm);
    const double required = d + params.safety_distance_mm;
    const double centre = straight->direction == StraightDirection::forward ? 0.0 : 180.0;
    const double res = scan.angular_resolution;
    const int n = scan.beam_count;

    // Beam indices k (possibly negative) whose angle k*res lies in the window.
    long lo = static_cast<long>(std::ceil((centre - params.angular_spread_deg - kWindowEpsilonDeg) / res));
    long hi = static_cast<long>(std::floor((centre + params.angular_spread_deg + kWindowEpsilonDeg) / res));
    if (hi - lo + 1 > n) {  // window wraps all the way round
        lo = 0;
        hi = n - 1;
    }
    for (long k = lo; k <= hi; ++k) {
        const long idx = ((k % n) + n) % n;
        const double reading = scan.distances[static_cast<std::size_t>(idx)];
        if (reading - d < params.safety_distance_mm)
            v.violating_beams.push_back({signed_deg(scan.angle_of(static_cast<int>(idx))), reading, required});
    }
    v.valid = v.violating_beams.empty();
    return v;
}

}  // namespace safenav

namespace safenav {

/// A command list turned down during the retry loop. A malformed output has
/// no commands and carries the parse error instead.
struct RejectedAttempt {
    CommandList commands;
    std::optional<std::size_t> failed_index;
    std::optional<ValidationVerdict> verdict;
    std::string error;
    friend bool operator==(const RejectedAttempt&, const RejectedAttempt&) = default;
};

inline std::string describe(const RejectedAttempt& a) {
    if (!a.error.empty()) return "malformed output: " + a.error;
    std::string out = "commands [";
    for (std::size_t i = 0; i < a.commands.size(); ++i) out += (i ? ", " : "") + describe(a.commands[i]);
    out += "]";
    if (a.failed_index && a.verdict) {
        out += " rejected at control " + std::to_string(*a.failed_index + 1) + ":";
        for (const auto& b : a.verdict->violating_beams)
            out += " beam " + format_number(b.angle_deg) + " deg reads " + format_number(b.reading_mm) + " mm, needs " +
                   format_number(b.required_mm) + " mm;";
    }
    return out;
}

}  // namespace safenav
