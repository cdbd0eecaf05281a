// control.hpp - the two robot control signals a brain may emit
#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <variant>
#include <vector>

namespace safenav {

enum class StraightDirection { forward, backward };
enum class TurnDirection { left, right };

/// Move along the heading. The distance is a magnitude; direction carries the sign.
struct Straight {
    StraightDirection direction = StraightDirection::forward;
    double distance_mm = 0.0;
    friend bool operator==(const Straight&, const Straight&) = default;
};

/// Rotate in place; left is counterclockwise.
struct Turn {
    TurnDirection direction = TurnDirection::left;
    double angle_deg = 0.0;
    friend bool operator==(const Turn&, const Turn&) = default;
};

using ControlSignal = std::variant<Straight, Turn>;
using CommandList = std::vector<ControlSignal>;

inline const char* to_string(StraightDirection d) { return d == StraightDirection::forward ? "forward" : "backward"; }
inline const char* to_string(TurnDirection d) { return d == TurnDirection::left ? "left" : "right"; }

/// Integral values print without decimals, everything else with two.
inline std::string format_number(double v) {
    char buf[64];
    if (std::isfinite(v) && v == std::floor(v) && std::fabs(v) < 1e15)
        std::snprintf(buf, sizeof buf, "%.0f", v);
    else
        std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string describe(const ControlSignal& signal) {
    if (const auto* s = std::get_if<Straight>(&signal))
        return std::string("straight ") + to_string(s->direction) + " " + format_number(s->distance_mm) + " mm";
    const auto& t = std::get<Turn>(signal);
    return std::string("turn ") + to_string(t.direction) + " " + format_number(t.angle_deg) + " deg";
}

inline bool is_straight(const ControlSignal& s) { return std::holds_alternative<Straight>(s); }

}  // namespace safenav
