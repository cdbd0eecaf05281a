// geometry.hpp - planar primitives for the simulated arena
#pragma once

#include <cmath>
#include <numbers>
#include <optional>

namespace safenav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2, Vec2) = default;
};

inline constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

struct Disk {
    Vec2 center;
    double radius = 0.0;
    friend bool operator==(const Disk&, const Disk&) = default;
};

inline constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle into [0, 360).
inline double normalize_deg(double deg) {
    double a = std::fmod(deg, 360.0);
    if (a < 0.0) a += 360.0;
    if (a >= 360.0) a -= 360.0;  // fmod of tiny negatives can round up to 360
    return a;
}

/// Wraps an angle into (-180, 180].
inline double signed_deg(double deg) {
    double a = normalize_deg(deg);
    return a > 180.0 ? a - 360.0 : a;
}

/// Unit vector for a heading measured counterclockwise from +x.
inline Vec2 unit_from_deg(double deg) {
    const double r = deg_to_rad(deg);
    return {std::cos(r), std::sin(r)};
}

/// Smallest t >= 0 with |origin + t*dir - disk.center| == disk.radius, for a
/// unit `dir`. Returns 0 when the origin already lies inside the disk.
inline std::optional<double> ray_disk(Vec2 origin, Vec2 dir, const Disk& disk) {
    const Vec2 m = origin - disk.center;
    const double b = dot(m, dir);
    const double c = dot(m, m) - disk.radius * disk.radius;
    if (c <= 0.0) return 0.0;
    if (b > 0.0) return std::nullopt;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double t = -b - std::sqrt(disc);
    return t < 0.0 ? 0.0 : t;
}

inline double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return norm(p - a);
    double t = dot(p - a, ab) / len2;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return norm(p - (a + t * ab));
}

inline bool segment_hits_disk(Vec2 a, Vec2 b, const Disk& disk) {
    return point_segment_distance(disk.center, a, b) <= disk.radius;
}

}  // namespace safenav
