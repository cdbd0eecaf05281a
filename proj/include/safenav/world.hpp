// world.hpp - deterministic 2D arena: spawning, sensing, kinematics, dynamics
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "safenav/control.hpp"
#include "safenav/geometry.hpp"

namespace safenav {

/// Obstacle-free, static, dynamic and mixed environments.
enum class ScenarioKind { OF, SO, DO, MO };

inline constexpr ScenarioKind kAllScenarios[] = {ScenarioKind::OF, ScenarioKind::SO, ScenarioKind::DO,
                                                 ScenarioKind::MO};

inline std::string_view to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::OF: return "OF";
        case ScenarioKind::SO: return "SO";
        case ScenarioKind::DO: return "DO";
        case ScenarioKind::MO: return "MO";
    }
    return "?";
}

inline ScenarioKind parse_scenario(std::string_view s) {
    for (auto k : kAllScenarios)
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown scenario kind '" + std::string(s) + "' (expected OF, SO, DO or MO)");
}

class PlacementError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // degrees, counterclockwise from +x, [0, 360)

    Vec2 position() const { return {x, y}; }
    friend bool operator==(const Pose&, const Pose&) = default;
};

struct WorldConfig {
    double arena_width_mm = 4000.0;
    double arena_height_mm = 4000.0;
    double robot_radius_mm = 180.0;
    double target_radius_mm = 35.0;
    int lidar_beams = 360;
    double lidar_max_range_mm = 9999.0;
    double camera_fov_half_deg = 30.0;
    int static_obstacles = 3;
    int dynamic_obstacles = 2;
    double static_radius_min_mm = 150.0;
    double static_radius_max_mm = 300.0;
    double dynamic_radius_mm = 150.0;
    double dynamic_speed_mm = 150.0;  // per pipeline step
    double spawn_gap_mm = 100.0;
    double robot_clearance_mm = 300.0;
    double min_target_distance_mm = 1000.0;
    int max_spawn_attempts = 10000;

    friend bool operator==(const WorldConfig&, const WorldConfig&) = default;
};

struct DynamicObstacle {
    Disk body;
    Vec2 velocity;  // mm per step
    friend bool operator==(const DynamicObstacle&, const DynamicObstacle&) = default;
};

struct World {
    ScenarioKind kind = ScenarioKind::OF;
    WorldConfig config;
    Pose robot;
    Disk target;
    std::vector<Disk> static_obstacles;
    std::vector<DynamicObstacle> dynamic_obstacles;
    std::uint64_t rng_seed = 0;
    int step_index = 0;

    double robot_radius() const { return config.robot_radius_mm; }
    friend bool operator==(const World&, const World&) = default;
};

/// One reading per beam; beam k points k * angular_resolution degrees
/// counterclockwise from the robot heading.
struct Scan {
    std::vector<double> distances;
    int beam_count = 0;
    double angular_resolution = 0.0;
    double max_range = 0.0;

    double angle_of(int beam) const { return beam * angular_resolution; }
    friend bool operator==(const Scan&, const Scan&) = default;
};

/// Symbolic front-camera view. Bearing is positive to the right of the heading.
struct CameraObservation {
    bool target_visible = false;
    std::optional<double> bearing;
    std::optional<double> range;
    bool occluded = false;
    friend bool operator==(const CameraObservation&, const CameraObservation&) = default;
};

enum class ExecStatus { ok, collision, blocked };

inline const char* to_string(ExecStatus s) {
    switch (s) {
        case ExecStatus::ok: return "ok";
        case ExecStatus::collision: return "collision";
        case ExecStatus::blocked: return "blocked";
    }
    return "?";
}

inline ExecStatus parse_exec_status(std::string_view s) {
    if (s == "ok") return ExecStatus::ok;
    if (s == "collision") return ExecStatus::collision;
    if (s == "blocked") return ExecStatus::blocked;
    throw std::invalid_argument("unknown execution status '" + std::string(s) + "'");
}

struct ExecutionResult {
    ExecStatus status = ExecStatus::ok;
    double traveled = 0.0;  // mm, magnitude
    double turned = 0.0;    // degrees, magnitude
    std::optional<std::string> collided_with;

    bool hit() const { return status != ExecStatus::ok; }
    friend bool operator==(const ExecutionResult&, const ExecutionResult&) = default;
};

// Body identifiers used in collision reports: "target", "static:<i>",
// "dynamic:<i>", "wall:<east|west|north|south>".
inline std::string static_id(std::size_t i) { return "static:" + std::to_string(i); }
inline std::string dynamic_id(std::size_t i) { return "dynamic:" + std::to_string(i); }

namespace detail {

// Bit-exact on every platform, unlike std::uniform_real_distribution.
class SpawnRng {
public:
    explicit SpawnRng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) {
        const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

private:
    std::mt19937_64 engine_;
};

inline void check_config(const WorldConfig& c) {
    if (!(c.arena_width_mm > 0) || !(c.arena_height_mm > 0) || !(c.robot_radius_mm > 0) || !(c.target_radius_mm > 0))
        throw std::invalid_argument("world dimensions must be positive");
    if (c.lidar_beams <= 0 || !(c.lidar_max_range_mm > 0))
        throw std::invalid_argument("lidar beam count and range must be positive");
    if (!(c.camera_fov_half_deg > 0) || !(c.camera_fov_half_deg < 180))
        throw std::invalid_argument("camera half field of view must lie in (0, 180)");
    if (c.static_obstacles < 0 || c.dynamic_obstacles < 0)
        throw std::invalid_argument("obstacle counts must be non-negative");
    if (!(c.static_radius_min_mm > 0) || c.static_radius_max_mm < c.static_radius_min_mm || !(c.dynamic_radius_mm > 0))
        throw std::invalid_argument("obstacle radii must be positive with min <= max");
    if (c.max_spawn_attempts <= 0) throw std::invalid_argument("max_spawn_attempts must be positive");
}

}  // namespace detail

/// Rejection-samples a scenario. Robot and target are drawn first, so every
/// kind shares the same robot/target layout for a given seed.
inline World spawn_scenario(ScenarioKind kind, std::uint64_t seed, const WorldConfig& config) {
    detail::check_config(config);
    World w;
    w.kind = kind;
    w.config = config;
    w.rng_seed = seed;

    const double W = config.arena_width_mm;
    const double H = config.arena_height_mm;
    const double R = config.robot_radius_mm;
    if (2 * R > W || 2 * R > H) throw PlacementError("robot does not fit in the arena");

    detail::SpawnRng rng(seed);
    auto draw_center = [&](double r) -> Vec2 { return {rng.uniform(r, W - r), rng.uniform(r, H - r)}; };

    w.robot = Pose{rng.uniform(R, W - R), rng.uniform(R, H - R), normalize_deg(rng.uniform(0.0, 360.0))};

    std::vector<Disk> placed;  // everything except the robot
    auto fits = [&](const Disk& d, double robot_gap) {
        if (2 * d.radius > W || 2 * d.radius > H) return false;
        if (norm(d.center - w.robot.position()) < R + d.radius + robot_gap) return false;
        for (const auto& o : placed)
            if (norm(d.center - o.center) < d.radius + o.radius + config.spawn_gap_mm) return false;
        return true;
    };
    auto place = [&](double radius, double robot_gap, const std::string& what) -> Disk {
        for (int attempt = 0; attempt < config.max_spawn_attempts; ++attempt) {
            Disk d{draw_center(radius), radius};
            if (fits(d, robot_gap)) {
                placed.push_back(d);
                return d;
            }
        }
        throw PlacementError("could not place " + what + " after " + std::to_string(config.max_spawn_attempts) +
                             " attempts; configuration is too crowded");
    };

    const double target_gap = std::max(config.min_target_distance_mm - R - config.target_radius_mm,
                                       config.spawn_gap_mm);
    w.target = place(config.target_radius_mm, target_gap, "target");

    const bool with_static = kind == ScenarioKind::SO || kind == ScenarioKind::MO;
    const bool with_dynamic = kind == ScenarioKind::DO || kind == ScenarioKind::MO;
    const int n_static = with_static ? config.static_obstacles : 0;
    const int n_dynamic = with_dynamic ? config.dynamic_obstacles : 0;

    for (int i = 0; i < n_static; ++i) {
        const double r = rng.uniform(config.static_radius_min_mm, config.static_radius_max_mm);
        w.static_obstacles.push_back(place(r, config.robot_clearance_mm, static_id(i)));
    }
    for (int i = 0; i < n_dynamic; ++i) {
        const double dir = rng.uniform(0.0, 360.0);
        Disk body = place(config.dynamic_radius_mm, config.robot_clearance_mm, dynamic_id(i));
        w.dynamic_obstacles.push_back({body, config.dynamic_speed_mm * unit_from_deg(dir)});
    }
    return w;
}

namespace detail {

inline double wall_distance(Vec2 o, Vec2 u, double W, double H) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const double tx = u.x > 0 ? (W - o.x) / u.x : (u.x < 0 ? -o.x / u.x : inf);
    const double ty = u.y > 0 ? (H - o.y) / u.y : (u.y < 0 ? -o.y / u.y : inf);
    return std::max(0.0, std::min(tx, ty));
}

template <class F>
void for_each_body(const World& w, F&& f) {
    f(w.target, std::string_view("target"), -1);
    for (std::size_t i = 0; i < w.static_obstacles.size(); ++i) f(w.static_obstacles[i], std::string_view("static"), int(i));
    for (std::size_t i = 0; i < w.dynamic_obstacles.size(); ++i)
        f(w.dynamic_obstacles[i].body, std::string_view("dynamic"), int(i));
}

inline std::string body_id(std::string_view kind, int index) {
    if (kind == "target") return "target";
    return std::string(kind) + ":" + std::to_string(index);
}

}  // namespace detail

/// Smallest reported reading; a sensor never returns exactly zero.
inline constexpr double kMinLidarReading = 1e-6;

inline double cast_beam(const World& w, double world_angle_deg) {
    const Vec2 o = w.robot.position();
    const Vec2 u = unit_from_deg(world_angle_deg);
    double best = detail::wall_distance(o, u, w.config.arena_width_mm, w.config.arena_height_mm);
    detail::for_each_body(w, [&](const Disk& d, std::string_view, int) {
        if (auto t = ray_disk(o, u, d)) best = std::min(best, *t);
    });
    return std::clamp(best, kMinLidarReading, w.config.lidar_max_range_mm);
}

inline Scan lidar_scan(const World& w) {
    Scan s;
    s.beam_count = w.config.lidar_beams;
    s.angular_resolution = 360.0 / s.beam_count;
    s.max_range = w.config.lidar_max_range_mm;
    s.distances.reserve(static_cast<std::size_t>(s.beam_count));
    for (int k = 0; k < s.beam_count; ++k) s.distances.push_back(cast_beam(w, w.robot.heading + s.angle_of(k)));
    return s;
}

inline CameraObservation camera_observe(const World& w, double fov_half_angle) {
    if (!(fov_half_angle > 0) || !(fov_half_angle < 180))
        throw std::invalid_argument("camera half field of view must lie in (0, 180)");
    CameraObservation obs;
    const Vec2 from = w.robot.position();
    const Vec2 to = w.target.center;
    const Vec2 d = to - from;
    const double bearing = -signed_deg(rad_to_deg(std::atan2(d.y, d.x)) - w.robot.heading);
    if (std::fabs(bearing) > fov_half_angle) return obs;

    bool blocked = false;
    for (const auto& s : w.static_obstacles) blocked = blocked || segment_hits_disk(from, to, s);
    for (const auto& o : w.dynamic_obstacles) blocked = blocked || segment_hits_disk(from, to, o.body);
    if (blocked) {
        obs.occluded = true;
        return obs;
    }
    obs.target_visible = true;
    obs.bearing = bearing == 0.0 ? 0.0 : bearing;  // no negative zero in logs
    obs.range = norm(d);
    return obs;
}

inline CameraObservation camera_observe(const World& w) { return camera_observe(w, w.config.camera_fov_half_deg); }

struct Applied {
    World world;
    ExecutionResult result;
};

namespace detail {

struct Contact {
    double s = std::numeric_limits<double>::infinity();
    std::string body;
};

// First contact of the robot disk swept from `o` along unit `u`.
inline Contact first_contact(const World& w, Vec2 o, Vec2 u) {
    Contact c;
    const double R = w.robot_radius();
    const double W = w.config.arena_width_mm;
    const double H = w.config.arena_height_mm;
    auto consider = [&](double s, std::string id) {
        if (s < c.s) {
            c.s = s;
            c.body = std::move(id);
        }
    };
    if (u.x > 0) consider(std::max(0.0, (W - R - o.x) / u.x), "wall:east");
    if (u.x < 0) consider(std::max(0.0, (R - o.x) / u.x), "wall:west");
    if (u.y > 0) consider(std::max(0.0, (H - R - o.y) / u.y), "wall:north");
    if (u.y < 0) consider(std::max(0.0, (R - o.y) / u.y), "wall:south");
    for_each_body(w, [&](const Disk& d, std::string_view kind, int index) {
        const Disk grown{d.center, d.radius + R};
        const Vec2 m = o - d.center;
        if (dot(m, m) <= grown.radius * grown.radius) {
            // Already touching: only motion toward the body is stopped.
            if (dot(m, u) < 0) consider(0.0, body_id(kind, index));
            return;
        }
        if (auto t = ray_disk(o, u, grown)) consider(*t, body_id(kind, index));
    });
    return c;
}

}  // namespace detail

/// Executes one signal. Straight sweeps the robot disk and stops at first
/// contact; Turn rotates in place and always succeeds.
inline Applied apply_signal(World world, const ControlSignal& signal) {
    ExecutionResult r;
    if (const auto* t = std::get_if<Turn>(&signal)) {
        const double delta = t->direction == TurnDirection::left ? t->angle_deg : -t->angle_deg;
        world.robot.heading = normalize_deg(world.robot.heading + delta);
        r.turned = t->angle_deg;
        return {std::move(world), r};
    }
    const auto& s = std::get<Straight>(signal);
    const double sign = s.direction == StraightDirection::forward ? 1.0 : -1.0;
    const Vec2 u = sign * unit_from_deg(world.robot.heading);
    const Vec2 o = world.robot.position();
    const auto contact = detail::first_contact(world, o, u);
    double travel = s.distance_mm;
    if (contact.s <= s.distance_mm) {
        travel = contact.s;
        r.status = contact.s == 0.0 ? ExecStatus::blocked : ExecStatus::collision;
        r.collided_with = contact.body;
    }
    const Vec2 p = o + travel * u;
    world.robot.x = p.x;
    world.robot.y = p.y;
    r.traveled = travel;
    return {std::move(world), r};
}

struct DynamicsResult {
    World world;
    std::optional<std::string> robot_hit_by;
};

/// Advances every dynamic obstacle by one step. Obstacles bounce elastically
/// off walls and static obstacles and pass through each other.
inline DynamicsResult step_dynamics(World world) {
    const double W = world.config.arena_width_mm;
    const double H = world.config.arena_height_mm;
    DynamicsResult out;
    for (std::size_t i = 0; i < world.dynamic_obstacles.size(); ++i) {
        auto& ob = world.dynamic_obstacles[i];
        const double r = ob.body.radius;
        Vec2 c = ob.body.center + ob.velocity;
        Vec2 v = ob.velocity;
        if (c.x < r) { c.x = 2 * r - c.x; v.x = -v.x; }
        if (c.x > W - r) { c.x = 2 * (W - r) - c.x; v.x = -v.x; }
        if (c.y < r) { c.y = 2 * r - c.y; v.y = -v.y; }
        if (c.y > H - r) { c.y = 2 * (H - r) - c.y; v.y = -v.y; }
        for (const auto& s : world.static_obstacles) {
            const Vec2 d = c - s.center;
            const double dist = norm(d);
            const double reach = r + s.radius;
            if (dist >= reach) continue;
            Vec2 n = dist > 0 ? (1.0 / dist) * d : (-1.0 / std::max(norm(v), 1e-12)) * v;
            c = s.center + reach * n;
            const double vn = dot(v, n);
            if (vn < 0) v = v - (2 * vn) * n;
        }
        c.x = std::clamp(c.x, r, W - r);
        c.y = std::clamp(c.y, r, H - r);
        ob.body.center = c;
        ob.velocity = v;
        if (!out.robot_hit_by && norm(c - world.robot.position()) < r + world.robot_radius())
            out.robot_hit_by = dynamic_id(i);
    }
    out.world = std::move(world);
    return out;
}

}  // namespace safenav
