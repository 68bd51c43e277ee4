#pragma once

#include <algorithm>
#include <cmath>

#include "manetid/rng.hpp"

// Random waypoint mobility: a node pauses, picks a uniform waypoint and a
// uniform speed, travels there in a straight line, and pauses again.
namespace manetid::rwp {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) {
    const double dx = a.x - b.x;
    const double dy = a.y - b.y;
    return std::sqrt(dx * dx + dy * dy);
}

struct Bounds {
    double width = 500.0;
    double height = 500.0;
};

struct RwpParams {
    double min_speed = 0.0;   // m/s, exclusive lower bound of drawn speeds
    double max_speed = 20.0;  // m/s, inclusive upper bound
    double pause_time = 2.0;  // s
};

enum class Phase { Paused, Moving };

// Kinematic state stamped with its own simulation time so pause expiry is
// well defined without outside bookkeeping.
struct MotionState {
    double time = 0.0;
    Vec2 position;
    Vec2 waypoint;
    double speed = 0.0;
    Phase phase = Phase::Paused;
    double pause_until = 0.0;  // meaningful while Paused
};

// Uniform position, initially pausing: a node "remains in one location for
// a particular period" before its first leg.
inline MotionState initial_state(const RwpParams& params, const Bounds& bounds, Rng& rng) {
    MotionState s;
    s.position = {rng.uniform(0.0, bounds.width), rng.uniform(0.0, bounds.height)};
    s.waypoint = s.position;
    s.phase = Phase::Paused;
    s.pause_until = params.pause_time;
    return s;
}

// Draw the next leg: waypoint uniform over the area, speed uniform on
// (min_speed, max_speed]. The half-open interval excludes the degenerate
// zero speed that would strand a node forever.
inline MotionState sample_next_leg(MotionState s, const RwpParams& params, const Bounds& bounds,
                                   Rng& rng) {
    s.waypoint = {rng.uniform(0.0, bounds.width), rng.uniform(0.0, bounds.height)};
    s.speed = params.max_speed - rng.next_double() * (params.max_speed - params.min_speed);
    s.phase = Phase::Moving;
    return s;
}

// Pure kinematics over dt seconds. A paused node holds position; a moving
// node travels min(speed*dt, remaining) along its segment and, on arrival,
// starts a pause anchored at the exact arrival instant so trajectories do
// not depend on the caller's stepping grid.
inline MotionState advance(MotionState s, const RwpParams& params, double dt) {
    if (dt < 0.0) dt = 0.0;
    if (s.phase == Phase::Paused) {
        s.time += dt;
        return s;
    }
    const double dx = s.waypoint.x - s.position.x;
    const double dy = s.waypoint.y - s.position.y;
    const double remaining = std::sqrt(dx * dx + dy * dy);
    const double travel = s.speed * dt;
    if (travel < remaining) {
        const double frac = travel / remaining;
        s.position.x += dx * frac;
        s.position.y += dy * frac;
        s.time += dt;
        return s;
    }
    const double arrival = s.time + (s.speed > 0.0 ? remaining / s.speed : 0.0);
    s.position = s.waypoint;
    s.phase = Phase::Paused;
    s.pause_until = arrival + params.pause_time;
    s.time += dt;
    return s;
}

// Advance to an absolute time, drawing new legs whenever a pause expires.
// Leg draws happen at the exact expiry instant, so stepping here in any
// increment pattern yields the same trajectory and the same rng draws.
// Times snap to the event instants; "time += dt" alone cannot be trusted
// to ever reach t exactly.
inline MotionState step_to(MotionState s, const RwpParams& params, const Bounds& bounds, Rng& rng,
                           double t) {
    while (s.time < t) {
        if (s.phase == Phase::Paused) {
            if (s.pause_until >= t) {
                s.time = t;
                break;
            }
            s.time = s.pause_until;
            s = sample_next_leg(s, params, bounds, rng);
        } else {
            const double remaining = distance(s.position, s.waypoint);
            const double arrival = s.time + remaining / s.speed;
            if (arrival > t) {
                s = advance(s, params, t - s.time);
                s.time = t;
                break;
            }
            s.position = s.waypoint;
            s.phase = Phase::Paused;
            s.pause_until = arrival + params.pause_time;
            s.time = arrival;
        }
    }
    return s;
}

inline Vec2 position_at(const MotionState& initial, const RwpParams& params, const Bounds& bounds,
                        Rng& rng, double t) {
    return step_to(initial, params, bounds, rng, t).position;
}

}  // namespace manetid::rwp
