#pragma once

#include <cmath>
#include <stdexcept>

namespace omninav {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
    double r = std::remainder(a, kTwoPi);
    if (r <= -kPi) r += kTwoPi;
    return r;
}

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double squared_norm() const { return x * x + y * y; }
};

inline Vec2 rotate(const Vec2& v, double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x - s * v.y, s * v.x + c * v.y};
}

// Planar pose (x, y, heading). Heading is kept in (-pi, pi].
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    void normalize() { theta = wrap_angle(theta); }

    Vec2 position() const { return {x, y}; }

    // Composition: this pose treated as a frame, `local` expressed in it.
    Pose2D compose(const Pose2D& local) const {
        const double c = std::cos(theta), s = std::sin(theta);
        return {x + c * local.x - s * local.y,
                y + s * local.x + c * local.y,
                wrap_angle(theta + local.theta)};
    }

    // Inverse composition: expresses `other` in this pose's frame.
    Pose2D relative_to(const Pose2D& frame) const {
        const double c = std::cos(frame.theta), s = std::sin(frame.theta);
        const double dx = x - frame.x, dy = y - frame.y;
        return {c * dx + s * dy, -s * dx + c * dy, wrap_angle(theta - frame.theta)};
    }
};

// Body-frame velocity command (v_x, v_y, omega).
struct BodyTwist {
    double vx = 0.0;
    double vy = 0.0;
    double wz = 0.0;

    bool finite() const {
        return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(wz);
    }
};

}  // namespace omninav
