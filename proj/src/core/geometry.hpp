#pragma once

#include <array>
#include <optional>

#include "core/common.hpp"

namespace omninav {

// Oriented rectangle: center pose plus full side lengths. `length` spans the
// box frame x axis, `width` the y axis.
struct OrientedBox {
    Pose2D pose;
    double length = 0.0;
    double width = 0.0;

    std::array<Vec2, 4> corners() const;
    bool contains(const Vec2& p) const;
    // Euclidean distance from p to the box boundary; 0 inside.
    double distance(const Vec2& p) const;
};

// Parametric distance t >= 0 where the ray origin+t*dir first hits the
// segment [a, b], if any. dir need not be normalized.
std::optional<double> ray_segment_intersection(const Vec2& origin, const Vec2& dir,
                                               const Vec2& a, const Vec2& b);

// First hit of the ray with a disc of radius r centered at c.
std::optional<double> ray_disc_intersection(const Vec2& origin, const Vec2& dir,
                                            const Vec2& c, double r);

// First hit of the ray with the box outline.
std::optional<double> ray_box_intersection(const Vec2& origin, const Vec2& dir,
                                           const OrientedBox& box);

// Separating-axis overlap test for two oriented rectangles (touching counts
// as overlap only if interiors intersect; a shared edge does not).
bool boxes_overlap(const OrientedBox& a, const OrientedBox& b);

}  // namespace omninav
