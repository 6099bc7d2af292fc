#include "core/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace omninav {

std::array<Vec2, 4> OrientedBox::corners() const {
    const double hl = 0.5 * length, hw = 0.5 * width;
    const std::array<Vec2, 4> local = {Vec2{hl, hw}, Vec2{-hl, hw},
                                       Vec2{-hl, -hw}, Vec2{hl, -hw}};
    std::array<Vec2, 4> out;
    for (int i = 0; i < 4; ++i)
        out[i] = pose.position() + rotate(local[i], pose.theta);
    return out;
}

bool OrientedBox::contains(const Vec2& p) const {
    const Vec2 local = rotate(p - pose.position(), -pose.theta);
    return std::abs(local.x) <= 0.5 * length && std::abs(local.y) <= 0.5 * width;
}

double OrientedBox::distance(const Vec2& p) const {
    const Vec2 local = rotate(p - pose.position(), -pose.theta);
    const double dx = std::abs(local.x) - 0.5 * length;
    const double dy = std::abs(local.y) - 0.5 * width;
    if (dx <= 0.0 && dy <= 0.0) return 0.0;
    const double cx = std::max(dx, 0.0), cy = std::max(dy, 0.0);
    return std::hypot(cx, cy);
}

std::optional<double> ray_segment_intersection(const Vec2& origin, const Vec2& dir,
                                               const Vec2& a, const Vec2& b) {
    const Vec2 seg = b - a;
    const double denom = dir.cross(seg);
    if (std::abs(denom) < 1e-15) return std::nullopt;  // parallel
    const Vec2 diff = a - origin;
    const double t = diff.cross(seg) / denom;   // along ray
    const double u = diff.cross(dir) / denom;   // along segment
    if (t < 0.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

std::optional<double> ray_disc_intersection(const Vec2& origin, const Vec2& dir,
                                            const Vec2& c, double r) {
    const Vec2 oc = origin - c;
    const double a = dir.dot(dir);
    const double b = 2.0 * oc.dot(dir);
    const double cc = oc.dot(oc) - r * r;
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    double t = (-b - sq) / (2.0 * a);
    if (t < 0.0) t = (-b + sq) / (2.0 * a);  // origin inside the disc
    if (t < 0.0) return std::nullopt;
    return t;
}

std::optional<double> ray_box_intersection(const Vec2& origin, const Vec2& dir,
                                           const OrientedBox& box) {
    const auto c = box.corners();
    std::optional<double> best;
    for (int i = 0; i < 4; ++i) {
        const auto t = ray_segment_intersection(origin, dir, c[i], c[(i + 1) % 4]);
        if (t && (!best || *t < *best)) best = t;
    }
    return best;
}

namespace {

// Projects corners onto axis and checks interval separation.
bool separated_on_axis(const std::array<Vec2, 4>& a, const std::array<Vec2, 4>& b,
                       const Vec2& axis) {
    double amin = a[0].dot(axis), amax = amin;
    double bmin = b[0].dot(axis), bmax = bmin;
    for (int i = 1; i < 4; ++i) {
        const double pa = a[i].dot(axis);
        amin = std::min(amin, pa);
        amax = std::max(amax, pa);
        const double pb = b[i].dot(axis);
        bmin = std::min(bmin, pb);
        bmax = std::max(bmax, pb);
    }
    const double eps = 1e-12;
    return amax <= bmin + eps || bmax <= amin + eps;
}

}  // namespace

bool boxes_overlap(const OrientedBox& a, const OrientedBox& b) {
    const auto ca = a.corners(), cb = b.corners();
    const std::array<Vec2, 4> axes = {
        rotate({1, 0}, a.pose.theta), rotate({0, 1}, a.pose.theta),
        rotate({1, 0}, b.pose.theta), rotate({0, 1}, b.pose.theta)};
    for (const auto& axis : axes)
        if (separated_on_axis(ca, cb, axis)) return false;
    return true;
}

}  // namespace omninav
