#include "core/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omninav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Finite sentinel for empty cells: real infinity would make the parabola
// intersection inf - inf = NaN.
constexpr double kFar = 1e20;

// 1D squared distance transform over sampled parabolas.
void dt_1d(const double* f, double* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kInf;
    z[1] = kInf;
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            const int p = v[k];
            s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
            if (s <= z[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const int p = v[k];
        d[q] = (q - p) * (q - p) + f[p];
    }
}

}  // namespace

std::vector<double> distance_transform(const std::vector<uint8_t>& obstacle,
                                       int width, int height) {
    std::vector<double> sq(static_cast<size_t>(width) * height);
    for (size_t i = 0; i < sq.size(); ++i) sq[i] = obstacle[i] ? 0.0 : kFar;

    const int n = std::max(width, height);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    for (int y = 0; y < height; ++y) {
        double* row = sq.data() + static_cast<size_t>(y) * width;
        std::copy(row, row + width, f.data());
        dt_1d(f.data(), d.data(), width, v.data(), z.data());
        std::copy(d.data(), d.data() + width, row);
    }
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) f[y] = sq[static_cast<size_t>(y) * width + x];
        dt_1d(f.data(), d.data(), height, v.data(), z.data());
        for (int y = 0; y < height; ++y) sq[static_cast<size_t>(y) * width + x] = d[y];
    }
    for (auto& val : sq) val = std::sqrt(val);
    return sq;
}

Costmap::Costmap(const WorldMap& map, const CostmapParams& params) : params_(params) {
    if (!(params_.resolution > 0.0))
        throw std::invalid_argument("costmap resolution must be positive");
    width_ = static_cast<int>(std::ceil(map.width() / params_.resolution - 1e-9));
    height_ = static_cast<int>(std::ceil(map.height() / params_.resolution - 1e-9));

    std::vector<uint8_t> mask(static_cast<size_t>(width_) * height_, 0);
    for (int cy = 0; cy < height_; ++cy) {
        for (int cx = 0; cx < width_; ++cx) {
            const Vec2 c = cell_center(cx, cy);
            for (const auto& m : map.machines()) {
                if (m.box.contains(c)) {
                    mask[index(cx, cy)] = 1;
                    break;
                }
            }
        }
    }
    distance_ = distance_transform(mask, width_, height_);
    for (auto& d : distance_) d *= params_.resolution;

    // Field borders act as obstacles too; fold the analytic wall distance in.
    for (int cy = 0; cy < height_; ++cy) {
        for (int cx = 0; cx < width_; ++cx) {
            const Vec2 c = cell_center(cx, cy);
            const double border = std::min(std::min(c.x, map.width() - c.x),
                                           std::min(c.y, map.height() - c.y));
            double& d = distance_[index(cx, cy)];
            d = std::min(d, std::max(border, 0.0));
        }
    }
    apply_inflation();
}

Costmap::Costmap(int width, int height, const CostmapParams& params,
                 const std::vector<uint8_t>& obstacle_mask)
    : params_(params), width_(width), height_(height) {
    if (!(params_.resolution > 0.0))
        throw std::invalid_argument("costmap resolution must be positive");
    if (obstacle_mask.size() != static_cast<size_t>(width) * height)
        throw std::invalid_argument("obstacle mask size mismatch");
    distance_ = distance_transform(obstacle_mask, width_, height_);
    for (auto& d : distance_) d *= params_.resolution;
    apply_inflation();
}

void Costmap::apply_inflation() {
    cost_.resize(distance_.size());
    const double k = std::log(static_cast<double>(kMaxInflatedCost)) /
                     std::max(params_.inflation_radius - params_.robot_radius, 1e-9);
    for (size_t i = 0; i < distance_.size(); ++i) {
        const double d = distance_[i];
        if (d <= params_.robot_radius) {
            cost_[i] = kLethalCost;
        } else if (d <= params_.inflation_radius) {
            const double c = kMaxInflatedCost * std::exp(-k * (d - params_.robot_radius));
            cost_[i] = static_cast<uint8_t>(std::max(1.0, std::min(253.0, c)));
        } else {
            cost_[i] = 0;
        }
    }
}

bool Costmap::world_to_cell(const Vec2& p, int& cx, int& cy) const {
    cx = static_cast<int>(std::floor(p.x / params_.resolution));
    cy = static_cast<int>(std::floor(p.y / params_.resolution));
    return in_bounds(cx, cy);
}

Vec2 Costmap::cell_center(int cx, int cy) const {
    return {(cx + 0.5) * params_.resolution, (cy + 0.5) * params_.resolution};
}

uint8_t Costmap::cost_at_world(const Vec2& p) const {
    int cx, cy;
    if (!world_to_cell(p, cx, cy)) return kLethalCost;
    return cost(cx, cy);
}

bool Costmap::lethal_at_world(const Vec2& p) const {
    return cost_at_world(p) == kLethalCost;
}

}  // namespace omninav
