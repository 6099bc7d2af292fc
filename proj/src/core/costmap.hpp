#pragma once

#include <cstdint>
#include <vector>

#include "core/world_map.hpp"

namespace omninav {

struct CostmapParams {
    double resolution = 0.05;       // m per cell
    double robot_radius = 0.23;     // lethal band half-width around obstacles
    double inflation_radius = 0.6;  // cost decays to 1 here
};

inline constexpr uint8_t kLethalCost = 255;
inline constexpr uint8_t kMaxInflatedCost = 253;

// Exact Euclidean distance transform (Felzenszwalb/Huttenlocher). `obstacle`
// is row-major width*height; returns per-cell distance to the nearest
// obstacle cell in cell units.
std::vector<double> distance_transform(const std::vector<uint8_t>& obstacle,
                                       int width, int height);

// Inflated occupancy grid over the map: cells within robot_radius of an
// obstacle (machine or field border) are lethal; beyond that the cost decays
// exponentially, reaching 1 at the inflation radius.
class Costmap {
public:
    Costmap(const WorldMap& map, const CostmapParams& params);

    // Grid-only constructor for synthetic test grids: lethal cells from a
    // boolean mask, inflation applied the same way.
    Costmap(int width, int height, const CostmapParams& params,
            const std::vector<uint8_t>& obstacle_mask);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return params_.resolution; }
    const CostmapParams& params() const { return params_; }

    uint8_t cost(int cx, int cy) const { return cost_[index(cx, cy)]; }
    bool lethal(int cx, int cy) const { return cost_[index(cx, cy)] == kLethalCost; }
    bool in_bounds(int cx, int cy) const {
        return cx >= 0 && cx < width_ && cy >= 0 && cy < height_;
    }

    // Distance from the cell center to the nearest obstacle, meters.
    double obstacle_distance(int cx, int cy) const { return distance_[index(cx, cy)]; }

    // World <-> grid. Cell centers sit at (c + 0.5) * resolution.
    bool world_to_cell(const Vec2& p, int& cx, int& cy) const;
    Vec2 cell_center(int cx, int cy) const;

    uint8_t cost_at_world(const Vec2& p) const;  // lethal if out of bounds
    bool lethal_at_world(const Vec2& p) const;

private:
    void apply_inflation();
    size_t index(int cx, int cy) const { return static_cast<size_t>(cy) * width_ + cx; }

    CostmapParams params_;
    int width_ = 0;
    int height_ = 0;
    std::vector<uint8_t> cost_;
    std::vector<double> distance_;
};

}  // namespace omninav
