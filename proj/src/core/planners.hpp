#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/costmap.hpp"

namespace omninav {

struct PlannedPath {
    std::vector<Vec2> waypoints;  // world frame; first = start, last = goal
    double length = 0.0;          // euclidean polyline length, meters
    double cost = 0.0;            // planner-metric cost (length + weighted cell costs)
    std::string planner_id;
};

struct PlannerParams {
    // Weight of inflated cell costs relative to travelled distance. Zero makes
    // the grid planners pure shortest-path.
    double cost_weight = 1.0;
};

// Supercover line of sight between two cells (through their centers): true
// iff no touched cell is lethal. A segment passing exactly through a cell
// corner touches both adjacent cells.
bool line_of_sight(const Costmap& map, int ax, int ay, int bx, int by);

// Same traversal between arbitrary world points; out-of-map points block.
bool line_of_sight_world(const Costmap& map, const Vec2& a, const Vec2& b);

// 8-connected shortest-cost grid search without a heuristic, grid-aligned
// output polyline. Returns nullopt when start/goal are lethal, out of the
// map, or mutually unreachable.
std::optional<PlannedPath> dijkstra_plan(const Costmap& map, const Vec2& start,
                                         const Vec2& goal,
                                         const PlannerParams& params = {});

// Same cost metric with an admissible euclidean heuristic; path cost is
// identical to dijkstra_plan on every solvable instance.
std::optional<PlannedPath> astar_plan(const Costmap& map, const Vec2& start,
                                      const Vec2& goal,
                                      const PlannerParams& params = {});

// Any-angle search: grid A* over euclidean length with parent line-of-sight
// shortcuts. Output segments all pass line_of_sight.
std::optional<PlannedPath> theta_star_plan(const Costmap& map, const Vec2& start,
                                           const Vec2& goal,
                                           const PlannerParams& params = {});

std::optional<PlannedPath> plan_with(const std::string& planner_id, const Costmap& map,
                                     const Vec2& start, const Vec2& goal,
                                     const PlannerParams& params = {});

}  // namespace omninav
