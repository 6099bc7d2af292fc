#pragma once

#include <string>
#include <vector>

#include "core/planners.hpp"
#include "core/world_map.hpp"

namespace omninav {

// Number of straight segments after merging collinear runs.
int polyline_segments(const std::vector<Vec2>& waypoints);

struct PlanDemoEntry {
    std::string planner_id;
    bool solved = false;
    PlannedPath path;
    int segments = 0;
};

struct PlanDemoResult {
    Pose2D start;  // theta unused
    Pose2D goal;
    std::vector<PlanDemoEntry> entries;  // navfn, astar, thetastar order
    std::string report;                  // human-readable comparison
    std::string svg;
};

// Plans start -> goal on the map with all three planners and renders them on
// one figure. The map file may carry "start": [x, y] and "goal": [x, y]
// entries; missing ones fall back to opposite field corners. `focus` names
// the planner the report leads with ("navfn", "astar" or "thetastar"; empty
// means thetastar).
PlanDemoResult run_plan_demo(const std::string& map_path, const std::string& focus);

}  // namespace omninav
