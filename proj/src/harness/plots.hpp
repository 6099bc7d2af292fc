#pragma once

#include <string>
#include <vector>

#include "harness/experiment.hpp"

namespace omninav {

// One figure for one path id: field outline, machines, each robot's
// waypoints, and a polyline per robot per repetition (one color per robot,
// repetitions in increasingly lighter shades). Records with no samples just
// leave the map.
std::string render_path_svg(const WorldMap& map,
                            const std::vector<std::vector<Pose2D>>& waypoints_per_robot,
                            const std::vector<RunRecord>& records);

// Writes path_<i>.svg for every path id present in the result.
void write_path_plots(const std::string& out_dir, const WorldMap& map,
                      const ExperimentResult& result);

}  // namespace omninav
