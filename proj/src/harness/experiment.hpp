#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "core/costmap.hpp"
#include "core/navigator.hpp"
#include "core/sim.hpp"
#include "core/world_map.hpp"

namespace omninav {

// Everything a `run` invocation needs, loadable from a JSON file. Field
// groups mirror the module configs so one file drives the whole stack.
struct ExperimentConfig {
    std::string map_path;              // empty: built-in default field
    int robot_count = 1;               // 1 or 3
    int paths_per_experiment = 5;
    int waypoints_per_path = 4;
    int repetitions = 5;
    uint64_t seed = 42;
    std::string out_dir = "out";
    double leg_timeout = 120.0;        // s
    double waypoint_standoff = 0.45;   // m off a machine face
    double waypoint_separation = 0.8;  // m between waypoints of one path
    double trajectory_sample_hz = 5.0;
    double obstacle_pos_noise = 0.02;  // m, sigma on perceived robot positions

    // Driver-side drive geometry.
    std::array<double, 3> wheel_angles_deg = {60.0, 180.0, 300.0};
    std::array<double, 3> wheel_distances = {0.18, 0.18, 0.18};
    double wheel_radius = 0.04;
    double gear_ratio = 16.0;
    double scale_factor = 0.009375;

    SimConfig sim;
    CostmapParams costmap;
    NavigatorParams navigator;

    void validate() const;  // throws std::invalid_argument
    RobotGeometry driver_geometry() const;
    WorldMap load_map() const;
    std::string experiment_id() const { return robot_count > 1 ? "E2" : "E1"; }
};

// JSON round trip. load overlays the file onto defaults; missing keys keep
// their default value, type mismatches throw.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text);
std::string experiment_config_to_json(const ExperimentConfig& cfg);

struct TrajectorySample {
    double t = 0.0;
    Pose2D truth;
    Pose2D estimate;
};

struct LegRecord {
    int leg = 0;  // 1-based; leg i ends at waypoint i
    double t_start = 0.0;
    double t_end = 0.0;
    bool reached = false;

    double duration() const { return t_end - t_start; }
};

// One robot's run over one path repetition.
struct RunRecord {
    std::string experiment_id;
    int path_id = 0;
    int repetition = 0;
    int robot_id = 0;
    std::vector<LegRecord> legs;
    std::vector<bool> waypoint_reached;  // index 0 is the spawn point
    int collision_count = 0;             // contact episodes, any cause
    int machine_collision_count = 0;     // subset against the static map
    int recovery_count = 0;
    std::vector<TrajectorySample> trajectory;

    double total_time() const;
};

struct EventRow {
    double t = 0.0;
    int robot = 0;
    std::string kind;
    std::string detail;
};

struct ExperimentResult {
    std::vector<RunRecord> records;
    std::vector<EventRow> events;
    // Waypoints actually used: [robot][path][waypoint].
    std::vector<std::vector<std::vector<Pose2D>>> waypoints;
};

// Poses at `standoff` from uniformly chosen machine side centers, heading
// into the machine; lethal cells and points closer than `separation` to an
// earlier waypoint of the same path are resampled. Throws std::runtime_error
// once 1000 attempts are spent.
std::vector<Pose2D> generate_waypoints(const WorldMap& map, const Costmap& costmap,
                                       Rng& rng, int n, double standoff,
                                       double separation);

// Runs the full protocol (paths x repetitions, robot_count robots per world)
// and writes timings.csv, trajectories.csv, events.csv and per-path SVGs to
// cfg.out_dir. Returns the records it wrote.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct CalibrationRow {
    double distance = 0.0;   // m
    double speed = 0.0;      // m/s commanded
    double time = 0.0;       // s observed on the reference robot
};

// Drives the plant with scale factor 1 over each row's distance at its
// commanded speed on an empty field and returns the mean ratio of simulated
// to reference travel time. Throws std::invalid_argument on an empty table
// or a non-positive row.
double calibrate_scale_factor(const ExperimentConfig& cfg,
                              const std::vector<CalibrationRow>& reference);

// Same bench runs with the configured scale factor; fills in row times.
std::vector<CalibrationRow> emit_reference(const ExperimentConfig& cfg,
                                           std::vector<CalibrationRow> rows);

struct PathSummary {
    int path_id = 0;
    int runs = 0;
    double mean_total = 0.0;
    double min_total = 0.0;
    double max_total = 0.0;
    int failed_legs = 0;
    int recoveries = 0;
};

struct RobotTotal {
    int robot_id = 0;
    double total = 0.0;
};

struct Summary {
    std::vector<PathSummary> paths;
    std::vector<RobotTotal> robots;
    double grand_total = 0.0;
    int failed_legs = 0;
    int recoveries = 0;
};

Summary summarize(const std::vector<RunRecord>& records);  // throws on empty

// Text table; with a baseline, appends per-robot total-time ratios (matching
// robot ids divide directly, others divide by the baseline per-robot mean).
std::string summary_table(const Summary& summary, const Summary* baseline);

}  // namespace omninav
