#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "core/kinematics.hpp"
#include "core/odometry.hpp"
#include "core/rng.hpp"
#include "core/world_map.hpp"

namespace omninav {

struct LidarSpec {
    Pose2D mount_pose;            // static transform, robot frame
    double fov = deg2rad(270.0);
    int beam_count = 271;         // 1 degree resolution over the default fov
    double min_range = 0.05;
    double max_range = 10.0;
    double noise_sigma = 0.01;

    void validate() const;
};

struct LidarScan {
    double timestamp = 0.0;
    std::vector<double> angles;  // beam directions in the sensor frame
    std::vector<double> ranges;  // clamped to [min_range, max_range]
    std::vector<bool> hit;       // false = no-return, range holds max_range
};

// Union of hit endpoints in the robot frame, angularly sorted.
struct MergedScan {
    double timestamp = 0.0;
    std::vector<Vec2> points;
};

struct ImuSample {
    double yaw_rate = 0.0;
    double yaw = 0.0;
    double timestamp = 0.0;
};

struct ImuSpec {
    double bias = 0.001;        // rad/s, integrated into yaw over time
    double rate_sigma = 0.005;  // rad/s
    double yaw_sigma = 0.005;   // rad
};

struct PendingCommand {
    BodyTwist twist;
    double receipt_time = 0.0;
};

struct RobotState {
    Pose2D pose;                       // ground truth
    BodyTwist twist;                   // realized body velocity
    double footprint_radius = 0.23;
    std::optional<PendingCommand> last_command;
};

// Fixed-step clock; t is always derived from the integer step count.
struct SimClock {
    int64_t step_index = 0;
    double dt = 0.05;

    double time() const { return static_cast<double>(step_index) * dt; }
};

struct SimConfig {
    double dt = 0.05;
    double act_frequency_hz = 20.0;
    double scan_frequency_hz = 10.0;
    double imu_frequency_hz = 20.0;
    double slip_sigma = 0.02;        // per-wheel multiplicative slip per act tick
    double plant_scale = 0.009375;   // true scale the motor plant applies
    double footprint_radius = 0.23;
    ImuSpec imu;
    std::vector<LidarSpec> lidars;   // empty -> default two diagonal mounts

    static std::vector<LidarSpec> default_lidars();
};

// Stores a command for the next act tick; a later command in the same period
// overwrites it.
void apply_command(RobotState& robot, const BodyTwist& cmd, double now);

struct ActResult {
    WheelSpeeds encoder_rpm;    // what the encoders report for this period
    bool had_command = false;
    bool collided = false;
};

// One actuation tick: converts the stored command to motor speeds through the
// driver's kinematics, applies per-wheel slip, realizes the motion through the
// plant's kinematics, and clears the command. Motion that would penetrate an
// obstacle or another robot is cut back to contact.
ActResult act_tick(RobotState& robot, const RobotGeometry& driver_geom,
                   const RobotGeometry& plant_geom, double slip_sigma, double dt,
                   const WorldMap& map, std::span<const RobotState* const> others,
                   Rng& rng);

// Ranges from a single LIDAR at a world-frame sensor pose. Robots are seen as
// discs; `ignore_robot` excludes the carrier from its own scan.
LidarScan raycast_scan(const WorldMap& map, std::span<const RobotState* const> robots,
                       const Pose2D& sensor_pose, const LidarSpec& spec, Rng& rng,
                       int ignore_robot = -1);

// Transforms both scans by their static mounts into the robot frame and
// returns the angularly sorted union of hit endpoints. Scans must carry the
// same timestamp.
MergedScan merge_scans(const LidarScan& scan_a, const LidarScan& scan_b,
                       const Pose2D& mount_a, const Pose2D& mount_b);

ImuSample imu_sample(const RobotState& robot, const ImuSpec& spec, double t, Rng& rng);

struct SimEvent {
    int64_t step = 0;
    int robot_id = 0;
    std::string kind;    // "collision", "command_expired"
    std::string detail;
};

// Per-robot sensor output of one world step.
struct RobotIo {
    bool acted = false;
    bool had_command = false;
    bool collided = false;
    WheelSpeeds encoder_rpm;
    bool has_scan = false;
    MergedScan scan;
    bool has_imu = false;
    ImuSample imu;
};

// Deterministic single-threaded world. Robots act and sense at configured
// integer multiples of the base step; all randomness derives from the seed.
class Simulation {
public:
    Simulation(WorldMap map, SimConfig config, RobotGeometry driver_geometry,
               uint64_t seed);

    int add_robot(const Pose2D& pose);

    void apply_command(int robot_id, const BodyTwist& cmd);

    // Advances one step and returns per-robot sensor output.
    const std::vector<RobotIo>& step();

    const SimClock& clock() const { return clock_; }
    const WorldMap& map() const { return map_; }
    const SimConfig& config() const { return config_; }
    const RobotGeometry& driver_geometry() const { return driver_geom_; }
    const RobotGeometry& plant_geometry() const { return plant_geom_; }
    size_t robot_count() const { return robots_.size(); }
    const RobotState& robot(int id) const { return robots_.at(id); }
    const std::vector<SimEvent>& events() const { return events_; }

    OdometryState ground_truth_odometry(int robot_id) const;

private:
    WorldMap map_;
    SimConfig config_;
    RobotGeometry driver_geom_;
    RobotGeometry plant_geom_;
    SimClock clock_;
    uint64_t master_seed_ = 0;
    int64_t act_every_;
    int64_t scan_every_;
    int64_t imu_every_;
    std::vector<RobotState> robots_;
    std::vector<Rng> slip_rng_;
    std::vector<Rng> scan_rng_;
    std::vector<Rng> imu_rng_;
    std::vector<RobotIo> io_;
    std::vector<SimEvent> events_;
};

}  // namespace omninav
