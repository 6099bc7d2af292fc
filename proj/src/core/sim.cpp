#include "core/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace omninav {

void LidarSpec::validate() const {
    if (beam_count < 2) throw std::invalid_argument("lidar needs at least 2 beams");
    if (!(min_range > 0.0) || !(min_range < max_range))
        throw std::invalid_argument("lidar range bounds invalid");
    if (!(fov > 0.0)) throw std::invalid_argument("lidar fov must be positive");
}

std::vector<LidarSpec> SimConfig::default_lidars() {
    LidarSpec front;
    front.mount_pose = {0.12, 0.10, deg2rad(45.0)};
    LidarSpec back;
    back.mount_pose = {-0.12, -0.10, deg2rad(-135.0)};
    return {front, back};
}

void apply_command(RobotState& robot, const BodyTwist& cmd, double now) {
    if (!cmd.finite()) throw std::invalid_argument("command must be finite");
    robot.last_command = PendingCommand{cmd, now};
}

namespace {

bool position_free(const Vec2& p, double r, const WorldMap& map,
                   std::span<const RobotState* const> others) {
    if (map.disc_collides(p, r)) return false;
    for (const RobotState* other : others) {
        const double min_dist = r + other->footprint_radius;
        if ((p - other->pose.position()).squared_norm() + 1e-12 < min_dist * min_dist)
            return false;
    }
    return true;
}

}  // namespace

ActResult act_tick(RobotState& robot, const RobotGeometry& driver_geom,
                   const RobotGeometry& plant_geom, double slip_sigma, double dt,
                   const WorldMap& map, std::span<const RobotState* const> others,
                   Rng& rng) {
    ActResult result;
    if (!robot.last_command) {
        robot.twist = BodyTwist{};
        return result;
    }
    result.had_command = true;

    // Driver side: command -> motor rpm. Encoders report the commanded rpm;
    // slip happens between the wheel and the ground.
    result.encoder_rpm = forward_kinematics(driver_geom, robot.last_command->twist);
    WheelSpeeds ground_rpm = result.encoder_rpm;
    if (slip_sigma > 0.0) {
        ground_rpm.m1 *= 1.0 + rng.normal(0.0, slip_sigma);
        ground_rpm.m2 *= 1.0 + rng.normal(0.0, slip_sigma);
        ground_rpm.m3 *= 1.0 + rng.normal(0.0, slip_sigma);
    }
    const BodyTwist true_twist = inverse_kinematics(plant_geom, ground_rpm);

    const Pose2D start = robot.pose;
    Pose2D target = integrate_odometry(start, true_twist, dt);

    const Vec2 p0 = start.position();
    const Vec2 p1 = target.position();
    if (!position_free(p1, robot.footprint_radius, map, others)) {
        result.collided = true;
        // Bisect along the motion segment for the latest free point. Heading
        // change is never blocked.
        double lo = 0.0, hi = 1.0;
        if (!position_free(p0, robot.footprint_radius, map, others)) {
            lo = hi = 0.0;  // already at contact; do not translate
        }
        for (int iter = 0; iter < 60 && hi > lo; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const Vec2 pm = p0 + (p1 - p0) * mid;
            if (position_free(pm, robot.footprint_radius, map, others))
                lo = mid;
            else
                hi = mid;
        }
        target.x = p0.x + (p1.x - p0.x) * lo;
        target.y = p0.y + (p1.y - p0.y) * lo;
    }

    robot.pose = target;
    robot.twist = true_twist;
    robot.last_command.reset();
    return result;
}

LidarScan raycast_scan(const WorldMap& map, std::span<const RobotState* const> robots,
                       const Pose2D& sensor_pose, const LidarSpec& spec, Rng& rng,
                       int ignore_robot) {
    spec.validate();
    LidarScan scan;
    scan.angles.resize(spec.beam_count);
    scan.ranges.resize(spec.beam_count);
    scan.hit.resize(spec.beam_count);

    const Vec2 origin = sensor_pose.position();
    const double w = map.width(), h = map.height();
    const Vec2 wall[4] = {{0, 0}, {w, 0}, {w, h}, {0, h}};

    for (int k = 0; k < spec.beam_count; ++k) {
        const double beam_angle =
            -0.5 * spec.fov + spec.fov * static_cast<double>(k) / (spec.beam_count - 1);
        scan.angles[k] = beam_angle;
        const double world_angle = sensor_pose.theta + beam_angle;
        const Vec2 dir{std::cos(world_angle), std::sin(world_angle)};

        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < 4; ++i) {
            if (auto t = ray_segment_intersection(origin, dir, wall[i], wall[(i + 1) % 4]))
                best = std::min(best, *t);
        }
        for (const auto& m : map.machines()) {
            if (auto t = ray_box_intersection(origin, dir, m.box))
                best = std::min(best, *t);
        }
        for (size_t i = 0; i < robots.size(); ++i) {
            if (static_cast<int>(i) == ignore_robot) continue;
            if (auto t = ray_disc_intersection(origin, dir, robots[i]->pose.position(),
                                               robots[i]->footprint_radius))
                best = std::min(best, *t);
        }

        if (!std::isfinite(best) || best > spec.max_range) {
            scan.ranges[k] = spec.max_range;
            scan.hit[k] = false;
        } else {
            double range = std::max(best, spec.min_range);
            if (spec.noise_sigma > 0.0) range += rng.normal(0.0, spec.noise_sigma);
            scan.ranges[k] = std::clamp(range, spec.min_range, spec.max_range);
            scan.hit[k] = true;
        }
    }
    return scan;
}

MergedScan merge_scans(const LidarScan& scan_a, const LidarScan& scan_b,
                       const Pose2D& mount_a, const Pose2D& mount_b) {
    if (scan_a.timestamp != scan_b.timestamp)
        throw std::invalid_argument("scan timestamps differ");
    MergedScan merged;
    merged.timestamp = scan_a.timestamp;
    auto add = [&merged](const LidarScan& scan, const Pose2D& mount) {
        for (size_t k = 0; k < scan.ranges.size(); ++k) {
            if (!scan.hit[k]) continue;
            const Vec2 local{scan.ranges[k] * std::cos(scan.angles[k]),
                             scan.ranges[k] * std::sin(scan.angles[k])};
            merged.points.push_back(mount.position() + rotate(local, mount.theta));
        }
    };
    add(scan_a, mount_a);
    add(scan_b, mount_b);
    std::sort(merged.points.begin(), merged.points.end(),
              [](const Vec2& a, const Vec2& b) {
                  const double aa = std::atan2(a.y, a.x), ab = std::atan2(b.y, b.x);
                  if (aa != ab) return aa < ab;
                  if (a.x != b.x) return a.x < b.x;
                  return a.y < b.y;
              });
    return merged;
}

ImuSample imu_sample(const RobotState& robot, const ImuSpec& spec, double t, Rng& rng) {
    ImuSample s;
    s.timestamp = t;
    s.yaw = wrap_angle(robot.pose.theta + spec.bias * t + rng.normal(0.0, spec.yaw_sigma));
    s.yaw_rate = robot.twist.wz + spec.bias + rng.normal(0.0, spec.rate_sigma);
    return s;
}

namespace {

int64_t period_steps(double frequency_hz, double dt, const char* what) {
    if (!(frequency_hz > 0.0)) throw std::invalid_argument(std::string(what) + " frequency must be positive");
    const double steps = 1.0 / (frequency_hz * dt);
    const int64_t n = std::llround(steps);
    if (n < 1 || std::abs(steps - static_cast<double>(n)) > 1e-6)
        throw std::invalid_argument(std::string(what) +
                                    " frequency must divide the step rate");
    return n;
}

}  // namespace

Simulation::Simulation(WorldMap map, SimConfig config, RobotGeometry driver_geometry,
                       uint64_t seed)
    : map_(std::move(map)),
      config_(std::move(config)),
      driver_geom_(driver_geometry),
      plant_geom_(driver_geometry.with_scale_factor(config_.plant_scale)),
      clock_{0, config_.dt} {
    if (!(config_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (config_.lidars.empty()) config_.lidars = SimConfig::default_lidars();
    for (const auto& l : config_.lidars) l.validate();
    act_every_ = period_steps(config_.act_frequency_hz, config_.dt, "act");
    scan_every_ = period_steps(config_.scan_frequency_hz, config_.dt, "scan");
    imu_every_ = period_steps(config_.imu_frequency_hz, config_.dt, "imu");
    master_seed_ = seed;
}

int Simulation::add_robot(const Pose2D& pose) {
    RobotState state;
    state.pose = pose;
    state.pose.normalize();
    state.footprint_radius = config_.footprint_radius;
    std::vector<const RobotState*> others;
    for (const auto& r : robots_) others.push_back(&r);
    if (!map_.inside_field(pose.position(), state.footprint_radius))
        throw std::invalid_argument("robot spawn outside the field");
    if (map_.disc_collides(pose.position(), state.footprint_radius))
        throw std::invalid_argument("robot spawn collides with an obstacle");
    for (const RobotState* other : others) {
        const double min_dist = state.footprint_radius + other->footprint_radius;
        if ((pose.position() - other->pose.position()).norm() < min_dist)
            throw std::invalid_argument("robot spawn collides with another robot");
    }
    const int id = static_cast<int>(robots_.size());
    robots_.push_back(state);
    slip_rng_.push_back(Rng::substream(master_seed_, "slip", id));
    scan_rng_.push_back(Rng::substream(master_seed_, "scan", id));
    imu_rng_.push_back(Rng::substream(master_seed_, "imu", id));
    io_.emplace_back();
    return id;
}

void Simulation::apply_command(int robot_id, const BodyTwist& cmd) {
    omninav::apply_command(robots_.at(robot_id), cmd, clock_.time());
}

const std::vector<RobotIo>& Simulation::step() {
    clock_.step_index += 1;
    const double t = clock_.time();

    for (size_t i = 0; i < robots_.size(); ++i) {
        RobotIo& io = io_[i];
        io = RobotIo{};
        if (clock_.step_index % act_every_ != 0) continue;
        io.acted = true;
        const bool had_command = robots_[i].last_command.has_value();
        const BodyTwist& prev = robots_[i].twist;
        const bool was_moving =
            std::abs(prev.vx) + std::abs(prev.vy) + std::abs(prev.wz) > 1e-12;
        std::vector<const RobotState*> others;
        for (size_t j = 0; j < robots_.size(); ++j)
            if (j != i) others.push_back(&robots_[j]);
        const double act_dt = static_cast<double>(act_every_) * config_.dt;
        ActResult result = act_tick(robots_[i], driver_geom_, plant_geom_,
                                    config_.slip_sigma, act_dt, map_, others,
                                    slip_rng_[i]);
        io.had_command = result.had_command;
        io.collided = result.collided;
        io.encoder_rpm = result.encoder_rpm;
        if (!had_command && was_moving)
            events_.push_back({clock_.step_index, static_cast<int>(i),
                               "command_expired", "no command in act period"});
        if (result.collided)
            events_.push_back({clock_.step_index, static_cast<int>(i), "collision",
                               "motion cut back to contact"});
    }

    for (size_t i = 0; i < robots_.size(); ++i) {
        RobotIo& io = io_[i];
        if (clock_.step_index % scan_every_ == 0 && config_.lidars.size() >= 2) {
            std::vector<const RobotState*> all;
            for (const auto& r : robots_) all.push_back(&r);
            const Pose2D sensor_a = robots_[i].pose.compose(config_.lidars[0].mount_pose);
            const Pose2D sensor_b = robots_[i].pose.compose(config_.lidars[1].mount_pose);
            LidarScan a = raycast_scan(map_, all, sensor_a, config_.lidars[0],
                                       scan_rng_[i], static_cast<int>(i));
            LidarScan b = raycast_scan(map_, all, sensor_b, config_.lidars[1],
                                       scan_rng_[i], static_cast<int>(i));
            a.timestamp = t;
            b.timestamp = t;
            io.scan = merge_scans(a, b, config_.lidars[0].mount_pose,
                                  config_.lidars[1].mount_pose);
            io.has_scan = true;
        }
        if (clock_.step_index % imu_every_ == 0) {
            io.imu = imu_sample(robots_[i], config_.imu, t, imu_rng_[i]);
            io.has_imu = true;
        }
    }
    return io_;
}

OdometryState Simulation::ground_truth_odometry(int robot_id) const {
    const RobotState& r = robots_.at(robot_id);
    return omninav::ground_truth_odometry(r.pose, r.twist, clock_.time());
}

}  // namespace omninav
