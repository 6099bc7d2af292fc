#pragma once

#include "core/common.hpp"
#include "core/kinematics.hpp"

namespace omninav {

enum class OdometrySource { wheel_encoders, ground_truth };

struct OdometryState {
    Pose2D pose;
    BodyTwist twist;                 // last body-frame velocity
    double timestamp = 0.0;          // seconds, simulation clock
    OdometrySource source = OdometrySource::wheel_encoders;
};

// One first-order Euler step: pose += T_m(theta_prev) * twist * dt.
// The rotation is evaluated at the previous heading; heading is renormalized.
// Throws std::invalid_argument for dt <= 0.
Pose2D integrate_odometry(const Pose2D& prev, const BodyTwist& twist, double dt);

// Dead-reckoning update from measured motor speeds: inverse kinematics, then
// pose integration. Timestamp advances by dt.
OdometryState update_from_wheels(const OdometryState& state, const WheelSpeeds& speeds,
                                 const RobotGeometry& geom, double dt);

// Direct pose readout from the simulator (the GPS-style alternative source).
OdometryState ground_truth_odometry(const Pose2D& true_pose, const BodyTwist& true_twist,
                                    double timestamp);

}  // namespace omninav
