#include "core/odometry.hpp"

namespace omninav {

Pose2D integrate_odometry(const Pose2D& prev, const BodyTwist& twist, double dt) {
    if (!(dt > 0.0))
        throw std::invalid_argument("odometry time step must be positive");
    const double c = std::cos(prev.theta), s = std::sin(prev.theta);
    Pose2D next;
    next.x = prev.x + (c * twist.vx - s * twist.vy) * dt;
    next.y = prev.y + (s * twist.vx + c * twist.vy) * dt;
    next.theta = wrap_angle(prev.theta + twist.wz * dt);
    return next;
}

OdometryState update_from_wheels(const OdometryState& state, const WheelSpeeds& speeds,
                                 const RobotGeometry& geom, double dt) {
    OdometryState next;
    next.twist = inverse_kinematics(geom, speeds);
    next.pose = integrate_odometry(state.pose, next.twist, dt);
    next.timestamp = state.timestamp + dt;
    next.source = OdometrySource::wheel_encoders;
    return next;
}

OdometryState ground_truth_odometry(const Pose2D& true_pose, const BodyTwist& true_twist,
                                    double timestamp) {
    OdometryState out;
    out.pose = true_pose;
    out.twist = true_twist;
    out.timestamp = timestamp;
    out.source = OdometrySource::ground_truth;
    return out;
}

}  // namespace omninav
