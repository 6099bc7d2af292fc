#pragma once

#include <array>

#include "core/common.hpp"

namespace omninav {

// Rotational speeds of the three drive motors, in rpm.
struct WheelSpeeds {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;

    bool finite() const {
        return std::isfinite(m1) && std::isfinite(m2) && std::isfinite(m3);
    }
};

using Mat3 = std::array<std::array<double, 3>, 3>;

// Geometry and unit-chain constants of the three-omniwheel drive.
//
// The kinematic matrix K maps a body twist to wheel rim speeds; the full
// motor-speed chain additionally applies the wheel radius, the rad/s -> rpm
// conversion, the gearbox reduction and an empirical scale factor. K and its
// inverse are computed once at construction; construction throws
// std::invalid_argument on degenerate geometry.
class RobotGeometry {
public:
    RobotGeometry(const std::array<double, 3>& wheel_angles_rad,
                  const std::array<double, 3>& wheel_distances_m,
                  double wheel_radius_m,
                  double gear_ratio = 16.0,
                  double scale_factor = 0.009375);

    // Uniform wheel placement at 60/180/300 degrees, R = 0.18 m, r = 0.04 m.
    static RobotGeometry default_geometry();

    const std::array<double, 3>& wheel_angles() const { return wheel_angles_; }
    const std::array<double, 3>& wheel_distances() const { return wheel_distances_; }
    double wheel_radius() const { return wheel_radius_; }
    double gear_ratio() const { return gear_ratio_; }
    double scale_factor() const { return scale_factor_; }

    const Mat3& kinematic_matrix() const { return k_; }
    const Mat3& kinematic_matrix_inverse() const { return k_inv_; }

    // Returns a copy with a different scale factor (used by calibration and
    // by the motor plant, which may carry its own true scale).
    RobotGeometry with_scale_factor(double scale_factor) const;

private:
    std::array<double, 3> wheel_angles_;
    std::array<double, 3> wheel_distances_;
    double wheel_radius_;
    double gear_ratio_;
    double scale_factor_;
    Mat3 k_;
    Mat3 k_inv_;
};

// Motor speeds (rpm) realizing a body twist.
WheelSpeeds forward_kinematics(const RobotGeometry& geom, const BodyTwist& cmd);

// Body twist recovered from measured motor speeds (rpm). Exact algebraic
// inverse of forward_kinematics.
BodyTwist inverse_kinematics(const RobotGeometry& geom, const WheelSpeeds& speeds);

}  // namespace omninav
