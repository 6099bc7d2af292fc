#include "core/kinematics.hpp"

#include <cmath>

namespace omninav {

namespace {

double det3(const Mat3& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

Mat3 invert3(const Mat3& m, double det) {
    const double inv_det = 1.0 / det;
    Mat3 r;
    r[0][0] = (m[1][1] * m[2][2] - m[1][2] * m[2][1]) * inv_det;
    r[0][1] = (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv_det;
    r[0][2] = (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv_det;
    r[1][0] = (m[1][2] * m[2][0] - m[1][0] * m[2][2]) * inv_det;
    r[1][1] = (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv_det;
    r[1][2] = (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv_det;
    r[2][0] = (m[1][0] * m[2][1] - m[1][1] * m[2][0]) * inv_det;
    r[2][1] = (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv_det;
    r[2][2] = (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv_det;
    return r;
}

}  // namespace

RobotGeometry::RobotGeometry(const std::array<double, 3>& wheel_angles_rad,
                             const std::array<double, 3>& wheel_distances_m,
                             double wheel_radius_m,
                             double gear_ratio,
                             double scale_factor)
    : wheel_angles_(wheel_angles_rad),
      wheel_distances_(wheel_distances_m),
      wheel_radius_(wheel_radius_m),
      gear_ratio_(gear_ratio),
      scale_factor_(scale_factor) {
    if (!(wheel_radius_ > 0.0))
        throw std::invalid_argument("wheel radius must be positive");
    if (!(gear_ratio_ > 0.0))
        throw std::invalid_argument("gear ratio must be positive");
    if (!(scale_factor_ > 0.0))
        throw std::invalid_argument("scale factor must be positive");
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(wheel_angles_[i]))
            throw std::invalid_argument("wheel angle must be finite");
        if (!(wheel_distances_[i] > 0.0))
            throw std::invalid_argument("wheel distance must be positive");
    }

    for (int i = 0; i < 3; ++i) {
        k_[i][0] = -std::sin(wheel_angles_[i]);
        k_[i][1] = std::cos(wheel_angles_[i]);
        k_[i][2] = wheel_distances_[i];
    }
    const double det = det3(k_);
    if (std::abs(det) <= 1e-9)
        throw std::invalid_argument("kinematic matrix is singular");
    k_inv_ = invert3(k_, det);
}

RobotGeometry RobotGeometry::default_geometry() {
    return RobotGeometry({deg2rad(60.0), deg2rad(180.0), deg2rad(300.0)},
                         {0.18, 0.18, 0.18}, 0.04);
}

RobotGeometry RobotGeometry::with_scale_factor(double scale_factor) const {
    return RobotGeometry(wheel_angles_, wheel_distances_, wheel_radius_,
                         gear_ratio_, scale_factor);
}

WheelSpeeds forward_kinematics(const RobotGeometry& geom, const BodyTwist& cmd) {
    // rim speed -> motor rpm: 1/r, rad/s -> rpm, gearbox, empirical scale
    const double chain = (1.0 / geom.wheel_radius()) * (60.0 / kTwoPi) *
                         geom.gear_ratio() * geom.scale_factor();
    const Mat3& k = geom.kinematic_matrix();
    WheelSpeeds out;
    out.m1 = (k[0][0] * cmd.vx + k[0][1] * cmd.vy + k[0][2] * cmd.wz) * chain;
    out.m2 = (k[1][0] * cmd.vx + k[1][1] * cmd.vy + k[1][2] * cmd.wz) * chain;
    out.m3 = (k[2][0] * cmd.vx + k[2][1] * cmd.vy + k[2][2] * cmd.wz) * chain;
    return out;
}

BodyTwist inverse_kinematics(const RobotGeometry& geom, const WheelSpeeds& speeds) {
    const double chain = geom.wheel_radius() * (kTwoPi / 60.0) /
                         geom.gear_ratio() / geom.scale_factor();
    const Mat3& ki = geom.kinematic_matrix_inverse();
    BodyTwist out;
    out.vx = (ki[0][0] * speeds.m1 + ki[0][1] * speeds.m2 + ki[0][2] * speeds.m3) * chain;
    out.vy = (ki[1][0] * speeds.m1 + ki[1][1] * speeds.m2 + ki[1][2] * speeds.m3) * chain;
    out.wz = (ki[2][0] * speeds.m1 + ki[2][1] * speeds.m2 + ki[2][2] * speeds.m3) * chain;
    return out;
}

}  // namespace omninav
