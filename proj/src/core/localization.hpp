#pragma once

#include <vector>

#include "core/common.hpp"
#include "core/kinematics.hpp"
#include "core/rng.hpp"
#include "core/sim.hpp"
#include "core/world_map.hpp"

namespace omninav {

struct Particle {
    Pose2D pose;
    double weight = 0.0;
};

// Motion noise for the omnidirectional prediction step: per-axis sigma scales
// with the displacement along that axis plus a floor that keeps the cloud
// alive when the robot stands still.
struct PfMotionNoise {
    double trans_scale = 0.15;
    double trans_floor = 0.003;  // m
    double rot_scale = 0.10;
    double rot_floor = 0.002;    // rad
};

// Distance-to-nearest-obstacle grid with the mixture weights of the scan
// likelihood model.
class LikelihoodField {
public:
    static LikelihoodField build(const WorldMap& map, double resolution = 0.05);

    double sigma_hit = 0.08;
    double z_hit = 0.95;
    double z_rand = 0.05;
    double max_range = 10.0;

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }

    // Distance (m) from a world point to the nearest obstacle; +inf outside
    // the grid.
    double distance_at(const Vec2& p) const;

    // Mixture likelihood of a single scan endpoint.
    double point_probability(const Vec2& p) const;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.05;
    std::vector<double> distance_;
};

// Uniform cloud in a +-pos_spread / +-yaw_spread box around the center.
std::vector<Particle> pf_init(int count, const Pose2D& center, double pos_spread,
                              double yaw_spread, Rng& rng);

// Moves each particle by odom_delta expressed in its own frame, with
// independent Gaussian noise per axis.
void pf_predict(std::vector<Particle>& particles, const Pose2D& odom_delta,
                const PfMotionNoise& noise, Rng& rng);

// Scan likelihood weight update over every `subsample`-th point of the merged
// scan. Returns true if the weights degenerated and were reset to uniform.
bool pf_update(std::vector<Particle>& particles, const MergedScan& scan,
               const LikelihoodField& field, int subsample = 5);

double pf_effective_sample_size(const std::vector<Particle>& particles);

// Systematic (low-variance) resampling with a single random offset; output
// weights are uniform and the particle count is preserved.
void pf_systematic_resample(std::vector<Particle>& particles, Rng& rng);

// Gated resampling: runs pf_systematic_resample only when the effective
// sample size drops below half the particle count. Returns true if it ran.
bool pf_resample(std::vector<Particle>& particles, Rng& rng);

struct PoseEstimate {
    Pose2D pose;
    Mat3 covariance{};
};

// Weighted mean with a circular mean for the heading, plus the 3x3 sample
// covariance with wrapped heading residuals.
PoseEstimate pf_estimate(const std::vector<Particle>& particles);

struct EkfState {
    Pose2D mean;
    Mat3 covariance{};
};

Mat3 diagonal_matrix(double a, double b, double c);

// Propagates mean and covariance through the odometry motion model;
// covariance becomes F P F^T + Q.
EkfState ekf_predict(const EkfState& state, const BodyTwist& twist, double dt,
                     const Mat3& process_noise);

// Scalar heading update with wrapped innovation, Joseph-form covariance.
EkfState ekf_update_yaw(const EkfState& state, const ImuSample& imu,
                        double meas_noise);

// Per-robot estimator: an EKF integrates wheel odometry and IMU yaw in the
// odometry frame; the particle filter anchors it to the map by maintaining a
// map->odom correction transform updated on every scan.
class Localizer {
public:
    struct Params {
        int particle_count = 1000;
        double init_pos_spread = 0.5;
        double init_yaw_spread = 0.3;
        PfMotionNoise motion_noise;
        int scan_subsample = 5;
        double imu_yaw_noise = 0.005;  // rad, measurement sigma
        double process_xy = 1e-4;      // per-predict covariance inflow
        double process_theta = 1e-4;
    };

    Localizer(const LikelihoodField* field, const Params& params, Rng rng);

    // Re-seeds the cloud around a pose and aligns the odometry frame with it.
    void reset(const Pose2D& pose);

    // Wheel-odometry twist over one control period.
    void predict(const BodyTwist& twist, double dt);

    void on_imu(const ImuSample& imu);

    // Scan update: PF predict by the accumulated odometry delta, weight,
    // resample, and refresh the map->odom correction.
    void on_scan(const MergedScan& scan);

    // Fused map-frame pose: correction applied to the EKF pose.
    Pose2D estimate() const;

    const std::vector<Particle>& particles() const { return particles_; }
    const EkfState& ekf() const { return ekf_; }
    const PoseEstimate& last_pf_estimate() const { return last_pf_estimate_; }
    double covariance_trace() const;
    bool degenerate_last_update() const { return degenerate_; }

private:
    const LikelihoodField* field_;
    Params params_;
    Rng rng_;
    std::vector<Particle> particles_;
    EkfState ekf_;
    Pose2D odom_pose_;           // dead-reckoned pose in the odometry frame
    Pose2D odom_at_last_scan_;
    Pose2D correction_;          // map->odom transform
    PoseEstimate last_pf_estimate_;
    bool degenerate_ = false;
};

}  // namespace omninav
