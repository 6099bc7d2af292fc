#include "core/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "core/costmap.hpp"
#include "core/odometry.hpp"

namespace omninav {

LikelihoodField LikelihoodField::build(const WorldMap& map, double resolution) {
    if (!(resolution > 0.0))
        throw std::invalid_argument("likelihood field resolution must be positive");
    LikelihoodField field;
    field.resolution_ = resolution;
    field.width_ = static_cast<int>(std::ceil(map.width() / resolution - 1e-9));
    field.height_ = static_cast<int>(std::ceil(map.height() / resolution - 1e-9));

    std::vector<uint8_t> mask(static_cast<size_t>(field.width_) * field.height_, 0);
    for (int cy = 0; cy < field.height_; ++cy) {
        for (int cx = 0; cx < field.width_; ++cx) {
            const Vec2 c{(cx + 0.5) * resolution, (cy + 0.5) * resolution};
            for (const auto& m : map.machines()) {
                if (m.box.contains(c)) {
                    mask[static_cast<size_t>(cy) * field.width_ + cx] = 1;
                    break;
                }
            }
        }
    }
    field.distance_ = distance_transform(mask, field.width_, field.height_);
    for (int cy = 0; cy < field.height_; ++cy) {
        for (int cx = 0; cx < field.width_; ++cx) {
            const Vec2 c{(cx + 0.5) * resolution, (cy + 0.5) * resolution};
            const double border = std::min(std::min(c.x, map.width() - c.x),
                                           std::min(c.y, map.height() - c.y));
            double& d = field.distance_[static_cast<size_t>(cy) * field.width_ + cx];
            d = std::min(d * resolution, std::max(border, 0.0));
        }
    }
    return field;
}

double LikelihoodField::distance_at(const Vec2& p) const {
    const int cx = static_cast<int>(std::floor(p.x / resolution_));
    const int cy = static_cast<int>(std::floor(p.y / resolution_));
    if (cx < 0 || cx >= width_ || cy < 0 || cy >= height_)
        return std::numeric_limits<double>::infinity();
    return distance_[static_cast<size_t>(cy) * width_ + cx];
}

double LikelihoodField::point_probability(const Vec2& p) const {
    const double d = distance_at(p);
    const double gauss =
        std::isfinite(d) ? std::exp(-d * d / (2.0 * sigma_hit * sigma_hit)) : 0.0;
    return z_hit * gauss + z_rand / max_range;
}

std::vector<Particle> pf_init(int count, const Pose2D& center, double pos_spread,
                              double yaw_spread, Rng& rng) {
    if (count < 1) throw std::invalid_argument("particle count must be positive");
    std::vector<Particle> particles(count);
    const double w = 1.0 / count;
    for (auto& p : particles) {
        p.pose.x = center.x + rng.uniform(-pos_spread, pos_spread);
        p.pose.y = center.y + rng.uniform(-pos_spread, pos_spread);
        p.pose.theta = wrap_angle(center.theta + rng.uniform(-yaw_spread, yaw_spread));
        p.weight = w;
    }
    return particles;
}

void pf_predict(std::vector<Particle>& particles, const Pose2D& odom_delta,
                const PfMotionNoise& noise, Rng& rng) {
    if (!std::isfinite(odom_delta.x) || !std::isfinite(odom_delta.y) ||
        !std::isfinite(odom_delta.theta))
        throw std::invalid_argument("odometry delta must be finite");
    const double sx = noise.trans_scale * std::abs(odom_delta.x) + noise.trans_floor;
    const double sy = noise.trans_scale * std::abs(odom_delta.y) + noise.trans_floor;
    const double st = noise.rot_scale * std::abs(odom_delta.theta) + noise.rot_floor;
    for (auto& p : particles) {
        const Pose2D jittered{odom_delta.x + rng.normal(0.0, sx),
                              odom_delta.y + rng.normal(0.0, sy),
                              odom_delta.theta + rng.normal(0.0, st)};
        p.pose = p.pose.compose(jittered);
    }
}

namespace {

void normalize_weights(std::vector<Particle>& particles) {
    double sum = 0.0;
    for (const auto& p : particles) sum += p.weight;
    if (sum <= 0.0) {
        const double w = 1.0 / particles.size();
        for (auto& p : particles) p.weight = w;
        return;
    }
    for (auto& p : particles) p.weight /= sum;
}

}  // namespace

bool pf_update(std::vector<Particle>& particles, const MergedScan& scan,
               const LikelihoodField& field, int subsample) {
    if (particles.empty()) return false;
    if (subsample < 1) subsample = 1;
    if (scan.points.empty()) {
        normalize_weights(particles);
        return false;
    }

    std::vector<double> log_w(particles.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < particles.size(); ++i) {
        const Pose2D& pose = particles[i].pose;
        const double c = std::cos(pose.theta), s = std::sin(pose.theta);
        double acc = std::log(std::max(particles[i].weight, 1e-300));
        for (size_t k = 0; k < scan.points.size(); k += subsample) {
            const Vec2& q = scan.points[k];
            const Vec2 world{pose.x + c * q.x - s * q.y, pose.y + s * q.x + c * q.y};
            acc += std::log(field.point_probability(world));
        }
        log_w[i] = acc;
        max_log = std::max(max_log, acc);
    }

    bool degenerate = !std::isfinite(max_log);
    double sum = 0.0;
    for (size_t i = 0; i < particles.size(); ++i) {
        const double w = degenerate ? 1.0 : std::exp(log_w[i] - max_log);
        particles[i].weight = w;
        sum += w;
    }
    if (sum <= 0.0) degenerate = true;
    if (degenerate) {
        const double w = 1.0 / particles.size();
        for (auto& p : particles) p.weight = w;
        return true;
    }
    for (auto& p : particles) p.weight /= sum;
    return false;
}

double pf_effective_sample_size(const std::vector<Particle>& particles) {
    double sum_sq = 0.0;
    for (const auto& p : particles) sum_sq += p.weight * p.weight;
    if (sum_sq <= 0.0) return 0.0;
    return 1.0 / sum_sq;
}

void pf_systematic_resample(std::vector<Particle>& particles, Rng& rng) {
    const size_t n = particles.size();
    if (n == 0) return;
    std::vector<Particle> out;
    out.reserve(n);
    const double step = 1.0 / static_cast<double>(n);
    double u = rng.uniform(0.0, step);
    double cum = particles[0].weight;
    size_t i = 0;
    for (size_t k = 0; k < n; ++k) {
        const double target = u + static_cast<double>(k) * step;
        while (cum < target && i + 1 < n) {
            ++i;
            cum += particles[i].weight;
        }
        Particle p = particles[i];
        p.weight = step;
        out.push_back(p);
    }
    particles = std::move(out);
}

bool pf_resample(std::vector<Particle>& particles, Rng& rng) {
    const size_t n = particles.size();
    if (n == 0) return false;
    if (pf_effective_sample_size(particles) >= 0.5 * static_cast<double>(n))
        return false;
    pf_systematic_resample(particles, rng);
    return true;
}

PoseEstimate pf_estimate(const std::vector<Particle>& particles) {
    PoseEstimate est;
    if (particles.empty()) return est;

    double mx = 0.0, my = 0.0, cs = 0.0, sn = 0.0;
    for (const auto& p : particles) {
        mx += p.weight * p.pose.x;
        my += p.weight * p.pose.y;
        cs += p.weight * std::cos(p.pose.theta);
        sn += p.weight * std::sin(p.pose.theta);
    }
    est.pose = {mx, my, std::atan2(sn, cs)};

    for (const auto& p : particles) {
        const double r[3] = {p.pose.x - mx, p.pose.y - my,
                             wrap_angle(p.pose.theta - est.pose.theta)};
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) est.covariance[a][b] += p.weight * r[a] * r[b];
    }
    return est;
}

Mat3 diagonal_matrix(double a, double b, double c) {
    Mat3 m{};
    m[0][0] = a;
    m[1][1] = b;
    m[2][2] = c;
    return m;
}

namespace {

Mat3 mat_mul(const Mat3& a, const Mat3& b) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) r[i][j] += a[i][k] * b[k][j];
    return r;
}

Mat3 mat_transpose(const Mat3& a) {
    Mat3 r{};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) r[i][j] = a[j][i];
    return r;
}

void symmetrize(Mat3& m) {
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double v = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = v;
            m[j][i] = v;
        }
}

}  // namespace

EkfState ekf_predict(const EkfState& state, const BodyTwist& twist, double dt,
                     const Mat3& process_noise) {
    EkfState next;
    next.mean = integrate_odometry(state.mean, twist, dt);

    const double c = std::cos(state.mean.theta), s = std::sin(state.mean.theta);
    Mat3 f{};
    f[0][0] = 1.0;
    f[1][1] = 1.0;
    f[2][2] = 1.0;
    f[0][2] = dt * (-s * twist.vx - c * twist.vy);
    f[1][2] = dt * (c * twist.vx - s * twist.vy);

    next.covariance = mat_mul(mat_mul(f, state.covariance), mat_transpose(f));
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) next.covariance[i][j] += process_noise[i][j];
    symmetrize(next.covariance);
    return next;
}

EkfState ekf_update_yaw(const EkfState& state, const ImuSample& imu,
                        double meas_noise) {
    if (!(meas_noise > 0.0))
        throw std::invalid_argument("measurement noise must be positive");
    EkfState next = state;
    const double r = meas_noise * meas_noise;
    const double s = state.covariance[2][2] + r;
    const double k[3] = {state.covariance[0][2] / s, state.covariance[1][2] / s,
                         state.covariance[2][2] / s};
    const double innovation = wrap_angle(imu.yaw - state.mean.theta);

    next.mean.x += k[0] * innovation;
    next.mean.y += k[1] * innovation;
    next.mean.theta = wrap_angle(next.mean.theta + k[2] * innovation);

    // Joseph form: (I - K H) P (I - K H)^T + K R K^T with H = [0 0 1].
    Mat3 ikh{};
    ikh[0][0] = 1.0;
    ikh[1][1] = 1.0;
    ikh[0][2] = -k[0];
    ikh[1][2] = -k[1];
    ikh[2][2] = 1.0 - k[2];
    next.covariance = mat_mul(mat_mul(ikh, state.covariance), mat_transpose(ikh));
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) next.covariance[a][b] += k[a] * r * k[b];
    symmetrize(next.covariance);
    return next;
}

Localizer::Localizer(const LikelihoodField* field, const Params& params, Rng rng)
    : field_(field), params_(params), rng_(rng) {
    if (field_ == nullptr) throw std::invalid_argument("likelihood field required");
    reset({});
}

void Localizer::reset(const Pose2D& pose) {
    particles_ = pf_init(params_.particle_count, pose, params_.init_pos_spread,
                         params_.init_yaw_spread, rng_);
    ekf_.mean = pose;
    ekf_.covariance = diagonal_matrix(1e-4, 1e-4, 1e-4);
    odom_pose_ = pose;
    odom_at_last_scan_ = pose;
    correction_ = Pose2D{};
    last_pf_estimate_ = PoseEstimate{};
    last_pf_estimate_.pose = pose;
    degenerate_ = false;
}

void Localizer::predict(const BodyTwist& twist, double dt) {
    ekf_ = ekf_predict(ekf_, twist, dt,
                       diagonal_matrix(params_.process_xy * dt, params_.process_xy * dt,
                                       params_.process_theta * dt));
    odom_pose_ = integrate_odometry(odom_pose_, twist, dt);
}

void Localizer::on_imu(const ImuSample& imu) {
    ekf_ = ekf_update_yaw(ekf_, imu, params_.imu_yaw_noise);
}

void Localizer::on_scan(const MergedScan& scan) {
    const Pose2D delta = odom_pose_.relative_to(odom_at_last_scan_);
    odom_at_last_scan_ = odom_pose_;

    pf_predict(particles_, delta, params_.motion_noise, rng_);
    degenerate_ = pf_update(particles_, scan, *field_, params_.scan_subsample);
    pf_resample(particles_, rng_);
    last_pf_estimate_ = pf_estimate(particles_);

    // map->odom correction: the transform that carries the EKF's odometry-frame
    // pose onto the particle filter's map-frame pose.
    const Pose2D inv_ekf = Pose2D{}.relative_to(ekf_.mean);
    correction_ = last_pf_estimate_.pose.compose(inv_ekf);
}

Pose2D Localizer::estimate() const { return correction_.compose(ekf_.mean); }

double Localizer::covariance_trace() const {
    return last_pf_estimate_.covariance[0][0] + last_pf_estimate_.covariance[1][1] +
           last_pf_estimate_.covariance[2][2];
}

}  // namespace omninav
