#include "core/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "core/odometry.hpp"

namespace omninav {

void MppiParams::validate() const {
    if (time_steps < 1) throw std::invalid_argument("time_steps must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (!(model_dt > 0.0)) throw std::invalid_argument("model_dt must be positive");
    if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be positive");
    if (!(vx_min < vx_max)) throw std::invalid_argument("vx bounds are inverted");
    if (vy_max < 0.0 || wz_max < 0.0)
        throw std::invalid_argument("symmetric velocity bounds must be non-negative");
    if (!(vx_std > 0.0) || !(vy_std > 0.0) || !(wz_std > 0.0))
        throw std::invalid_argument("sampling stds must be positive");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    if (obst_threshold < 0.0 || obst_threshold >= static_cast<double>(kLethalCost))
        throw std::invalid_argument("obst_threshold must be in [0, 255)");
    if (!(goal_pos_tol > 0.0) || !(goal_yaw_tol > 0.0))
        throw std::invalid_argument("goal tolerances must be positive");
    if (settle_speed < 0.0 || settle_spin < 0.0)
        throw std::invalid_argument("settle gates must be non-negative");
    if (settle_ticks < 1) throw std::invalid_argument("settle_ticks must be >= 1");
}

BodyTwist clamp_twist(const BodyTwist& t, const MppiParams& p) {
    return {std::clamp(t.vx, p.vx_min, p.vx_max),
            std::clamp(t.vy, -p.vy_max, p.vy_max),
            std::clamp(t.wz, -p.wz_max, p.wz_max)};
}

ControlSequence zero_sequence(const MppiParams& p) {
    return ControlSequence(static_cast<size_t>(p.time_steps));
}

std::vector<ControlSequence> sample_rollouts(const ControlSequence& seq,
                                             const MppiParams& p, Rng& rng) {
    if (static_cast<int>(seq.size()) != p.time_steps)
        throw std::invalid_argument("control sequence length mismatch");
    std::vector<ControlSequence> batch(static_cast<size_t>(p.batch_size));
    for (auto& sample : batch) {
        sample.resize(seq.size());
        for (size_t k = 0; k < seq.size(); ++k) {
            sample[k] = clamp_twist({seq[k].vx + rng.normal() * p.vx_std,
                                     seq[k].vy + rng.normal() * p.vy_std,
                                     seq[k].wz + rng.normal() * p.wz_std},
                                    p);
        }
    }
    return batch;
}

std::vector<std::vector<Pose2D>> rollout_trajectories(
    const std::vector<ControlSequence>& batch, const Pose2D& start,
    const MppiParams& p) {
    std::vector<std::vector<Pose2D>> out(batch.size());
    const double dt = p.model_dt;
    for (size_t i = 0; i < batch.size(); ++i) {
        out[i].reserve(batch[i].size());
        double x = start.x, y = start.y, th = start.theta;
        for (const BodyTwist& cmd : batch[i]) {
            // Same Euler step as integrate_odometry, but with a single-branch
            // wrap: per-step increments are far below pi, so remainder() is
            // overkill in this hot loop.
            const double c = std::cos(th), s = std::sin(th);
            x += (c * cmd.vx - s * cmd.vy) * dt;
            y += (s * cmd.vx + c * cmd.vy) * dt;
            th += cmd.wz * dt;
            if (th > kPi) th -= kTwoPi;
            else if (th <= -kPi) th += kTwoPi;
            out[i].push_back({x, y, th});
        }
    }
    return out;
}

PathDistanceField::PathDistanceField(const PlannedPath& path, const Costmap& map)
    : width_(map.width()), height_(map.height()), resolution_(map.resolution()),
      inv_resolution_(1.0 / map.resolution()) {
    if (path.waypoints.empty()) throw std::invalid_argument("path has no waypoints");
    std::vector<uint8_t> marked(static_cast<size_t>(width_) * height_, 0);
    bool any = false;
    auto mark_point = [&](const Vec2& p) {
        int cx = 0, cy = 0;
        if (map.world_to_cell(p, cx, cy)) {
            marked[static_cast<size_t>(cy) * width_ + cx] = 1;
            any = true;
        }
    };
    mark_point(path.waypoints.front());
    const double step = 0.5 * resolution_;
    for (size_t i = 0; i + 1 < path.waypoints.size(); ++i) {
        const Vec2 a = path.waypoints[i];
        const Vec2 d = path.waypoints[i + 1] - a;
        const int n = std::max(1, static_cast<int>(std::ceil(d.norm() / step)));
        for (int k = 1; k <= n; ++k)
            mark_point(a + d * (static_cast<double>(k) / n));
    }
    if (!any) throw std::invalid_argument("path lies outside the grid");
    dist_ = distance_transform(marked, width_, height_);
    for (double& d : dist_) d *= resolution_;
}

double PathDistanceField::at_world(const Vec2& p) const {
    const int cx = static_cast<int>(std::floor(p.x * inv_resolution_));
    const int cy = static_cast<int>(std::floor(p.y * inv_resolution_));
    if (cx < 0 || cx >= width_ || cy < 0 || cy >= height_) return 100.0;
    return dist_[static_cast<size_t>(cy) * width_ + cx];
}

std::vector<double> evaluate_costs(const std::vector<std::vector<Pose2D>>& trajectories,
                                   const PathDistanceField& path_field,
                                   const Costmap& map, const Pose2D& robot,
                                   const Vec2& active_goal,
                                   const Pose2D& final_goal,
                                   const std::vector<DynamicObstacle>& obstacles,
                                   const MppiParams& p) {
    std::vector<double> costs(trajectories.size(), 0.0);
    const double inv_scale =
        1.0 / (static_cast<double>(kMaxInflatedCost) - p.obst_threshold);
    // Heading alignment kicks in on the final approach. One gate for the
    // whole batch, and scored over the whole horizon rather than just the
    // last pose: a terminal-only penalty is invisible to the sampler
    // (per-step noise barely moves the endpoint heading) and the robot parks
    // without ever turning.
    const bool align_heading =
        p.w_angle > 0.0 &&
        (robot.position() - final_goal.position()).norm() < p.goal_angle_dist;
    for (size_t i = 0; i < trajectories.size(); ++i) {
        const auto& traj = trajectories[i];
        if (traj.empty()) continue;
        double path_sum = 0.0;
        double goal_sum = 0.0;
        double obst_sum = 0.0;
        double dyn_sum = 0.0;
        double angle_sum = 0.0;
        for (size_t k = 0; k < traj.size(); ++k) {
            const Vec2 pos = traj[k].position();
            path_sum += path_field.at_world(pos);
            goal_sum += (pos - active_goal).norm();
            const uint8_t c = map.cost_at_world(pos);
            if (c == kLethalCost)
                obst_sum += 1000.0;
            else if (static_cast<double>(c) > p.obst_threshold)
                obst_sum += (static_cast<double>(c) - p.obst_threshold) * inv_scale;
            if (align_heading)
                angle_sum += std::fabs(wrap_angle(traj[k].theta - final_goal.theta));
            if (!obstacles.empty()) {
                const double t = static_cast<double>(k + 1) * p.model_dt;
                for (const auto& obs : obstacles) {
                    const Vec2 at = obs.position + obs.velocity * t;
                    const double gap = (pos - at).norm();
                    if (gap < p.dyn_safety_dist) dyn_sum += p.dyn_safety_dist - gap;
                    if (gap < p.robot_radius + obs.radius) dyn_sum += 10.0;
                }
            }
        }
        const double n = static_cast<double>(traj.size());
        costs[i] = p.w_path * (path_sum / n) + p.w_goal * (goal_sum / n) +
                   p.w_obst * (obst_sum / n) + p.w_dyn * (dyn_sum / n) +
                   p.w_angle * (angle_sum / n);
    }
    return costs;
}

ControlSequence update_sequence(const ControlSequence& seq,
                                const std::vector<ControlSequence>& batch,
                                const std::vector<double>& costs,
                                const MppiParams& p) {
    if (batch.size() != costs.size())
        throw std::invalid_argument("batch and cost sizes differ");
    if (batch.empty()) return seq;
    double min_cost = std::numeric_limits<double>::infinity();
    for (double c : costs) min_cost = std::min(min_cost, c);
    if (!std::isfinite(min_cost)) return seq;

    std::vector<double> weights(costs.size());
    double total = 0.0;
    for (size_t i = 0; i < costs.size(); ++i) {
        weights[i] = std::exp(-(costs[i] - min_cost) / p.temperature);
        total += weights[i];
    }
    ControlSequence out(seq.size());
    for (size_t k = 0; k < seq.size(); ++k) {
        double vx = 0.0, vy = 0.0, wz = 0.0;
        for (size_t i = 0; i < batch.size(); ++i) {
            vx += weights[i] * batch[i][k].vx;
            vy += weights[i] * batch[i][k].vy;
            wz += weights[i] * batch[i][k].wz;
        }
        out[k] = clamp_twist({vx / total, vy / total, wz / total}, p);
    }
    return out;
}

namespace {

// Savitzky-Golay (window 5, quadratic) along the time axis, edge-replicated.
// The softmax average of independent per-step noise still jitters tick to
// tick; this keeps consecutive emitted commands from chattering.
void smooth_sequence(ControlSequence& seq, const MppiParams& p) {
    const int n = static_cast<int>(seq.size());
    if (n < 3) return;
    static constexpr double kCoef[5] = {-3.0 / 35, 12.0 / 35, 17.0 / 35, 12.0 / 35,
                                        -3.0 / 35};
    ControlSequence out(seq.size());
    for (int i = 0; i < n; ++i) {
        double vx = 0.0, vy = 0.0, wz = 0.0;
        for (int j = -2; j <= 2; ++j) {
            const BodyTwist& s = seq[static_cast<size_t>(std::clamp(i + j, 0, n - 1))];
            vx += kCoef[j + 2] * s.vx;
            vy += kCoef[j + 2] * s.vy;
            wz += kCoef[j + 2] * s.wz;
        }
        out[i] = clamp_twist({vx, vy, wz}, p);
    }
    seq = std::move(out);
}

}  // namespace

Vec2 active_goal_point(const PlannedPath& path, const Pose2D& robot, double lookahead) {
    const auto& wp = path.waypoints;
    if (wp.empty()) throw std::invalid_argument("path has no waypoints");
    if (wp.size() == 1) return wp.front();

    const Vec2 rp = robot.position();
    double best_d2 = std::numeric_limits<double>::infinity();
    size_t best_seg = 0;
    double best_t = 0.0;
    for (size_t i = 0; i + 1 < wp.size(); ++i) {
        const Vec2 a = wp[i];
        const Vec2 ab = wp[i + 1] - a;
        const double len2 = ab.squared_norm();
        const double t = len2 > 0.0 ? std::clamp((rp - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
        const double d2 = (rp - (a + ab * t)).squared_norm();
        if (d2 < best_d2) {
            best_d2 = d2;
            best_seg = i;
            best_t = t;
        }
    }

    double remaining = lookahead;
    const Vec2 projection = wp[best_seg] + (wp[best_seg + 1] - wp[best_seg]) * best_t;
    for (size_t i = best_seg; i + 1 < wp.size(); ++i) {
        const Vec2 from = (i == best_seg) ? projection : wp[i];
        const Vec2 seg = wp[i + 1] - from;
        const double seg_len = seg.norm();
        if (seg_len > 0.0 && remaining <= seg_len)
            return from + seg * (remaining / seg_len);
        remaining -= seg_len;
    }
    return wp.back();
}

bool goal_reached(const Pose2D& estimate, const Pose2D& goal, double pos_tol,
                  double yaw_tol) {
    return (estimate.position() - goal.position()).norm() < pos_tol &&
           std::fabs(wrap_angle(estimate.theta - goal.theta)) < yaw_tol;
}

void ProgressChecker::reset(double t, const Pose2D& pose) {
    has_baseline_ = true;
    baseline_t_ = t;
    baseline_ = pose.position();
    stalled_ = false;
}

void ProgressChecker::update(double t, const Pose2D& pose) {
    if (!has_baseline_) {
        reset(t, pose);
        return;
    }
    if ((pose.position() - baseline_).norm() >= min_move_) {
        baseline_t_ = t;
        baseline_ = pose.position();
    } else if (t - baseline_t_ > window_) {
        stalled_ = true;
    }
}

SpinRecovery::SpinRecovery(double wz_max) : rate_(0.5 * wz_max) {
    if (!(wz_max > 0.0)) throw std::invalid_argument("wz_max must be positive");
}

void SpinRecovery::start() {
    phase_ = Phase::forward;
    turned_ = 0.0;
}

void SpinRecovery::acknowledge() {
    if (phase_ == Phase::done) phase_ = Phase::idle;
}

BodyTwist SpinRecovery::tick(double dt) {
    if (!active() || !(dt > 0.0)) return {};
    const double quarter = 0.5 * kPi;
    const double step = std::min(rate_ * dt, quarter - turned_);
    turned_ += step;
    const double wz = (phase_ == Phase::forward ? 1.0 : -1.0) * step / dt;
    if (turned_ >= quarter - 1e-12) {
        if (phase_ == Phase::forward) {
            phase_ = Phase::back;
            turned_ = 0.0;
        } else {
            phase_ = Phase::done;
            ++completed_;
        }
    }
    return {0.0, 0.0, wz};
}

MppiController::MppiController(const MppiParams& params, const Rng& rng)
    : params_(params), rng_(rng) {
    params_.validate();
    nominal_ = zero_sequence(params_);
}

void MppiController::set_path(const PlannedPath& path, const Costmap& map,
                              double goal_heading) {
    if (path.waypoints.empty()) throw std::invalid_argument("path has no waypoints");
    path_ = path;
    path_field_ = PathDistanceField(path, map);
    goal_ = {path.waypoints.back().x, path.waypoints.back().y, wrap_angle(goal_heading)};
    nominal_ = zero_sequence(params_);
    last_cmd_ = {};
    settled_ = 0;
    lingered_ = 0;
}

void MppiController::clear_path() {
    path_ = PlannedPath{};
    path_field_ = PathDistanceField{};
    nominal_ = zero_sequence(params_);
    last_cmd_ = {};
    settled_ = 0;
    lingered_ = 0;
}

ControlOutcome MppiController::tick(const Pose2D& estimate, const Costmap& map,
                                    const std::vector<DynamicObstacle>& obstacles) {
    ControlOutcome out;
    if (!has_path()) {
        out.no_path = true;
        return out;
    }
    const bool inner = goal_reached(estimate, goal_, params_.goal_pos_tol,
                                    params_.goal_yaw_tol);
    const bool quiet = std::fabs(last_cmd_.vx) <= params_.settle_speed &&
                       std::fabs(last_cmd_.vy) <= params_.settle_speed &&
                       std::fabs(last_cmd_.wz) <= params_.settle_spin;
    settled_ = (inner && quiet) ? settled_ + 1 : 0;
    // Fallback for a jitter tail that never quiets down: sitting in the
    // loose reporting ball for several seconds counts as arrival too.
    lingered_ = goal_reached(estimate, goal_) ? lingered_ + 1 : 0;
    const int grace = static_cast<int>(std::lround(5.0 * params_.frequency));
    if (settled_ >= params_.settle_ticks || lingered_ >= grace) {
        last_cmd_ = {};
        settled_ = 0;
        lingered_ = 0;
        out.goal_reached = true;
        return out;
    }
    optimize(estimate, map, obstacles);
    smooth_sequence(nominal_, params_);
    out.command = nominal_.front();
    last_cmd_ = out.command;
    for (size_t k = 0; k + 1 < nominal_.size(); ++k) nominal_[k] = nominal_[k + 1];
    return out;
}

void MppiController::optimize(const Pose2D& start, const Costmap& map,
                              const std::vector<DynamicObstacle>& obstacles) {
    const MppiParams& p = params_;
    const size_t steps = nominal_.size();
    const size_t batch = static_cast<size_t>(p.batch_size);
    noisy_.resize(batch * steps);
    costs_.resize(batch);
    weights_.resize(batch);

    const Vec2 active = active_goal_point(path_, start, p.effective_lookahead());
    const double dt = p.model_dt;
    const double n = static_cast<double>(steps);
    const double inv_scale =
        1.0 / (static_cast<double>(kMaxInflatedCost) - p.obst_threshold);
    const bool align_heading =
        p.w_angle > 0.0 &&
        (start.position() - goal_.position()).norm() < p.goal_angle_dist;
    const double inv_res = 1.0 / map.resolution();
    const int map_w = map.width(), map_h = map.height();

    double min_cost = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < batch; ++i) {
        BodyTwist* row = noisy_.data() + i * steps;
        for (size_t k = 0; k < steps; ++k)
            row[k] = clamp_twist({nominal_[k].vx + rng_.normal() * p.vx_std,
                                  nominal_[k].vy + rng_.normal() * p.vy_std,
                                  nominal_[k].wz + rng_.normal() * p.wz_std},
                                 p);
        double x = start.x, y = start.y, th = start.theta;
        double path_sum = 0.0, goal_sum = 0.0, obst_sum = 0.0;
        double dyn_sum = 0.0, angle_sum = 0.0;
        for (size_t k = 0; k < steps; ++k) {
            const BodyTwist& cmd = row[k];
            const double c = std::cos(th), s = std::sin(th);
            x += (c * cmd.vx - s * cmd.vy) * dt;
            y += (s * cmd.vx + c * cmd.vy) * dt;
            th += cmd.wz * dt;
            if (th > kPi) th -= kTwoPi;
            else if (th <= -kPi) th += kTwoPi;
            const Vec2 pos{x, y};
            path_sum += path_field_.at_world(pos);
            goal_sum += (pos - active).norm();
            const int cx = static_cast<int>(std::floor(x * inv_res));
            const int cy = static_cast<int>(std::floor(y * inv_res));
            const uint8_t cell = (cx < 0 || cx >= map_w || cy < 0 || cy >= map_h)
                                     ? kLethalCost
                                     : map.cost(cx, cy);
            if (cell == kLethalCost)
                obst_sum += 1000.0;
            else if (static_cast<double>(cell) > p.obst_threshold)
                obst_sum += (static_cast<double>(cell) - p.obst_threshold) * inv_scale;
            if (align_heading)
                angle_sum += std::fabs(wrap_angle(th - goal_.theta));
            if (!obstacles.empty()) {
                const double t = static_cast<double>(k + 1) * dt;
                for (const auto& obs : obstacles) {
                    const Vec2 at = obs.position + obs.velocity * t;
                    const double gap = (pos - at).norm();
                    if (gap < p.dyn_safety_dist) dyn_sum += p.dyn_safety_dist - gap;
                    if (gap < p.robot_radius + obs.radius) dyn_sum += 10.0;
                }
            }
        }
        costs_[i] = p.w_path * (path_sum / n) + p.w_goal * (goal_sum / n) +
                    p.w_obst * (obst_sum / n) + p.w_dyn * (dyn_sum / n) +
                    p.w_angle * (angle_sum / n);
        min_cost = std::min(min_cost, costs_[i]);
    }
    if (!std::isfinite(min_cost)) return;

    double total = 0.0;
    for (size_t i = 0; i < batch; ++i) {
        weights_[i] = std::exp(-(costs_[i] - min_cost) / p.temperature);
        total += weights_[i];
    }
    acc_.assign(3 * steps, 0.0);
    for (size_t i = 0; i < batch; ++i) {
        const double w = weights_[i];
        const BodyTwist* row = noisy_.data() + i * steps;
        for (size_t k = 0; k < steps; ++k) {
            acc_[3 * k] += w * row[k].vx;
            acc_[3 * k + 1] += w * row[k].vy;
            acc_[3 * k + 2] += w * row[k].wz;
        }
    }
    for (size_t k = 0; k < steps; ++k)
        nominal_[k] = clamp_twist(
            {acc_[3 * k] / total, acc_[3 * k + 1] / total, acc_[3 * k + 2] / total}, p);
}

}  // namespace omninav
