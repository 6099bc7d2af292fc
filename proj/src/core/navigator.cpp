#include "core/navigator.hpp"

#include <utility>

namespace omninav {

const char* nav_phase_name(NavPhase phase) {
    switch (phase) {
        case NavPhase::idle: return "idle";
        case NavPhase::navigating: return "navigating";
        case NavPhase::recovering: return "recovering";
        case NavPhase::reached: return "reached";
        case NavPhase::failed: return "failed";
    }
    return "unknown";
}

Navigator::Navigator(const Costmap* costmap, const LikelihoodField* field,
                     const NavigatorParams& params, uint64_t seed)
    : costmap_(costmap),
      params_(params),
      localizer_(field, params.localizer, Rng::substream(seed, "localizer")),
      controller_(params.mppi, Rng::substream(seed, "controller")),
      progress_(params.progress_min_move, params.progress_window),
      recovery_(params.mppi.wz_max) {}

void Navigator::reset_pose(const Pose2D& pose) {
    localizer_.reset(pose);
    controller_.clear_path();
    recovery_.acknowledge();
    phase_ = NavPhase::idle;
}

bool Navigator::set_goal(const Pose2D& goal, double now) {
    goal_ = goal;
    recovery_.acknowledge();
    if (!plan_to_goal()) {
        phase_ = NavPhase::failed;
        push_event(now, "plan_failed", "no path to goal");
        return false;
    }
    phase_ = NavPhase::navigating;
    progress_.reset(now, estimate());
    push_event(now, "goal_set", "");
    return true;
}

void Navigator::on_odometry(const BodyTwist& twist, double dt) {
    localizer_.predict(twist, dt);
}

void Navigator::on_imu(const ImuSample& imu) { localizer_.on_imu(imu); }

void Navigator::on_scan(const MergedScan& scan) { localizer_.on_scan(scan); }

BodyTwist Navigator::control(double now,
                             const std::vector<DynamicObstacle>& obstacles) {
    const double dt = 1.0 / params_.mppi.frequency;
    switch (phase_) {
        case NavPhase::idle:
        case NavPhase::reached:
        case NavPhase::failed:
            return {};
        case NavPhase::recovering: {
            const BodyTwist cmd = recovery_.tick(dt);
            if (recovery_.finished()) {
                recovery_.acknowledge();
                ++replans_;
                push_event(now, "replan", "after recovery");
                if (plan_to_goal()) {
                    phase_ = NavPhase::navigating;
                    progress_.reset(now, estimate());
                } else {
                    phase_ = NavPhase::failed;
                    push_event(now, "plan_failed", "replan after recovery");
                }
            }
            return cmd;
        }
        case NavPhase::navigating: {
            const Pose2D est = estimate();
            const ControlOutcome out = controller_.tick(est, *costmap_, obstacles);
            if (out.goal_reached) {
                phase_ = NavPhase::reached;
                push_event(now, "goal_reached", "");
                return {};
            }
            if (out.no_path) {
                phase_ = NavPhase::failed;
                push_event(now, "plan_failed", "controller lost its path");
                return {};
            }
            progress_.update(now, est);
            if (progress_.stalled()) {
                ++recoveries_;
                push_event(now, "recovery_start", "stalled");
                recovery_.start();
                phase_ = NavPhase::recovering;
                return recovery_.tick(dt);
            }
            return out.command;
        }
    }
    return {};
}

std::vector<NavEvent> Navigator::drain_events() {
    std::vector<NavEvent> out;
    out.swap(events_);
    return out;
}

bool Navigator::plan_to_goal() {
    const auto planned = plan_with(params_.planner_id, *costmap_,
                                   estimate().position(), goal_.position(),
                                   params_.planner);
    if (!planned) return false;
    controller_.set_path(*planned, *costmap_, goal_.theta);
    return true;
}

void Navigator::push_event(double t, const char* kind, std::string detail) {
    events_.push_back({t, kind, std::move(detail)});
}

}  // namespace omninav
