#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/costmap.hpp"
#include "core/localization.hpp"
#include "core/mppi.hpp"
#include "core/planners.hpp"

namespace omninav {

struct NavigatorParams {
    std::string planner_id = "thetastar";
    PlannerParams planner;
    MppiParams mppi;
    Localizer::Params localizer;
    // Stall detection: less than min_move of translation over a full window
    // triggers the spin recovery.
    double progress_min_move = 0.05;
    double progress_window = 10.0;
};

enum class NavPhase { idle, navigating, recovering, reached, failed };

const char* nav_phase_name(NavPhase phase);

// Timestamped breadcrumbs for the event log.
struct NavEvent {
    double t = 0.0;
    std::string kind;
    std::string detail;
};

// One robot's stack: localization, global plan, sampling controller, stall
// detection and the spin-in-place recovery. The caller owns the clock, feeds
// sensor data as it arrives and ticks control() at the control frequency.
class Navigator {
public:
    // costmap and field must outlive the navigator. All internal randomness
    // (particle filter, controller sampling) derives from seed.
    Navigator(const Costmap* costmap, const LikelihoodField* field,
              const NavigatorParams& params, uint64_t seed);

    // Re-initializes the estimator around the given pose and drops any goal.
    void reset_pose(const Pose2D& pose);

    // Plans from the current estimate. Returns false (phase failed) if no
    // path exists.
    bool set_goal(const Pose2D& goal, double now);

    void on_odometry(const BodyTwist& twist, double dt);
    void on_imu(const ImuSample& imu);
    void on_scan(const MergedScan& scan);

    // One control step. Returns zero twist when idle, done or failed.
    BodyTwist control(double now, const std::vector<DynamicObstacle>& obstacles);

    NavPhase phase() const { return phase_; }
    Pose2D estimate() const { return localizer_.estimate(); }
    const Localizer& localizer() const { return localizer_; }
    const Pose2D& goal() const { return goal_; }
    bool has_plan() const { return controller_.has_path(); }
    const PlannedPath& path() const { return controller_.path(); }
    const NavigatorParams& params() const { return params_; }
    int recovery_count() const { return recoveries_; }
    int replan_count() const { return replans_; }

    // Returns accumulated events and clears the buffer.
    std::vector<NavEvent> drain_events();

private:
    bool plan_to_goal();
    void push_event(double t, const char* kind, std::string detail);

    const Costmap* costmap_;
    NavigatorParams params_;
    Localizer localizer_;
    MppiController controller_;
    ProgressChecker progress_;
    SpinRecovery recovery_;
    NavPhase phase_ = NavPhase::idle;
    Pose2D goal_;
    int recoveries_ = 0;
    int replans_ = 0;
    std::vector<NavEvent> events_;
};

}  // namespace omninav
