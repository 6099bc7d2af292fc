#pragma once

#include <string>
#include <vector>

#include "core/costmap.hpp"
#include "core/planners.hpp"
#include "core/rng.hpp"

namespace omninav {

struct MppiParams {
    int time_steps = 80;
    double model_dt = 0.05;    // s per rollout step
    double frequency = 20.0;   // control ticks per second
    std::string motion_model = "Omni";
    int batch_size = 2000;
    double vx_min = -0.7;      // m/s
    double vx_max = 0.7;
    double vy_max = 0.7;       // symmetric about zero
    double wz_max = 0.8;       // rad/s, symmetric
    double vx_std = 0.4;
    double vy_std = 0.4;
    double wz_std = 0.4;
    double temperature = 0.35; // softmax sharpness

    // Critic weights.
    double w_path = 5.0;
    double w_goal = 5.0;
    double w_obst = 20.0;
    double w_dyn = 20.0;
    double w_angle = 3.0;

    double robot_radius = 0.23;    // m, our own footprint for the dynamic gap
    double dyn_safety_dist = 0.6;  // m, center distance where avoidance engages
    double goal_angle_dist = 0.5;  // m, radius where heading error counts
    double lookahead_dist = 0.0;   // m along the path; <= 0 picks vx_max * horizon
    // Inflation cost below this is free. Docking-style goals sit inside the
    // graded decay zone; the dead band stops the obstacle critic from
    // fighting the goal critic over the last few centimeters of approach.
    // 50 puts the penalty onset about 0.1 m outside the lethal band.
    double obst_threshold = 50.0;

    // Arrival acceptance. Tighter than the goal_reached() defaults on
    // purpose: the controller keeps pushing until the estimate has sat
    // inside this ball for settle_ticks consecutive ticks with the last
    // emitted command below the settle gates, so the pose the robot is
    // actually parked at clears the looser tolerances callers report
    // against, estimation error and all.
    double goal_pos_tol = 0.04;  // m
    double goal_yaw_tol = 0.08;  // rad
    double settle_speed = 0.10;  // m/s, |vx| and |vy| of the last command
    double settle_spin = 0.25;   // rad/s
    int settle_ticks = 2;

    double horizon() const { return time_steps * model_dt; }
    double effective_lookahead() const {
        return lookahead_dist > 0.0 ? lookahead_dist : vx_max * horizon();
    }
    void validate() const;  // throws std::invalid_argument
};

using ControlSequence = std::vector<BodyTwist>;

// Another robot seen as a disc moving at constant world-frame velocity.
struct DynamicObstacle {
    Vec2 position;
    Vec2 velocity;
    double radius = 0.23;
};

BodyTwist clamp_twist(const BodyTwist& t, const MppiParams& p);

ControlSequence zero_sequence(const MppiParams& p);

// batch_size copies of `seq` with independent per-axis, per-step gaussian
// perturbations, each entry clamped to the velocity bounds.
std::vector<ControlSequence> sample_rollouts(const ControlSequence& seq,
                                             const MppiParams& p, Rng& rng);

// Integrates each sequence from `start` at model_dt; trajectory k holds the
// pose after each step, so time_steps poses spanning the horizon.
std::vector<std::vector<Pose2D>> rollout_trajectories(
    const std::vector<ControlSequence>& batch, const Pose2D& start,
    const MppiParams& p);

// Distance-to-path lookup grid sharing the costmap's frame and resolution.
class PathDistanceField {
public:
    PathDistanceField() = default;
    PathDistanceField(const PlannedPath& path, const Costmap& map);

    bool empty() const { return dist_.empty(); }
    double at_world(const Vec2& p) const;  // meters; large when off-grid

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.05;
    double inv_resolution_ = 20.0;
    std::vector<double> dist_;
};

// Scalar cost per trajectory: path adherence, mean distance to the active
// goal point (rewards early arrival; a terminal-only term makes approach
// speed decay with remaining distance), costmap proximity (lethal cells get a
// flat surcharge), predicted gaps to moving obstacles, heading error once the
// robot itself is near the final goal. The heading gate keys off `robot`, the
// shared rollout start, so it is one constant per batch; gating on each
// rollout's own position puts a cost cliff at the radius that repels entry.
std::vector<double> evaluate_costs(const std::vector<std::vector<Pose2D>>& trajectories,
                                   const PathDistanceField& path_field,
                                   const Costmap& map, const Pose2D& robot,
                                   const Vec2& active_goal,
                                   const Pose2D& final_goal,
                                   const std::vector<DynamicObstacle>& obstacles,
                                   const MppiParams& p);

// Softmax-weighted average of the batch, weights exp(-(cost - min)/lambda),
// clamped. No shift here; the controller shifts after emitting a command.
ControlSequence update_sequence(const ControlSequence& seq,
                                const std::vector<ControlSequence>& batch,
                                const std::vector<double>& costs,
                                const MppiParams& p);

// Point `lookahead` meters beyond the robot's closest point on the polyline,
// clamped to the path end.
Vec2 active_goal_point(const PlannedPath& path, const Pose2D& robot, double lookahead);

bool goal_reached(const Pose2D& estimate, const Pose2D& goal,
                  double pos_tol = 0.10, double yaw_tol = 0.15);

// Flags a robot that moved less than min_move over window seconds. Progress
// resets the baseline; the stalled flag latches until reset().
class ProgressChecker {
public:
    explicit ProgressChecker(double min_move = 0.05, double window = 10.0)
        : min_move_(min_move), window_(window) {}

    void reset(double t, const Pose2D& pose);
    void update(double t, const Pose2D& pose);
    bool stalled() const { return stalled_; }

private:
    double min_move_;
    double window_;
    bool has_baseline_ = false;
    double baseline_t_ = 0.0;
    Vec2 baseline_;
    bool stalled_ = false;
};

// Stall recovery script: rotate a quarter turn in place, rotate back, then
// report completion so the caller can replan once.
class SpinRecovery {
public:
    explicit SpinRecovery(double wz_max);

    void start();
    bool active() const { return phase_ == Phase::forward || phase_ == Phase::back; }
    bool finished() const { return phase_ == Phase::done; }
    void acknowledge();  // caller handled the replan; back to idle
    BodyTwist tick(double dt);
    int completed() const { return completed_; }

private:
    enum class Phase { idle, forward, back, done };

    double rate_;
    Phase phase_ = Phase::idle;
    double turned_ = 0.0;
    int completed_ = 0;
};

struct ControlOutcome {
    BodyTwist command;
    bool goal_reached = false;
    bool no_path = false;
};

// One sampling controller per robot, ticked at `frequency` by the caller.
class MppiController {
public:
    MppiController(const MppiParams& params, const Rng& rng);

    // Replaces the tracked path; the goal pose is the last waypoint with the
    // requested heading. Resets the nominal sequence.
    void set_path(const PlannedPath& path, const Costmap& map, double goal_heading);
    void clear_path();
    bool has_path() const { return !path_.waypoints.empty(); }
    const PlannedPath& path() const { return path_; }
    const Pose2D& goal() const { return goal_; }
    const ControlSequence& nominal() const { return nominal_; }
    const MppiParams& params() const { return params_; }

    // Sample, roll out, score, average, emit the first command, shift.
    ControlOutcome tick(const Pose2D& estimate, const Costmap& map,
                        const std::vector<DynamicObstacle>& obstacles);

private:
    // Sample, integrate and score in one pass over reused scratch buffers,
    // then softmax-average into nominal_. Same math as the free-function
    // pipeline, minus the per-tick allocation of 2000 trajectories.
    void optimize(const Pose2D& estimate, const Costmap& map,
                  const std::vector<DynamicObstacle>& obstacles);

    MppiParams params_;
    Rng rng_;
    PlannedPath path_;
    PathDistanceField path_field_;
    Pose2D goal_;
    ControlSequence nominal_;
    BodyTwist last_cmd_;
    int settled_ = 0;
    int lingered_ = 0;
    std::vector<BodyTwist> noisy_;  // batch_size rows of time_steps commands
    std::vector<double> costs_;
    std::vector<double> weights_;
    std::vector<double> acc_;       // 3 * time_steps weighted sums
};

}  // namespace omninav
