// End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
// process exits nonzero if any fail. Tolerances are pinned here on purpose.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "core/costmap.hpp"
#include "core/kinematics.hpp"
#include "core/localization.hpp"
#include "core/mppi.hpp"
#include "core/navigator.hpp"
#include "core/odometry.hpp"
#include "core/planners.hpp"
#include "core/sim.hpp"
#include "core/world_map.hpp"
#include "harness/csv.hpp"
#include "harness/experiment.hpp"
#include "harness/plan_demo.hpp"

#ifndef OMNINAV_CLI_PATH
#define OMNINAV_CLI_PATH "omninav"
#endif
#ifndef OMNINAV_DATA_DIR
#define OMNINAV_DATA_DIR "data"
#endif

using namespace omninav;

namespace {

int g_failures = 0;

void report(const char* name, bool pass, const std::string& note) {
    std::printf("%s  %-28s %s\n", pass ? "PASS" : "FAIL", name, note.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string run_command(const std::string& cmd) {
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return out;
    char buf[512];
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    pclose(pipe);
    return out;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Direct twist box roundtrip through the wheel model.
void check_kinematics_roundtrip() {
    const auto t0 = std::chrono::steady_clock::now();
    const RobotGeometry geom = RobotGeometry::default_geometry();
    Rng rng(2024);
    double worst = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const BodyTwist cmd{rng.uniform(-0.7, 0.7), rng.uniform(-0.7, 0.7),
                            rng.uniform(-0.8, 0.8)};
        const BodyTwist back = inverse_kinematics(geom, forward_kinematics(geom, cmd));
        worst = std::max({worst, std::fabs(back.vx - cmd.vx),
                          std::fabs(back.vy - cmd.vy), std::fabs(back.wz - cmd.wz)});
    }
    const WheelSpeeds spin = forward_kinematics(geom, {0.0, 0.0, 1.0});
    const bool equal_wheels = std::fabs(spin.m1 - spin.m2) < 1e-9 &&
                              std::fabs(spin.m2 - spin.m3) < 1e-9;
    const bool spin_value = std::fabs(spin.m1 - 6.4457) < 1e-3;
    const double elapsed = seconds_since(t0);

    char note[160];
    std::snprintf(note, sizeof note,
                  "worst roundtrip %.2e, spin %.4f rpm, %.2f s",
                  worst, spin.m1, elapsed);
    report("kinematics-roundtrip",
           worst < 1e-9 && equal_wheels && spin_value && elapsed < 5.0, note);
}

void check_odometry_circle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto closure = [](double dt) {
        const double wz = 0.5;
        const int steps = static_cast<int>(std::llround(kTwoPi / (wz * dt)));
        Pose2D pose{0.0, 0.0, 0.0};
        for (int i = 0; i < steps; ++i)
            pose = integrate_odometry(pose, {0.5, 0.0, wz}, dt);
        return pose;
    };
    const Pose2D coarse = closure(1e-3);
    const Pose2D fine = closure(5e-4);
    const double coarse_pos = std::hypot(coarse.x, coarse.y);
    const double fine_pos = std::hypot(fine.x, fine.y);
    const double elapsed = seconds_since(t0);

    char note[160];
    std::snprintf(note, sizeof note,
                  "closure %.2e m / %.2e rad, halving dt leaves %.0f%%, %.2f s",
                  coarse_pos, std::fabs(coarse.theta),
                  100.0 * fine_pos / coarse_pos, elapsed);
    report("odometry-circle-closure",
           coarse_pos < 2e-3 && std::fabs(coarse.theta) < 2e-3 &&
               fine_pos <= 0.6 * coarse_pos && elapsed < 5.0,
           note);
}

// 6 m x 3 m world at 0.05 m cells is a 120 x 60 cell grid.
WorldMap random_small_map(Rng& rng) {
    const double w = 6.0, h = 3.0;
    const int count = 3 + static_cast<int>(rng.uniform_index(6));
    std::vector<Machine> machines;
    int guard = 0;
    while (static_cast<int>(machines.size()) < count && ++guard < 500) {
        const OrientedBox box{{rng.uniform(0.6, w - 0.6), rng.uniform(0.5, h - 0.5),
                               rng.uniform(-kPi, kPi)},
                              0.7, 0.35};
        bool ok = true;
        for (const auto& c : box.corners())
            if (c.x < 0.05 || c.x > w - 0.05 || c.y < 0.05 || c.y > h - 0.05)
                ok = false;
        for (const auto& m : machines)
            if (boxes_overlap(box, m.box)) ok = false;
        if (ok) machines.push_back({"M" + std::to_string(machines.size()), box});
    }
    return WorldMap(w, h, std::move(machines));
}

bool pick_free_point(const Costmap& cm, Rng& rng, Vec2& out) {
    for (int i = 0; i < 200; ++i) {
        const Vec2 p{rng.uniform(0.3, 5.7), rng.uniform(0.3, 2.7)};
        if (!cm.lethal_at_world(p)) {
            out = p;
            return true;
        }
    }
    return false;
}

void check_planner_dominance() {
    const auto t0 = std::chrono::steady_clock::now();
    int solvable = 0, dominated = 0, cost_matched = 0, maps = 0;
    Rng rng(7117);
    for (int trial = 0; trial < 100; ++trial) {
        const WorldMap map = random_small_map(rng);
        const Costmap cm(map, {});
        ++maps;
        Vec2 s, g;
        if (!pick_free_point(cm, rng, s) || !pick_free_point(cm, rng, g)) continue;
        const auto theta = theta_star_plan(cm, s, g);
        const auto astar = astar_plan(cm, s, g);
        const auto dijkstra = dijkstra_plan(cm, s, g);
        if (!theta || !astar || !dijkstra) continue;
        ++solvable;
        if (theta->length <= astar->length + 1e-9) ++dominated;
        if (std::fabs(astar->cost - dijkstra->cost) <= 1e-9) ++cost_matched;
    }

    // The bundled demo instance through the actual command line.
    const std::string svg = std::filesystem::temp_directory_path() / "accept_demo.svg";
    const std::string cmd = std::string(OMNINAV_CLI_PATH) + " plan-demo --map " +
                            OMNINAV_DATA_DIR + "/plan_demo.json --svg " + svg;
    const std::string demo_out = run_command(cmd);
    int theta_segments = 1 << 20, navfn_segments = 0, astar_segments = 0;
    std::istringstream lines(demo_out);
    std::string line;
    while (std::getline(lines, line)) {
        int segs = 0;
        if (std::sscanf(line.c_str(), "thetastar: %*f m, cost %*f, %d segments", &segs) == 1)
            theta_segments = segs;
        if (std::sscanf(line.c_str(), "navfn: %*f m, cost %*f, %d segments", &segs) == 1)
            navfn_segments = segs;
        if (std::sscanf(line.c_str(), "astar: %*f m, cost %*f, %d segments", &segs) == 1)
            astar_segments = segs;
    }
    const bool demo_ok = theta_segments <= 3 && navfn_segments > theta_segments &&
                         astar_segments > theta_segments &&
                         std::filesystem::exists(svg);
    const double elapsed = seconds_since(t0);

    char note[200];
    std::snprintf(note, sizeof note,
                  "%d/%d solvable: dominance %d, cost match %d; demo segments "
                  "%d/%d/%d, %.1f s",
                  solvable, maps, dominated, cost_matched, theta_segments,
                  navfn_segments, astar_segments, elapsed);
    report("planner-dominance",
           maps == 100 && solvable > 0 && dominated == solvable &&
               cost_matched == solvable && demo_ok && elapsed < 60.0,
           note);
}

void check_localization() {
    const auto t0 = std::chrono::steady_clock::now();
    const WorldMap map = WorldMap::default_field();
    const LikelihoodField field = LikelihoodField::build(map);

    int converged = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        SimConfig cfg;
        cfg.slip_sigma = 0.0;
        cfg.imu.bias = 0.0;
        cfg.imu.rate_sigma = 0.0;
        cfg.imu.yaw_sigma = 0.0;
        cfg.lidars = SimConfig::default_lidars();
        for (auto& l : cfg.lidars) l.noise_sigma = 0.0;

        Rng trial_rng = Rng::substream(900, "trial", trial);
        Simulation sim(map, cfg, RobotGeometry::default_geometry(), 1000 + trial);
        const Pose2D start{trial_rng.uniform(1.0, 11.0), trial_rng.uniform(1.0, 5.0),
                           trial_rng.uniform(-kPi, kPi)};
        if (map.disc_collides(start.position(), 0.3)) continue;
        const int id = sim.add_robot(start);

        Localizer loc(&field, {}, Rng::substream(1000 + trial, "pf"));
        loc.reset({start.x + trial_rng.uniform(-0.5, 0.5),
                   start.y + trial_rng.uniform(-0.5, 0.5),
                   wrap_angle(start.theta + trial_rng.uniform(-0.3, 0.3))});

        int scans = 0;
        while (scans < 30) {
            sim.apply_command(id, {0.2, 0.05, 0.1});
            const auto& io = sim.step();
            if (io[id].acted && io[id].had_command)
                loc.predict(inverse_kinematics(sim.driver_geometry(), io[id].encoder_rpm),
                            0.05);
            if (io[id].has_imu) loc.on_imu(io[id].imu);
            if (io[id].has_scan) {
                loc.on_scan(io[id].scan);
                ++scans;
            }
        }
        const Pose2D est = loc.estimate();
        const Pose2D truth = sim.robot(id).pose;
        if (std::hypot(est.x - truth.x, est.y - truth.y) < 0.1 &&
            std::fabs(wrap_angle(est.theta - truth.theta)) < 0.05)
            ++converged;
    }

    // Heading error with fused IMU vs wheel integration alone, noisy run.
    const WorldMap open(12.0, 6.0, {});
    const LikelihoodField open_field = LikelihoodField::build(open);
    SimConfig noisy;
    noisy.imu.bias = 0.0;
    Simulation sim(open, noisy, RobotGeometry::default_geometry(), 77);
    const Pose2D start{6.0, 3.0, 0.0};
    const int id = sim.add_robot(start);
    Localizer::Params lp;
    lp.particle_count = 500;
    Localizer loc(&open_field, lp, Rng::substream(77, "pf"));
    loc.reset(start);
    OdometryState wheel;
    wheel.pose = start;
    double ekf_sq = 0.0, odom_sq = 0.0;
    int samples = 0;
    for (int i = 0; i < 1200; ++i) {
        const double turn = (i / 200) % 2 == 0 ? 1.0 : -1.0;
        sim.apply_command(id, {0.2, 0.0, 0.3 * turn});
        const auto& io = sim.step();
        if (io[id].acted && io[id].had_command) {
            const BodyTwist twist =
                inverse_kinematics(sim.driver_geometry(), io[id].encoder_rpm);
            loc.predict(twist, 0.05);
            wheel = update_from_wheels(wheel, io[id].encoder_rpm,
                                       sim.driver_geometry(), 0.05);
        }
        if (io[id].has_imu) loc.on_imu(io[id].imu);
        if (io[id].has_scan) loc.on_scan(io[id].scan);
        const double truth = sim.robot(id).pose.theta;
        ekf_sq += std::pow(wrap_angle(loc.ekf().mean.theta - truth), 2);
        odom_sq += std::pow(wrap_angle(wheel.pose.theta - truth), 2);
        ++samples;
    }
    const double ekf_rms = std::sqrt(ekf_sq / samples);
    const double odom_rms = std::sqrt(odom_sq / samples);
    const double elapsed = seconds_since(t0);

    char note[200];
    std::snprintf(note, sizeof note,
                  "%d/%d trials converged, heading rms %.4f vs %.4f rad, %.1f s",
                  converged, trials, ekf_rms, odom_rms, elapsed);
    report("localization-convergence",
           converged >= 48 && ekf_rms < odom_rms && elapsed < 180.0, note);
}

int bound_violations(const BodyTwist& cmd, const MppiParams& p) {
    int v = 0;
    if (cmd.vx < p.vx_min - 1e-12 || cmd.vx > p.vx_max + 1e-12) ++v;
    if (std::fabs(cmd.vy) > p.vy_max + 1e-12) ++v;
    if (std::fabs(cmd.wz) > p.wz_max + 1e-12) ++v;
    return v;
}

PlannedPath straight_path(const Vec2& a, const Vec2& b) {
    PlannedPath path;
    path.waypoints = {a, b};
    path.length = (b - a).norm();
    path.cost = path.length;
    path.planner_id = "manual";
    return path;
}

void check_controller_contract() {
    const auto t0 = std::chrono::steady_clock::now();
    const MppiParams defaults;
    const bool horizon_exact = defaults.horizon() == 4.0;

    int violations = 0;
    int commands = 0;

    // Corridor run on the default field with full default parameters.
    {
        const WorldMap map = WorldMap::default_field();
        const Costmap cm(map, {});
        MppiController c(defaults, Rng(311));
        const auto planned = theta_star_plan(cm, {1.0, 1.0}, {6.5, 5.0});
        if (!planned) {
            report("controller-contract", false, "corridor instance unsolvable");
            return;
        }
        c.set_path(*planned, cm, kPi / 2);
        Pose2D pose{1.0, 1.0, 0.0};
        for (int tick = 0; tick < 1200; ++tick) {
            const auto out = c.tick(pose, cm, {});
            if (out.goal_reached) break;
            violations += bound_violations(out.command, defaults);
            ++commands;
            pose = integrate_odometry(pose, out.command, 1.0 / defaults.frequency);
        }
    }

    // Head-on pass with both robots under default parameters.
    const WorldMap open(10.0, 4.0, {});
    const Costmap cm(open, {});
    MppiController a(defaults, Rng(91)), b(defaults, Rng(92));
    a.set_path(straight_path({1.0, 1.9}, {9.0, 1.9}), cm, 0.0);
    b.set_path(straight_path({9.0, 2.1}, {1.0, 2.1}), cm, kPi);
    Pose2D pose_a{1.0, 1.9, 0.0}, pose_b{9.0, 2.1, kPi};
    Vec2 vel_a{}, vel_b{};
    bool reached_a = false, reached_b = false;
    double min_gap = 1e300;
    const double footprint_radius = 0.23;
    for (int tick = 0; tick < 1200 && !(reached_a && reached_b); ++tick) {
        const DynamicObstacle obs_a{pose_b.position(), vel_b, footprint_radius};
        const DynamicObstacle obs_b{pose_a.position(), vel_a, footprint_radius};
        BodyTwist cmd_a{}, cmd_b{};
        if (!reached_a) {
            const auto out = a.tick(pose_a, cm, {obs_a});
            reached_a = out.goal_reached;
            cmd_a = out.command;
            violations += bound_violations(cmd_a, defaults);
            ++commands;
        }
        if (!reached_b) {
            const auto out = b.tick(pose_b, cm, {obs_b});
            reached_b = out.goal_reached;
            cmd_b = out.command;
            violations += bound_violations(cmd_b, defaults);
            ++commands;
        }
        const double dt = 1.0 / defaults.frequency;
        pose_a = integrate_odometry(pose_a, cmd_a, dt);
        pose_b = integrate_odometry(pose_b, cmd_b, dt);
        vel_a = rotate({cmd_a.vx, cmd_a.vy}, pose_a.theta);
        vel_b = rotate({cmd_b.vx, cmd_b.vy}, pose_b.theta);
        min_gap = std::min(min_gap, (pose_a.position() - pose_b.position()).norm());
    }
    const double elapsed = seconds_since(t0);

    char note[200];
    std::snprintf(note, sizeof note,
                  "horizon %.17g, %d commands, %d violations, head-on gap %.3f m, %.1f s",
                  defaults.horizon(), commands, violations, min_gap, elapsed);
    report("controller-contract",
           horizon_exact && violations == 0 && commands > 0 && reached_a &&
               reached_b && min_gap > 2.0 * footprint_radius,
           note);
}

// Truth pose nearest to a leg's end time, from the 5 Hz samples.
const TrajectorySample* sample_near(const RunRecord& rec, double t) {
    const TrajectorySample* best = nullptr;
    double best_gap = 1e300;
    for (const auto& s : rec.trajectory) {
        const double gap = std::fabs(s.t - t);
        if (gap < best_gap) {
            best_gap = gap;
            best = &s;
        }
    }
    return best;
}

void check_single_robot_experiment(const std::filesystem::path& out_root,
                                   bool& e1_available) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.seed = 42;

    cfg.out_dir = (out_root / "e1_a").string();
    const ExperimentResult first = run_experiment(cfg);
    cfg.out_dir = (out_root / "e1_b").string();
    run_experiment(cfg);
    const double elapsed = seconds_since(t0);

    int runs = static_cast<int>(first.records.size());
    int legs_failed = 0, collisions = 0;
    double worst_pos = 0.0, worst_yaw = 0.0;
    for (const auto& rec : first.records) {
        collisions += rec.collision_count;
        const auto& goals = first.waypoints[0][static_cast<size_t>(rec.path_id)];
        for (const auto& leg : rec.legs) {
            if (!leg.reached) {
                ++legs_failed;
                continue;
            }
            const Pose2D& goal = goals[static_cast<size_t>(leg.leg)];
            if (const TrajectorySample* s = sample_near(rec, leg.t_end)) {
                worst_pos = std::max(worst_pos,
                                     (s->truth.position() - goal.position()).norm());
                worst_yaw = std::max(worst_yaw,
                                     std::fabs(wrap_angle(s->truth.theta - goal.theta)));
            }
        }
    }

    bool identical = true;
    for (const char* name : {"timings.csv", "trajectories.csv", "events.csv"})
        if (slurp(out_root / "e1_a" / name) != slurp(out_root / "e1_b" / name) ||
            slurp(out_root / "e1_a" / name).empty())
            identical = false;

    char note[220];
    std::snprintf(note, sizeof note,
                  "%d runs, %d failed legs, %d collisions, worst arrival %.3f m / "
                  "%.3f rad, identical %s, %.0f s",
                  runs, legs_failed, collisions, worst_pos, worst_yaw,
                  identical ? "yes" : "no", elapsed);
    const bool pass = runs == 25 && legs_failed == 0 && collisions == 0 &&
                      worst_pos < 0.10 && worst_yaw < 0.15 && identical &&
                      elapsed < 600.0;
    e1_available = pass;
    report("single-robot-experiment", pass, note);
}

void check_three_robot_experiment(const std::filesystem::path& out_root,
                                  bool e1_available) {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.robot_count = 3;
    cfg.seed = 42;
    cfg.out_dir = (out_root / "e2").string();
    const ExperimentResult result = run_experiment(cfg);

    int machine_hits = 0, recoveries = 0, legs = 0;
    for (const auto& rec : result.records) {
        machine_hits += rec.machine_collision_count;
        recoveries += rec.recovery_count;
        legs += static_cast<int>(rec.legs.size());
    }

    // Timing logs readable, recovery counts joinable back from the event log.
    auto reread = read_timings_csv((out_root / "e2" / "timings.csv").string());
    join_recovery_counts(reread,
                         read_events_csv((out_root / "e2" / "events.csv").string()));
    int rejoined = 0;
    for (const auto& rec : reread) rejoined += rec.recovery_count;

    // Per-robot time ratio of the three-robot runs over the single-robot runs.
    std::string ratio_excerpt = "no baseline";
    bool ratio_ok = false;
    if (e1_available) {
        const Summary e2 = summarize(result.records);
        auto base_records =
            read_timings_csv((out_root / "e1_a" / "timings.csv").string());
        const Summary e1 = summarize(base_records);
        const std::string table = summary_table(e2, &e1);
        const size_t at = table.find("mean total-time ratio vs baseline ");
        if (at != std::string::npos) {
            ratio_ok = true;
            ratio_excerpt = table.substr(at, table.find('\n', at) - at);
        }
    }
    const double elapsed = seconds_since(t0);

    char note[240];
    std::snprintf(note, sizeof note,
                  "%zu runs, %d legs, %d machine hits, %d recoveries (rejoined %d), "
                  "%s, %.0f s",
                  result.records.size(), legs, machine_hits, recoveries, rejoined,
                  ratio_excerpt.c_str(), elapsed);
    report("three-robot-experiment",
           result.records.size() == 75 && machine_hits == 0 &&
               rejoined == recoveries && ratio_ok,
           note);
}

void check_calibration_roundtrip() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    const std::vector<CalibrationRow> grid = {
        {1.0, 0.3, 0.0}, {1.5, 0.6, 0.0}, {2.0, 0.5, 0.0},
        {2.5, 0.7, 0.0}, {3.0, 0.4, 0.0},
    };
    const auto reference = emit_reference(cfg, grid);
    const double scale = calibrate_scale_factor(cfg, reference);
    const double rel_err = std::fabs(scale - 0.009375) / 0.009375;
    const double elapsed = seconds_since(t0);

    char note[160];
    std::snprintf(note, sizeof note, "recovered %.9f (rel err %.2e), %.1f s",
                  scale, rel_err, elapsed);
    report("calibration-roundtrip", rel_err < 0.01, note);
}

}  // namespace

int main() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::filesystem::path out_root =
        std::filesystem::temp_directory_path() / "omninav-acceptance";
    std::filesystem::remove_all(out_root);
    std::filesystem::create_directories(out_root);

    check_kinematics_roundtrip();
    check_odometry_circle();
    check_planner_dominance();
    check_localization();
    check_controller_contract();
    bool e1_available = false;
    check_single_robot_experiment(out_root, e1_available);
    check_three_robot_experiment(out_root, e1_available);
    check_calibration_roundtrip();

    std::printf("%s: %d of 8 checks failed, %.0f s total\n",
                g_failures == 0 ? "OK" : "FAILED", g_failures, seconds_since(t0));
    return g_failures == 0 ? 0 : 1;
}
