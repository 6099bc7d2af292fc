#include "harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <stdexcept>

#include "core/kinematics.hpp"
#include "harness/csv.hpp"
#include "harness/plots.hpp"

namespace omninav {

namespace {

uint64_t derive_seed(uint64_t master, std::string_view label, uint64_t index) {
    return hash_combine(hash_combine(master, hash_label(label)), index);
}

std::string run_context(int path_id, int rep) {
    return "path=" + std::to_string(path_id) + " rep=" + std::to_string(rep);
}

}  // namespace

void ExperimentConfig::validate() const {
    if (robot_count != 1 && robot_count != 3)
        throw std::invalid_argument("robot_count must be 1 or 3");
    if (paths_per_experiment < 1 || waypoints_per_path < 1 || repetitions < 1)
        throw std::invalid_argument("counts must be >= 1");
    if (!(leg_timeout > 0.0)) throw std::invalid_argument("leg_timeout must be positive");
    if (!(waypoint_standoff > 0.0) || !(waypoint_separation >= 0.0))
        throw std::invalid_argument("waypoint geometry must be positive");
    if (!(trajectory_sample_hz > 0.0))
        throw std::invalid_argument("trajectory_sample_hz must be positive");
    if (obstacle_pos_noise < 0.0)
        throw std::invalid_argument("obstacle_pos_noise must be non-negative");
    driver_geometry();         // throws on degenerate drive geometry
    navigator.mppi.validate();
}

RobotGeometry ExperimentConfig::driver_geometry() const {
    return RobotGeometry({deg2rad(wheel_angles_deg[0]), deg2rad(wheel_angles_deg[1]),
                          deg2rad(wheel_angles_deg[2])},
                         wheel_distances, wheel_radius, gear_ratio, scale_factor);
}

WorldMap ExperimentConfig::load_map() const {
    return map_path.empty() ? WorldMap::default_field() : WorldMap::load(map_path);
}

double RunRecord::total_time() const {
    double sum = 0.0;
    for (const auto& leg : legs) sum += leg.duration();
    return sum;
}

std::vector<Pose2D> generate_waypoints(const WorldMap& map, const Costmap& costmap,
                                       Rng& rng, int n, double standoff,
                                       double separation) {
    if (map.machines().empty())
        throw std::invalid_argument("waypoint generation needs at least one machine");
    if (n < 1) throw std::invalid_argument("waypoint count must be >= 1");

    std::vector<Pose2D> points;
    points.reserve(static_cast<size_t>(n));
    int budget = 1000;
    while (static_cast<int>(points.size()) < n) {
        if (budget-- <= 0)
            throw std::runtime_error("waypoint sampling budget exhausted; "
                                     "relax separation or standoff");
        const Machine& m =
            map.machines()[rng.uniform_index(map.machines().size())];
        const int side = static_cast<int>(rng.uniform_index(4));
        // Local face center and outward normal of the chosen side.
        const double hl = 0.5 * m.box.length, hw = 0.5 * m.box.width;
        Vec2 center_local, normal_local;
        switch (side) {
            case 0: center_local = {hl, 0.0};  normal_local = {1.0, 0.0};  break;
            case 1: center_local = {-hl, 0.0}; normal_local = {-1.0, 0.0}; break;
            case 2: center_local = {0.0, hw};  normal_local = {0.0, 1.0};  break;
            default: center_local = {0.0, -hw}; normal_local = {0.0, -1.0}; break;
        }
        const Vec2 face = m.box.pose.position() + rotate(center_local, m.box.pose.theta);
        const Vec2 normal = rotate(normal_local, m.box.pose.theta);
        const Vec2 pos = face + normal * standoff;
        const double heading = wrap_angle(std::atan2(-normal.y, -normal.x));

        if (costmap.cost_at_world(pos) == kLethalCost) continue;
        bool too_close = false;
        for (const auto& prev : points)
            if ((pos - prev.position()).norm() < separation) too_close = true;
        if (too_close) continue;
        points.push_back({pos.x, pos.y, heading});
    }
    return points;
}

namespace {

// Per-robot leg progress inside one world.
struct RobotRun {
    Navigator* nav = nullptr;
    const std::vector<Pose2D>* waypoints = nullptr;
    int next_waypoint = 1;  // waypoint the active leg is heading to
    double leg_start = 0.0;
    bool done = false;
    bool was_colliding = false;
    RunRecord record;
};

void close_leg(RobotRun& run, double now, bool reached,
               std::vector<EventRow>* events, const std::string& context) {
    run.record.legs.push_back(
        {run.next_waypoint, run.leg_start, now, reached});
    run.record.waypoint_reached[static_cast<size_t>(run.next_waypoint)] = reached;
    if (!reached && events)
        events->push_back({now, run.record.robot_id, "leg_failed",
                           context + " leg=" + std::to_string(run.next_waypoint)});
    ++run.next_waypoint;
}

void dispatch_or_finish(RobotRun& run, double now) {
    if (run.next_waypoint >= static_cast<int>(run.waypoints->size())) {
        run.done = true;
        return;
    }
    run.leg_start = now;
    run.nav->set_goal((*run.waypoints)[static_cast<size_t>(run.next_waypoint)], now);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const WorldMap map = cfg.load_map();
    const Costmap costmap(map, cfg.costmap);
    const LikelihoodField field = LikelihoodField::build(map);
    const RobotGeometry driver = cfg.driver_geometry();

    // Waypoints per robot and path. A fresh robot stream per path keeps the
    // sets independent; first waypoints of one world must not coincide
    // (robots spawn there), so later robots reroll on a spawn conflict.
    ExperimentResult result;
    result.waypoints.resize(static_cast<size_t>(cfg.robot_count));
    for (int r = 0; r < cfg.robot_count; ++r) {
        auto& per_path = result.waypoints[static_cast<size_t>(r)];
        per_path.resize(static_cast<size_t>(cfg.paths_per_experiment));
        for (int p = 0; p < cfg.paths_per_experiment; ++p) {
            const uint64_t stream =
                static_cast<uint64_t>(r) * 1000 + static_cast<uint64_t>(p);
            for (uint64_t reroll = 0;; ++reroll) {
                Rng rng = Rng::substream(cfg.seed, "waypoints", stream + 100000 * reroll);
                auto candidate = generate_waypoints(map, costmap, rng,
                                                    cfg.waypoints_per_path,
                                                    cfg.waypoint_standoff,
                                                    cfg.waypoint_separation);
                bool spawn_clash = false;
                for (int q = 0; q < r; ++q) {
                    const Vec2 other =
                        result.waypoints[static_cast<size_t>(q)][static_cast<size_t>(p)][0]
                            .position();
                    if ((candidate[0].position() - other).norm() < cfg.waypoint_separation)
                        spawn_clash = true;
                }
                if (!spawn_clash) {
                    per_path[static_cast<size_t>(p)] = std::move(candidate);
                    break;
                }
                if (reroll > 50)
                    throw std::runtime_error("could not separate robot spawns");
            }
        }
    }

    const int sample_every = std::max(
        1, static_cast<int>(std::lround(cfg.sim.act_frequency_hz / cfg.trajectory_sample_hz)));
    const double world_cap =
        cfg.leg_timeout * (cfg.waypoints_per_path - 1) + 60.0;

    for (int p = 0; p < cfg.paths_per_experiment; ++p) {
        for (int rep = 0; rep < cfg.repetitions; ++rep) {
            const uint64_t world_index =
                static_cast<uint64_t>(p) * 1000 + static_cast<uint64_t>(rep);
            Simulation sim(map, cfg.sim, driver,
                           derive_seed(cfg.seed, "world", world_index));
            Rng obstacle_rng =
                Rng::substream(cfg.seed, "obstacle-noise", world_index);
            const std::string context = run_context(p, rep);

            std::vector<Navigator> navs;
            navs.reserve(static_cast<size_t>(cfg.robot_count));
            std::vector<RobotRun> runs(static_cast<size_t>(cfg.robot_count));
            for (int r = 0; r < cfg.robot_count; ++r) {
                const auto& wps = result.waypoints[static_cast<size_t>(r)][static_cast<size_t>(p)];
                sim.add_robot(wps[0]);
                navs.emplace_back(&costmap, &field, cfg.navigator,
                                  derive_seed(cfg.seed, "navigator",
                                              world_index * 10 + static_cast<uint64_t>(r)));
                auto& run = runs[static_cast<size_t>(r)];
                run.nav = &navs.back();
                run.waypoints = &wps;
                run.record.experiment_id = cfg.experiment_id();
                run.record.path_id = p;
                run.record.repetition = rep;
                run.record.robot_id = r;
                run.record.waypoint_reached.assign(wps.size(), false);
                run.record.waypoint_reached[0] = true;  // spawns there
                run.nav->reset_pose(wps[0]);
            }
            // First legs start at t = 0.
            for (auto& run : runs) dispatch_or_finish(run, 0.0);

            size_t seen_sim_events = 0;
            int64_t tick = 0;
            bool all_done = false;
            while (!all_done && sim.clock().time() < world_cap) {
                const auto& io = sim.step();
                const double now = sim.clock().time();
                ++tick;

                for (int r = 0; r < cfg.robot_count; ++r) {
                    auto& run = runs[static_cast<size_t>(r)];
                    if (io[static_cast<size_t>(r)].acted)
                        run.nav->on_odometry(
                            inverse_kinematics(driver, io[static_cast<size_t>(r)].encoder_rpm),
                            1.0 / cfg.sim.act_frequency_hz);
                    if (io[static_cast<size_t>(r)].has_imu)
                        run.nav->on_imu(io[static_cast<size_t>(r)].imu);
                    if (io[static_cast<size_t>(r)].has_scan)
                        run.nav->on_scan(io[static_cast<size_t>(r)].scan);
                }

                for (int r = 0; r < cfg.robot_count; ++r) {
                    auto& run = runs[static_cast<size_t>(r)];

                    // Collision episode counting from the world's contacts.
                    const bool colliding = io[static_cast<size_t>(r)].collided;
                    if (colliding && !run.was_colliding) {
                        ++run.record.collision_count;
                        const Pose2D& at = sim.robot(r).pose;
                        if (map.disc_collides(at.position(),
                                              cfg.sim.footprint_radius + 1e-6))
                            ++run.record.machine_collision_count;
                    }
                    run.was_colliding = colliding;

                    if (run.done) {
                        sim.apply_command(r, {});
                        continue;
                    }

                    // The others as noisy moving discs.
                    std::vector<DynamicObstacle> obstacles;
                    for (int q = 0; q < cfg.robot_count; ++q) {
                        if (q == r) continue;
                        const RobotState& other = sim.robot(q);
                        DynamicObstacle obs;
                        obs.position = other.pose.position() +
                                       Vec2{obstacle_rng.normal(0.0, cfg.obstacle_pos_noise),
                                            obstacle_rng.normal(0.0, cfg.obstacle_pos_noise)};
                        obs.velocity = rotate({other.twist.vx, other.twist.vy},
                                              other.pose.theta);
                        obs.radius = cfg.sim.footprint_radius;
                        obstacles.push_back(obs);
                    }

                    const BodyTwist cmd = run.nav->control(now, obstacles);
                    sim.apply_command(r, cmd);

                    for (auto& ev : run.nav->drain_events())
                        result.events.push_back({ev.t, r, ev.kind,
                                                 ev.detail.empty()
                                                     ? context
                                                     : context + " " + ev.detail});

                    if (run.nav->phase() == NavPhase::reached) {
                        close_leg(run, now, true, nullptr, context);
                        dispatch_or_finish(run, now);
                    } else if (run.nav->phase() == NavPhase::failed) {
                        close_leg(run, now, false, &result.events, context);
                        dispatch_or_finish(run, now);
                    } else if (now - run.leg_start > cfg.leg_timeout) {
                        result.events.push_back({now, r, "leg_timeout",
                                                 context + " leg=" +
                                                     std::to_string(run.next_waypoint)});
                        close_leg(run, now, false, nullptr, context);
                        dispatch_or_finish(run, now);
                    }
                }

                if (tick % sample_every == 0) {
                    for (int r = 0; r < cfg.robot_count; ++r) {
                        auto& run = runs[static_cast<size_t>(r)];
                        run.record.trajectory.push_back(
                            {now, sim.robot(r).pose, run.nav->estimate()});
                    }
                }

                const auto& sim_events = sim.events();
                for (; seen_sim_events < sim_events.size(); ++seen_sim_events) {
                    const SimEvent& ev = sim_events[seen_sim_events];
                    if (ev.kind != "collision") continue;
                    result.events.push_back(
                        {static_cast<double>(ev.step) * cfg.sim.dt, ev.robot_id,
                         ev.kind, context + " " + ev.detail});
                }

                all_done = true;
                for (const auto& run : runs) all_done = all_done && run.done;
            }

            // A world hitting the hard cap closes any open leg as failed.
            for (auto& run : runs) {
                while (!run.done) {
                    close_leg(run, sim.clock().time(), false, &result.events, context);
                    dispatch_or_finish(run, sim.clock().time());
                }
                run.record.recovery_count = run.nav->recovery_count();
                result.records.push_back(std::move(run.record));
            }
        }
    }

    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        const std::filesystem::path out(cfg.out_dir);
        write_timings_csv((out / "timings.csv").string(), result.records);
        write_trajectories_csv((out / "trajectories.csv").string(), result.records);
        write_events_csv((out / "events.csv").string(), result.events);
        write_path_plots(cfg.out_dir, map, result);
    }
    return result;
}

namespace {

// Time for the plant to cover `distance` under a constant +x command, with
// slip disabled and the crossing interpolated inside the step, so constant
// speed gives the exact distance/speed quotient.
double bench_travel_time(const ExperimentConfig& cfg, const RobotGeometry& driver,
                         const CalibrationRow& row, uint64_t seed) {
    SimConfig sim_cfg = cfg.sim;
    sim_cfg.slip_sigma = 0.0;
    const WorldMap lane(12.0, 6.0, {});
    Simulation sim(lane, sim_cfg, driver, seed);
    const Pose2D start{0.5, 3.0, 0.0};
    const int id = sim.add_robot(start);

    double prev_x = 0.0, prev_t = 0.0;
    const double cap = 120.0;
    while (sim.clock().time() < cap) {
        sim.apply_command(id, {row.speed, 0.0, 0.0});
        sim.step();
        const double x = sim.robot(id).pose.x - start.x;
        const double t = sim.clock().time();
        if (x >= row.distance) {
            if (x == prev_x) break;  // wedged against something
            return prev_t + (row.distance - prev_x) / (x - prev_x) * (t - prev_t);
        }
        prev_x = x;
        prev_t = t;
    }
    throw std::runtime_error("calibration run never covered its distance");
}

void validate_rows(const std::vector<CalibrationRow>& rows, bool need_times) {
    if (rows.empty()) throw std::invalid_argument("reference table is empty");
    for (const auto& row : rows) {
        if (!(row.distance > 0.0))
            throw std::invalid_argument("reference rows need a positive distance");
        if (row.distance > 6.0)
            throw std::invalid_argument("reference distance exceeds the 6 m bench lane");
        if (!(row.speed > 0.0))
            throw std::invalid_argument("reference rows need a positive speed");
        if (need_times && !(row.time > 0.0))
            throw std::invalid_argument("reference rows need a positive time");
    }
}

}  // namespace

double calibrate_scale_factor(const ExperimentConfig& cfg,
                              const std::vector<CalibrationRow>& reference) {
    validate_rows(reference, true);
    const RobotGeometry unscaled = cfg.driver_geometry().with_scale_factor(1.0);
    double ratio_sum = 0.0;
    for (size_t i = 0; i < reference.size(); ++i) {
        const double sim_time = bench_travel_time(
            cfg, unscaled, reference[i], derive_seed(cfg.seed, "calibration", i));
        ratio_sum += sim_time / reference[i].time;
    }
    return ratio_sum / static_cast<double>(reference.size());
}

std::vector<CalibrationRow> emit_reference(const ExperimentConfig& cfg,
                                           std::vector<CalibrationRow> rows) {
    validate_rows(rows, false);
    const RobotGeometry driver = cfg.driver_geometry();
    for (size_t i = 0; i < rows.size(); ++i)
        rows[i].time = bench_travel_time(cfg, driver, rows[i],
                                         derive_seed(cfg.seed, "calibration", i));
    return rows;
}

Summary summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("no records to summarize");
    Summary s;
    std::map<int, PathSummary> paths;
    std::map<int, double> robots;
    for (const auto& rec : records) {
        const double total = rec.total_time();
        auto [it, fresh] = paths.try_emplace(rec.path_id);
        PathSummary& ps = it->second;
        ps.path_id = rec.path_id;
        if (fresh) {
            ps.min_total = total;
            ps.max_total = total;
        }
        ps.min_total = std::min(ps.min_total, total);
        ps.max_total = std::max(ps.max_total, total);
        ps.mean_total += total;  // sum for now, divided below
        ps.runs += 1;
        for (const auto& leg : rec.legs) ps.failed_legs += leg.reached ? 0 : 1;
        ps.recoveries += rec.recovery_count;
        robots[rec.robot_id] += total;
        s.grand_total += total;
    }
    for (auto& [id, ps] : paths) {
        ps.mean_total /= static_cast<double>(ps.runs);
        s.failed_legs += ps.failed_legs;
        s.recoveries += ps.recoveries;
        s.paths.push_back(ps);
    }
    for (const auto& [id, total] : robots) s.robots.push_back({id, total});
    return s;
}

std::string summary_table(const Summary& summary, const Summary* baseline) {
    char line[160];
    std::string out;
    out += "path  runs  mean_s    min_s     max_s     failed  recoveries\n";
    for (const auto& ps : summary.paths) {
        std::snprintf(line, sizeof line, "%-5d %-5d %-9.3f %-9.3f %-9.3f %-7d %d\n",
                      ps.path_id, ps.runs, ps.mean_total, ps.min_total, ps.max_total,
                      ps.failed_legs, ps.recoveries);
        out += line;
    }
    std::snprintf(line, sizeof line,
                  "total %.3f s over %zu paths, %d failed legs, %d recoveries\n",
                  summary.grand_total, summary.paths.size(), summary.failed_legs,
                  summary.recoveries);
    out += line;
    for (const auto& rt : summary.robots) {
        std::snprintf(line, sizeof line, "robot %d total %.3f s\n", rt.robot_id, rt.total);
        out += line;
    }
    if (baseline && !baseline->robots.empty()) {
        double base_mean = 0.0;
        for (const auto& rt : baseline->robots) base_mean += rt.total;
        base_mean /= static_cast<double>(baseline->robots.size());
        double ratio_sum = 0.0;
        for (const auto& rt : summary.robots) {
            double denom = base_mean;
            for (const auto& brt : baseline->robots)
                if (brt.robot_id == rt.robot_id) denom = brt.total;
            const double ratio = rt.total / denom;
            ratio_sum += ratio;
            std::snprintf(line, sizeof line, "robot %d total-time ratio vs baseline %.6f\n",
                          rt.robot_id, ratio);
            out += line;
        }
        std::snprintf(line, sizeof line, "mean total-time ratio vs baseline %.6f\n",
                      ratio_sum / static_cast<double>(summary.robots.size()));
        out += line;
    }
    return out;
}

}  // namespace omninav
