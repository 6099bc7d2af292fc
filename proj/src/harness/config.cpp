#include <fstream>
#include <sstream>
#include <stdexcept>

#include "harness/experiment.hpp"
#include "json.hpp"

namespace omninav {

namespace {

using nlohmann::json;

template <typename T>
void overlay(const json& j, const char* key, T& field) {
    if (j.contains(key)) j.at(key).get_to(field);
}

void overlay_geometry(const json& j, ExperimentConfig& cfg) {
    overlay(j, "wheel_angles_deg", cfg.wheel_angles_deg);
    overlay(j, "wheel_distances", cfg.wheel_distances);
    overlay(j, "wheel_radius", cfg.wheel_radius);
    overlay(j, "gear_ratio", cfg.gear_ratio);
    overlay(j, "scale_factor", cfg.scale_factor);
}

void overlay_sim(const json& j, SimConfig& sim) {
    overlay(j, "dt", sim.dt);
    overlay(j, "act_frequency_hz", sim.act_frequency_hz);
    overlay(j, "scan_frequency_hz", sim.scan_frequency_hz);
    overlay(j, "imu_frequency_hz", sim.imu_frequency_hz);
    overlay(j, "slip_sigma", sim.slip_sigma);
    overlay(j, "plant_scale", sim.plant_scale);
    overlay(j, "footprint_radius", sim.footprint_radius);
    if (j.contains("imu")) {
        const json& i = j.at("imu");
        overlay(i, "bias", sim.imu.bias);
        overlay(i, "rate_sigma", sim.imu.rate_sigma);
        overlay(i, "yaw_sigma", sim.imu.yaw_sigma);
    }
}

void overlay_mppi(const json& j, MppiParams& p) {
    overlay(j, "time_steps", p.time_steps);
    overlay(j, "model_dt", p.model_dt);
    overlay(j, "frequency", p.frequency);
    overlay(j, "motion_model", p.motion_model);
    overlay(j, "batch_size", p.batch_size);
    overlay(j, "vx_min", p.vx_min);
    overlay(j, "vx_max", p.vx_max);
    overlay(j, "vy_max", p.vy_max);
    overlay(j, "wz_max", p.wz_max);
    overlay(j, "vx_std", p.vx_std);
    overlay(j, "vy_std", p.vy_std);
    overlay(j, "wz_std", p.wz_std);
    overlay(j, "temperature", p.temperature);
    overlay(j, "w_path", p.w_path);
    overlay(j, "w_goal", p.w_goal);
    overlay(j, "w_obst", p.w_obst);
    overlay(j, "w_dyn", p.w_dyn);
    overlay(j, "w_angle", p.w_angle);
    overlay(j, "robot_radius", p.robot_radius);
    overlay(j, "dyn_safety_dist", p.dyn_safety_dist);
    overlay(j, "goal_angle_dist", p.goal_angle_dist);
    overlay(j, "lookahead_dist", p.lookahead_dist);
    overlay(j, "obst_threshold", p.obst_threshold);
}

void overlay_localizer(const json& j, Localizer::Params& p) {
    overlay(j, "particle_count", p.particle_count);
    overlay(j, "init_pos_spread", p.init_pos_spread);
    overlay(j, "init_yaw_spread", p.init_yaw_spread);
    overlay(j, "scan_subsample", p.scan_subsample);
    overlay(j, "imu_yaw_noise", p.imu_yaw_noise);
    overlay(j, "process_xy", p.process_xy);
    overlay(j, "process_theta", p.process_theta);
    if (j.contains("motion_noise")) {
        const json& m = j.at("motion_noise");
        overlay(m, "trans_scale", p.motion_noise.trans_scale);
        overlay(m, "trans_floor", p.motion_noise.trans_floor);
        overlay(m, "rot_scale", p.motion_noise.rot_scale);
        overlay(m, "rot_floor", p.motion_noise.rot_floor);
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("config root must be an object");

    ExperimentConfig cfg;
    overlay(j, "map", cfg.map_path);
    overlay(j, "robot_count", cfg.robot_count);
    overlay(j, "paths_per_experiment", cfg.paths_per_experiment);
    overlay(j, "waypoints_per_path", cfg.waypoints_per_path);
    overlay(j, "repetitions", cfg.repetitions);
    overlay(j, "seed", cfg.seed);
    overlay(j, "out_dir", cfg.out_dir);
    overlay(j, "leg_timeout", cfg.leg_timeout);
    overlay(j, "waypoint_standoff", cfg.waypoint_standoff);
    overlay(j, "waypoint_separation", cfg.waypoint_separation);
    overlay(j, "trajectory_sample_hz", cfg.trajectory_sample_hz);
    overlay(j, "obstacle_pos_noise", cfg.obstacle_pos_noise);

    if (j.contains("geometry")) overlay_geometry(j.at("geometry"), cfg);
    if (j.contains("sim")) overlay_sim(j.at("sim"), cfg.sim);
    if (j.contains("costmap")) {
        const json& c = j.at("costmap");
        overlay(c, "resolution", cfg.costmap.resolution);
        overlay(c, "robot_radius", cfg.costmap.robot_radius);
        overlay(c, "inflation_radius", cfg.costmap.inflation_radius);
    }
    if (j.contains("planner")) {
        const json& p = j.at("planner");
        overlay(p, "id", cfg.navigator.planner_id);
        overlay(p, "cost_weight", cfg.navigator.planner.cost_weight);
    }
    if (j.contains("mppi")) overlay_mppi(j.at("mppi"), cfg.navigator.mppi);
    if (j.contains("localizer")) overlay_localizer(j.at("localizer"), cfg.navigator.localizer);
    if (j.contains("progress")) {
        const json& p = j.at("progress");
        overlay(p, "min_move", cfg.navigator.progress_min_move);
        overlay(p, "window", cfg.navigator.progress_window);
    }
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["map"] = cfg.map_path;
    j["robot_count"] = cfg.robot_count;
    j["paths_per_experiment"] = cfg.paths_per_experiment;
    j["waypoints_per_path"] = cfg.waypoints_per_path;
    j["repetitions"] = cfg.repetitions;
    j["seed"] = cfg.seed;
    j["out_dir"] = cfg.out_dir;
    j["leg_timeout"] = cfg.leg_timeout;
    j["waypoint_standoff"] = cfg.waypoint_standoff;
    j["waypoint_separation"] = cfg.waypoint_separation;
    j["trajectory_sample_hz"] = cfg.trajectory_sample_hz;
    j["obstacle_pos_noise"] = cfg.obstacle_pos_noise;

    j["geometry"] = {{"wheel_angles_deg", cfg.wheel_angles_deg},
                     {"wheel_distances", cfg.wheel_distances},
                     {"wheel_radius", cfg.wheel_radius},
                     {"gear_ratio", cfg.gear_ratio},
                     {"scale_factor", cfg.scale_factor}};
    j["sim"] = {{"dt", cfg.sim.dt},
                {"act_frequency_hz", cfg.sim.act_frequency_hz},
                {"scan_frequency_hz", cfg.sim.scan_frequency_hz},
                {"imu_frequency_hz", cfg.sim.imu_frequency_hz},
                {"slip_sigma", cfg.sim.slip_sigma},
                {"plant_scale", cfg.sim.plant_scale},
                {"footprint_radius", cfg.sim.footprint_radius},
                {"imu",
                 {{"bias", cfg.sim.imu.bias},
                  {"rate_sigma", cfg.sim.imu.rate_sigma},
                  {"yaw_sigma", cfg.sim.imu.yaw_sigma}}}};
    j["costmap"] = {{"resolution", cfg.costmap.resolution},
                    {"robot_radius", cfg.costmap.robot_radius},
                    {"inflation_radius", cfg.costmap.inflation_radius}};
    j["planner"] = {{"id", cfg.navigator.planner_id},
                    {"cost_weight", cfg.navigator.planner.cost_weight}};
    const MppiParams& m = cfg.navigator.mppi;
    j["mppi"] = {{"time_steps", m.time_steps},
                 {"model_dt", m.model_dt},
                 {"frequency", m.frequency},
                 {"motion_model", m.motion_model},
                 {"batch_size", m.batch_size},
                 {"vx_min", m.vx_min},
                 {"vx_max", m.vx_max},
                 {"vy_max", m.vy_max},
                 {"wz_max", m.wz_max},
                 {"vx_std", m.vx_std},
                 {"vy_std", m.vy_std},
                 {"wz_std", m.wz_std},
                 {"temperature", m.temperature},
                 {"w_path", m.w_path},
                 {"w_goal", m.w_goal},
                 {"w_obst", m.w_obst},
                 {"w_dyn", m.w_dyn},
                 {"w_angle", m.w_angle},
                 {"robot_radius", m.robot_radius},
                 {"dyn_safety_dist", m.dyn_safety_dist},
                 {"goal_angle_dist", m.goal_angle_dist},
                 {"lookahead_dist", m.lookahead_dist},
                 {"obst_threshold", m.obst_threshold}};
    const Localizer::Params& l = cfg.navigator.localizer;
    j["localizer"] = {{"particle_count", l.particle_count},
                      {"init_pos_spread", l.init_pos_spread},
                      {"init_yaw_spread", l.init_yaw_spread},
                      {"motion_noise",
                       {{"trans_scale", l.motion_noise.trans_scale},
                        {"trans_floor", l.motion_noise.trans_floor},
                        {"rot_scale", l.motion_noise.rot_scale},
                        {"rot_floor", l.motion_noise.rot_floor}}},
                      {"scan_subsample", l.scan_subsample},
                      {"imu_yaw_noise", l.imu_yaw_noise},
                      {"process_xy", l.process_xy},
                      {"process_theta", l.process_theta}};
    j["progress"] = {{"min_move", cfg.navigator.progress_min_move},
                     {"window", cfg.navigator.progress_window}};
    return j.dump(2) + "\n";
}

}  // namespace omninav
