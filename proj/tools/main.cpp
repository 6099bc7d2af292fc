#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "omninav/omninav.h"

namespace {

int report_failure(int rc) {
    std::fprintf(stderr, "error: %s\n", omninav_last_error());
    return rc;
}

int cmd_run(const std::string& config, uint64_t seed, bool seed_set,
            const std::string& out) {
    omninav_experiment_t* exp = config.empty()
                                    ? omninav_experiment_create_default()
                                    : omninav_experiment_create(config.c_str());
    if (!exp) return report_failure(1);
    if (seed_set) omninav_experiment_set_seed(exp, seed);
    if (!out.empty()) omninav_experiment_set_out_dir(exp, out.c_str());
    const int rc = omninav_experiment_run(exp);
    omninav_experiment_destroy(exp);
    if (rc != OMNINAV_OK) return report_failure(rc);
    std::printf("run complete; logs in %s\n", out.empty() ? "out" : out.c_str());
    return 0;
}

int cmd_calibrate(const std::string& config, const std::string& reference,
                  bool emit) {
    omninav_experiment_t* exp = config.empty()
                                    ? omninav_experiment_create_default()
                                    : omninav_experiment_create(config.c_str());
    if (!exp) return report_failure(1);
    int rc = OMNINAV_OK;
    if (emit) {
        rc = omninav_experiment_emit_reference(exp, reference.c_str());
        if (rc == OMNINAV_OK)
            std::printf("reference table written to %s\n", reference.c_str());
    } else {
        double scale = 0.0;
        rc = omninav_experiment_calibrate(exp, reference.c_str(), &scale);
        if (rc == OMNINAV_OK) std::printf("scale_factor %.9f\n", scale);
    }
    omninav_experiment_destroy(exp);
    return rc == OMNINAV_OK ? 0 : report_failure(rc);
}

int cmd_plan_demo(const std::string& map, const std::string& planner,
                  const std::string& out_svg) {
    char* report = nullptr;
    const int rc = omninav_plan_demo(map.c_str(),
                                     planner.empty() ? nullptr : planner.c_str(),
                                     out_svg.empty() ? nullptr : out_svg.c_str(),
                                     &report);
    if (rc != OMNINAV_OK) return report_failure(rc);
    std::fputs(report, stdout);
    omninav_string_free(report);
    if (!out_svg.empty()) std::printf("figure written to %s\n", out_svg.c_str());
    return 0;
}

int cmd_summarize(const std::string& in_dir, const std::string& baseline) {
    char* table = nullptr;
    const int rc = omninav_summarize(in_dir.c_str(),
                                     baseline.empty() ? nullptr : baseline.c_str(),
                                     &table);
    if (rc != OMNINAV_OK) return report_failure(rc);
    std::fputs(table, stdout);
    omninav_string_free(table);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"omninav: waypoint experiments for a three-wheel omni robot"};
    app.require_subcommand(1);

    std::string config, out, reference, map, planner = "thetastar", in_dir, baseline;
    std::string demo_svg = "plan_demo.svg";
    uint64_t seed = 0;
    bool emit = false;

    auto* run = app.add_subcommand("run", "run the configured waypoint experiment");
    run->add_option("--config", config, "JSON config file (defaults when omitted)");
    auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
    run->add_option("--out", out, "output directory (overrides the config)");

    auto* cal = app.add_subcommand("calibrate", "recover the drive scale factor");
    cal->add_option("--config", config, "JSON config file (defaults when omitted)");
    cal->add_option("--reference", reference, "distance,speed,time CSV")->required();
    cal->add_flag("--emit-reference", emit,
                  "write a simulated reference table to the CSV path instead");

    auto* demo = app.add_subcommand("plan-demo", "compare the three planners on a map");
    demo->add_option("--map", map, "map JSON file")->required();
    demo->add_option("--planner", planner, "navfn, astar or thetastar")
        ->check(CLI::IsMember({"navfn", "astar", "thetastar"}));
    demo->add_option("--svg", demo_svg, "output figure path");

    auto* sum = app.add_subcommand("summarize", "summarize a finished run directory");
    sum->add_option("--in", in_dir, "run directory with timings.csv")->required();
    sum->add_option("--baseline", baseline, "second run directory for ratios");

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(config, seed, seed_opt->count() > 0, out);
    if (cal->parsed()) return cmd_calibrate(config, reference, emit);
    if (demo->parsed()) return cmd_plan_demo(map, planner, demo_svg);
    if (sum->parsed()) return cmd_summarize(in_dir, baseline);
    return 1;
}
