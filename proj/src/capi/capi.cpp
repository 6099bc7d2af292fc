#include "omninav/omninav.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "harness/csv.hpp"
#include "harness/experiment.hpp"
#include "harness/plan_demo.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const char* what) {
    g_last_error = what ? what : "unknown error";
    return code;
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

// Exceptions map onto the two error codes: bad inputs vs everything else.
template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        return OMNINAV_OK;
    } catch (const std::invalid_argument& e) {
        return fail(OMNINAV_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return fail(OMNINAV_ERR_RUNTIME, e.what());
    }
}

omninav::Summary load_run_summary(const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path base(dir);
    auto records = omninav::read_timings_csv((base / "timings.csv").string());
    if (fs::exists(base / "events.csv"))
        omninav::join_recovery_counts(
            records, omninav::read_events_csv((base / "events.csv").string()));
    return omninav::summarize(records);
}

}  // namespace

struct omninav_experiment {
    omninav::ExperimentConfig config;
};

extern "C" {

const char* omninav_last_error(void) { return g_last_error.c_str(); }

omninav_experiment_t* omninav_experiment_create(const char* config_path) {
    if (!config_path) {
        fail(OMNINAV_ERR_INVALID_ARGUMENT, "config_path is NULL");
        return nullptr;
    }
    omninav_experiment_t* exp = nullptr;
    const int rc = guarded([&] {
        auto cfg = omninav::load_experiment_config(config_path);
        cfg.validate();
        exp = new omninav_experiment{std::move(cfg)};
    });
    return rc == OMNINAV_OK ? exp : nullptr;
}

omninav_experiment_t* omninav_experiment_create_default(void) {
    return new omninav_experiment{};
}

void omninav_experiment_destroy(omninav_experiment_t* exp) { delete exp; }

int omninav_experiment_set_seed(omninav_experiment_t* exp, uint64_t seed) {
    if (!exp) return fail(OMNINAV_ERR_INVALID_ARGUMENT, "experiment is NULL");
    exp->config.seed = seed;
    return OMNINAV_OK;
}

int omninav_experiment_set_out_dir(omninav_experiment_t* exp, const char* dir) {
    if (!exp || !dir) return fail(OMNINAV_ERR_INVALID_ARGUMENT, "NULL argument");
    exp->config.out_dir = dir;
    return OMNINAV_OK;
}

int omninav_experiment_run(omninav_experiment_t* exp) {
    if (!exp) return fail(OMNINAV_ERR_INVALID_ARGUMENT, "experiment is NULL");
    return guarded([&] { omninav::run_experiment(exp->config); });
}

int omninav_experiment_calibrate(omninav_experiment_t* exp,
                                 const char* reference_csv, double* out_scale) {
    if (!exp || !reference_csv || !out_scale)
        return fail(OMNINAV_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const auto rows = omninav::read_calibration_csv(reference_csv);
        *out_scale = omninav::calibrate_scale_factor(exp->config, rows);
    });
}

int omninav_experiment_emit_reference(omninav_experiment_t* exp,
                                      const char* out_csv) {
    if (!exp || !out_csv) return fail(OMNINAV_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const std::vector<omninav::CalibrationRow> grid = {
            {1.0, 0.3, 0.0}, {1.5, 0.6, 0.0}, {2.0, 0.5, 0.0},
            {2.5, 0.7, 0.0}, {3.0, 0.4, 0.0},
        };
        omninav::write_calibration_csv(out_csv,
                                       omninav::emit_reference(exp->config, grid));
    });
}

int omninav_plan_demo(const char* map_path, const char* planner,
                      const char* out_svg, char** out_report) {
    if (!map_path || !out_report)
        return fail(OMNINAV_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const auto demo =
            omninav::run_plan_demo(map_path, planner ? planner : "thetastar");
        if (out_svg) {
            std::ofstream svg(out_svg);
            if (!svg) throw std::runtime_error(std::string("cannot write ") + out_svg);
            svg << demo.svg;
        }
        *out_report = dup_string(demo.report);
        if (!*out_report) throw std::runtime_error("out of memory");
    });
}

int omninav_summarize(const char* in_dir, const char* baseline_dir,
                      char** out_table) {
    if (!in_dir || !out_table)
        return fail(OMNINAV_ERR_INVALID_ARGUMENT, "NULL argument");
    return guarded([&] {
        const omninav::Summary summary = load_run_summary(in_dir);
        std::string table;
        if (baseline_dir) {
            const omninav::Summary base = load_run_summary(baseline_dir);
            table = omninav::summary_table(summary, &base);
        } else {
            table = omninav::summary_table(summary, nullptr);
        }
        *out_table = dup_string(table);
        if (!*out_table) throw std::runtime_error("out of memory");
    });
}

void omninav_string_free(char* s) { std::free(s); }

}  // extern "C"
