#ifndef OMNINAV_H
#define OMNINAV_H

/* C interface to the omninav simulation and navigation stack. All functions
 * returning int yield OMNINAV_OK on success; on failure they return an error
 * code and leave a message readable through omninav_last_error(). Strings
 * handed out through char** parameters are heap-allocated and must be
 * released with omninav_string_free(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

enum omninav_status {
    OMNINAV_OK = 0,
    OMNINAV_ERR_INVALID_ARGUMENT = 1,
    OMNINAV_ERR_RUNTIME = 2,
};

/* Message from the most recent failing call on the calling thread. Never
 * NULL; empty before the first failure. */
const char* omninav_last_error(void);

/* An experiment handle owns one run configuration. */
typedef struct omninav_experiment omninav_experiment_t;

/* Loads a JSON config file; NULL on failure (see omninav_last_error). */
omninav_experiment_t* omninav_experiment_create(const char* config_path);

/* All-defaults configuration (built-in field, one robot). */
omninav_experiment_t* omninav_experiment_create_default(void);

void omninav_experiment_destroy(omninav_experiment_t* exp);

int omninav_experiment_set_seed(omninav_experiment_t* exp, uint64_t seed);
int omninav_experiment_set_out_dir(omninav_experiment_t* exp, const char* dir);

/* Runs the configured waypoint protocol and writes timings.csv,
 * trajectories.csv, events.csv and per-path SVG figures to the out dir. */
int omninav_experiment_run(omninav_experiment_t* exp);

/* Reads a distance,speed,time CSV and recovers the drive scale factor from
 * simulated travel times. */
int omninav_experiment_calibrate(omninav_experiment_t* exp,
                                 const char* reference_csv, double* out_scale);

/* Writes a fresh reference table (built-in distance and speed grid, times
 * simulated with the configured geometry) to out_csv. */
int omninav_experiment_emit_reference(omninav_experiment_t* exp,
                                      const char* out_csv);

/* Plans between the map's embedded start/goal with all three planners and
 * stores a comparison figure at out_svg (skipped when NULL). planner picks
 * which one the report leads with: "navfn", "astar" or "thetastar"; NULL
 * means "thetastar". *out_report receives the comparison text. */
int omninav_plan_demo(const char* map_path, const char* planner,
                      const char* out_svg, char** out_report);

/* Builds the timing summary of a finished run directory (timings.csv plus
 * events.csv). With a baseline directory, appends per-robot total-time
 * ratios. *out_table receives the rendered table. */
int omninav_summarize(const char* in_dir, const char* baseline_dir,
                      char** out_table);

void omninav_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* OMNINAV_H */
