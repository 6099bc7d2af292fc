#pragma once

#include <string>
#include <vector>

#include "harness/experiment.hpp"

namespace omninav {

// Fixed six-decimal formatting throughout so identical runs produce
// byte-identical files.

void write_timings_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_trajectories_csv(const std::string& path, const std::vector<RunRecord>& records);
void write_events_csv(const std::string& path, const std::vector<EventRow>& events);

// Rebuilds run skeletons (ids, legs, reached flags) from timings.csv;
// trajectory samples are not restored. Recovery counts are joined from
// events.csv rows of kind "recovery_start" when the file exists.
std::vector<RunRecord> read_timings_csv(const std::string& path);
std::vector<EventRow> read_events_csv(const std::string& path);
void join_recovery_counts(std::vector<RunRecord>& records,
                          const std::vector<EventRow>& events);

std::vector<CalibrationRow> read_calibration_csv(const std::string& path);
void write_calibration_csv(const std::string& path,
                           const std::vector<CalibrationRow>& rows);

}  // namespace omninav
