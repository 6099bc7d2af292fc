#include "harness/csv.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace omninav {

namespace {

std::string fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return in;
}

std::vector<std::string> split_csv_line(const std::string& line, size_t max_fields) {
    // The last field may contain commas (event detail), so stop splitting
    // once max_fields are collected.
    std::vector<std::string> fields;
    size_t start = 0;
    while (fields.size() + 1 < max_fields) {
        const size_t comma = line.find(',', start);
        if (comma == std::string::npos) break;
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    fields.push_back(line.substr(start));
    return fields;
}

}  // namespace

void write_timings_csv(const std::string& path, const std::vector<RunRecord>& records) {
    auto out = open_out(path);
    out << "experiment,path,rep,robot,leg,t_start,t_end,duration,reached\n";
    for (const auto& rec : records)
        for (const auto& leg : rec.legs)
            out << rec.experiment_id << ',' << rec.path_id << ',' << rec.repetition
                << ',' << rec.robot_id << ',' << leg.leg << ',' << fixed6(leg.t_start)
                << ',' << fixed6(leg.t_end) << ',' << fixed6(leg.duration()) << ','
                << (leg.reached ? 1 : 0) << '\n';
}

void write_trajectories_csv(const std::string& path,
                            const std::vector<RunRecord>& records) {
    auto out = open_out(path);
    out << "t,robot,x,y,theta,est_x,est_y,est_theta\n";
    for (const auto& rec : records)
        for (const auto& s : rec.trajectory)
            out << fixed6(s.t) << ',' << rec.robot_id << ',' << fixed6(s.truth.x) << ','
                << fixed6(s.truth.y) << ',' << fixed6(s.truth.theta) << ','
                << fixed6(s.estimate.x) << ',' << fixed6(s.estimate.y) << ','
                << fixed6(s.estimate.theta) << '\n';
}

void write_events_csv(const std::string& path, const std::vector<EventRow>& events) {
    auto out = open_out(path);
    out << "t,robot,kind,detail\n";
    for (const auto& ev : events)
        out << fixed6(ev.t) << ',' << ev.robot << ',' << ev.kind << ',' << ev.detail
            << '\n';
}

std::vector<RunRecord> read_timings_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("experiment,", 0) != 0)
        throw std::runtime_error(path + " is not a timings file");

    // Key on (path, rep, robot) to regroup leg rows into runs.
    std::map<std::tuple<int, int, int>, RunRecord> runs;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line, 9);
        if (f.size() != 9) throw std::runtime_error("malformed timings row: " + line);
        const int path_id = std::stoi(f[1]);
        const int rep = std::stoi(f[2]);
        const int robot = std::stoi(f[3]);
        RunRecord& rec = runs[{path_id, rep, robot}];
        rec.experiment_id = f[0];
        rec.path_id = path_id;
        rec.repetition = rep;
        rec.robot_id = robot;
        rec.legs.push_back({std::stoi(f[4]), std::stod(f[5]), std::stod(f[6]),
                            std::stoi(f[8]) != 0});
    }
    std::vector<RunRecord> records;
    records.reserve(runs.size());
    for (auto& [key, rec] : runs) records.push_back(std::move(rec));
    return records;
}

std::vector<EventRow> read_events_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,", 0) != 0)
        throw std::runtime_error(path + " is not an events file");
    std::vector<EventRow> events;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line, 4);
        if (f.size() != 4) throw std::runtime_error("malformed events row: " + line);
        events.push_back({std::stod(f[0]), std::stoi(f[1]), f[2], f[3]});
    }
    return events;
}

void join_recovery_counts(std::vector<RunRecord>& records,
                          const std::vector<EventRow>& events) {
    for (const auto& ev : events) {
        if (ev.kind != "recovery_start") continue;
        int path_id = -1, rep = -1;
        std::istringstream ss(ev.detail);
        std::string token;
        while (ss >> token) {
            if (token.rfind("path=", 0) == 0) path_id = std::stoi(token.substr(5));
            if (token.rfind("rep=", 0) == 0) rep = std::stoi(token.substr(4));
        }
        for (auto& rec : records)
            if (rec.path_id == path_id && rec.repetition == rep &&
                rec.robot_id == ev.robot)
                ++rec.recovery_count;
    }
}

std::vector<CalibrationRow> read_calibration_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    std::vector<CalibrationRow> rows;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            if (line.rfind("distance", 0) == 0) continue;  // header optional
        }
        const auto f = split_csv_line(line, 3);
        if (f.size() != 3)
            throw std::runtime_error("calibration rows need distance,speed,time: " + line);
        rows.push_back({std::stod(f[0]), std::stod(f[1]), std::stod(f[2])});
    }
    return rows;
}

void write_calibration_csv(const std::string& path,
                           const std::vector<CalibrationRow>& rows) {
    auto out = open_out(path);
    out << "distance,speed,time\n";
    for (const auto& r : rows)
        out << fixed6(r.distance) << ',' << fixed6(r.speed) << ',' << fixed6(r.time)
            << '\n';
}

}  // namespace omninav
