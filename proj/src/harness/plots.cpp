#include "harness/plots.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace omninav {

namespace {

constexpr double kScale = 80.0;   // px per meter
constexpr double kMargin = 30.0;  // px border around the field

const char* robot_color(int robot_id) {
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    return palette[robot_id % 6];
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

}  // namespace

std::string render_path_svg(const WorldMap& map,
                            const std::vector<std::vector<Pose2D>>& waypoints_per_robot,
                            const std::vector<RunRecord>& records) {
    const double w = map.width() * kScale + 2 * kMargin;
    const double h = map.height() * kScale + 2 * kMargin;
    // SVG y grows downward; flip so +y is up like the field frame.
    auto px = [&](const Vec2& p) { return kMargin + p.x * kScale; };
    auto py = [&](const Vec2& p) { return kMargin + (map.height() - p.y) * kScale; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w) +
           "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) +
           "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    svg += "<rect x=\"" + fmt(kMargin) + "\" y=\"" + fmt(kMargin) + "\" width=\"" +
           fmt(map.width() * kScale) + "\" height=\"" + fmt(map.height() * kScale) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"2\"/>\n";

    for (const auto& m : map.machines()) {
        const auto corners = m.box.corners();
        svg += "<polygon points=\"";
        for (const auto& c : corners) svg += fmt(px(c)) + "," + fmt(py(c)) + " ";
        svg += "\" fill=\"#bbbbbb\" stroke=\"#666666\" stroke-width=\"1\"/>\n";
    }

    int max_rep = 0;
    for (const auto& rec : records) max_rep = std::max(max_rep, rec.repetition);
    for (const auto& rec : records) {
        if (rec.trajectory.empty()) continue;
        const double opacity =
            max_rep > 0 ? 1.0 - 0.7 * rec.repetition / max_rep : 1.0;
        svg += "<polyline points=\"";
        for (const auto& s : rec.trajectory) {
            const Vec2 p = s.truth.position();
            svg += fmt(px(p)) + "," + fmt(py(p)) + " ";
        }
        char attrs[160];
        std::snprintf(attrs, sizeof attrs,
                      "\" fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" "
                      "stroke-opacity=\"%.2f\"/>\n",
                      robot_color(rec.robot_id), opacity);
        svg += attrs;
    }

    for (size_t r = 0; r < waypoints_per_robot.size(); ++r) {
        for (size_t i = 0; i < waypoints_per_robot[r].size(); ++i) {
            const Pose2D& wp = waypoints_per_robot[r][i];
            const Vec2 p = wp.position();
            char mark[256];
            std::snprintf(mark, sizeof mark,
                          "<circle cx=\"%s\" cy=\"%s\" r=\"5\" fill=\"%s\" "
                          "stroke=\"#000000\" stroke-width=\"0.5\"/>\n",
                          fmt(px(p)).c_str(), fmt(py(p)).c_str(),
                          robot_color(static_cast<int>(r)));
            svg += mark;
            std::snprintf(mark, sizeof mark,
                          "<text x=\"%s\" y=\"%s\" font-size=\"11\" "
                          "font-family=\"sans-serif\">%zu</text>\n",
                          fmt(px(p) + 7.0).c_str(), fmt(py(p) - 7.0).c_str(), i);
            svg += mark;
        }
    }

    svg += "</svg>\n";
    return svg;
}

void write_path_plots(const std::string& out_dir, const WorldMap& map,
                      const ExperimentResult& result) {
    std::filesystem::create_directories(out_dir);
    std::set<int> path_ids;
    for (const auto& rec : result.records) path_ids.insert(rec.path_id);

    for (int p : path_ids) {
        std::vector<std::vector<Pose2D>> waypoints;
        for (const auto& per_robot : result.waypoints)
            if (static_cast<size_t>(p) < per_robot.size())
                waypoints.push_back(per_robot[static_cast<size_t>(p)]);
        std::vector<RunRecord> subset;
        for (const auto& rec : result.records)
            if (rec.path_id == p) subset.push_back(rec);

        const std::filesystem::path file =
            std::filesystem::path(out_dir) / ("path_" + std::to_string(p) + ".svg");
        std::ofstream out(file);
        if (!out) throw std::runtime_error("cannot write " + file.string());
        out << render_path_svg(map, waypoints, subset);
    }
}

}  // namespace omninav
