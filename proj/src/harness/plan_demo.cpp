#include "harness/plan_demo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "core/costmap.hpp"
#include "json.hpp"

namespace omninav {

int polyline_segments(const std::vector<Vec2>& waypoints) {
    if (waypoints.size() < 2) return 0;
    int segments = 1;
    for (size_t i = 2; i < waypoints.size(); ++i) {
        const Vec2 a = waypoints[i - 1] - waypoints[i - 2];
        const Vec2 b = waypoints[i] - waypoints[i - 1];
        const double cross = a.x * b.y - a.y * b.x;
        if (std::fabs(cross) > 1e-9 || a.x * b.x + a.y * b.y < 0.0) ++segments;
    }
    return segments;
}

namespace {

struct DemoEndpoints {
    Vec2 start{1.0, 1.0};
    Vec2 goal{11.0, 5.0};
    bool has_start = false;
    bool has_goal = false;
};

DemoEndpoints read_endpoints(const std::string& map_path) {
    std::ifstream in(map_path);
    if (!in) throw std::invalid_argument("cannot open map file: " + map_path);
    nlohmann::json j = nlohmann::json::parse(in);
    DemoEndpoints ep;
    if (j.contains("start")) {
        ep.start = {j["start"].at(0).get<double>(), j["start"].at(1).get<double>()};
        ep.has_start = true;
    }
    if (j.contains("goal")) {
        ep.goal = {j["goal"].at(0).get<double>(), j["goal"].at(1).get<double>()};
        ep.has_goal = true;
    }
    return ep;
}

const char* planner_color(const std::string& id) {
    if (id == "thetastar") return "#d62728";
    if (id == "astar") return "#1f77b4";
    return "#2ca02c";
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

std::string render_demo_svg(const WorldMap& map, const Vec2& start, const Vec2& goal,
                            const std::vector<PlanDemoEntry>& entries) {
    constexpr double kScale = 80.0;
    constexpr double kMargin = 30.0;
    const double w = map.width() * kScale + 2 * kMargin;
    const double h = map.height() * kScale + 2 * kMargin + 60.0;  // legend strip
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
        svg += "<polygon points=\"";
        for (const auto& c : m.box.corners()) svg += fmt(px(c)) + "," + fmt(py(c)) + " ";
        svg += "\" fill=\"#bbbbbb\" stroke=\"#666666\" stroke-width=\"1\"/>\n";
    }
    double legend_y = map.height() * kScale + 2 * kMargin + 14.0;
    for (const auto& e : entries) {
        if (!e.solved) continue;
        svg += "<polyline points=\"";
        for (const auto& p : e.path.waypoints) svg += fmt(px(p)) + "," + fmt(py(p)) + " ";
        char attrs[200];
        std::snprintf(attrs, sizeof attrs,
                      "\" fill=\"none\" stroke=\"%s\" stroke-width=\"2\"/>\n",
                      planner_color(e.planner_id));
        svg += attrs;
        std::snprintf(attrs, sizeof attrs,
                      "<text x=\"%s\" y=\"%s\" font-size=\"14\" "
                      "font-family=\"sans-serif\" fill=\"%s\">%s: %.3f m, %d "
                      "segments</text>\n",
                      fmt(kMargin).c_str(), fmt(legend_y).c_str(),
                      planner_color(e.planner_id), e.planner_id.c_str(),
                      e.path.length, e.segments);
        svg += attrs;
        legend_y += 18.0;
    }
    char mark[200];
    std::snprintf(mark, sizeof mark,
                  "<circle cx=\"%s\" cy=\"%s\" r=\"6\" fill=\"#000000\"/>\n",
                  fmt(px(start)).c_str(), fmt(py(start)).c_str());
    svg += mark;
    std::snprintf(mark, sizeof mark,
                  "<circle cx=\"%s\" cy=\"%s\" r=\"6\" fill=\"none\" "
                  "stroke=\"#000000\" stroke-width=\"2\"/>\n",
                  fmt(px(goal)).c_str(), fmt(py(goal)).c_str());
    svg += mark;
    svg += "</svg>\n";
    return svg;
}

}  // namespace

PlanDemoResult run_plan_demo(const std::string& map_path, const std::string& focus) {
    const WorldMap map = WorldMap::load(map_path);
    const DemoEndpoints ep = read_endpoints(map_path);
    const Costmap costmap(map, {});

    std::string lead = focus.empty() ? "thetastar" : focus;
    if (lead == "navfn" || lead == "dijkstra") lead = "navfn";
    else if (lead == "astar") lead = "astar";
    else if (lead == "thetastar" || lead == "theta_star") lead = "thetastar";
    else throw std::invalid_argument("unknown planner: " + focus);

    PlanDemoResult result;
    result.start = {ep.start.x, ep.start.y, 0.0};
    result.goal = {ep.goal.x, ep.goal.y, 0.0};
    for (const char* id : {"navfn", "astar", "thetastar"}) {
        PlanDemoEntry entry;
        entry.planner_id = id;
        if (auto planned = plan_with(id, costmap, ep.start, ep.goal)) {
            entry.solved = true;
            entry.path = std::move(*planned);
            entry.segments = polyline_segments(entry.path.waypoints);
        }
        result.entries.push_back(std::move(entry));
    }

    // Lead planner first in the report, the rest in fixed order after it.
    std::ostringstream rep;
    rep.setf(std::ios::fixed);
    rep.precision(3);
    rep << "plan " << ep.start.x << "," << ep.start.y << " -> " << ep.goal.x << ","
        << ep.goal.y << " on " << map_path << "\n";
    auto write_line = [&](const PlanDemoEntry& e) {
        rep << e.planner_id << ": ";
        if (!e.solved) {
            rep << "no path\n";
            return;
        }
        rep << e.path.length << " m, cost " << e.path.cost << ", " << e.segments
            << " segments\n";
    };
    for (const auto& e : result.entries)
        if (e.planner_id == lead) write_line(e);
    for (const auto& e : result.entries)
        if (e.planner_id != lead) write_line(e);

    result.report = rep.str();
    result.svg = render_demo_svg(map, ep.start, ep.goal, result.entries);
    return result;
}

}  // namespace omninav
