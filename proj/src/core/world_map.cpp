#include "core/world_map.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace omninav {

using nlohmann::json;

WorldMap::WorldMap(double width, double height, std::vector<Machine> machines)
    : width_(width), height_(height), machines_(std::move(machines)) {
    validate();
}

void WorldMap::validate() const {
    if (!(width_ > 0.0) || !(height_ > 0.0))
        throw std::invalid_argument("field dimensions must be positive");
    for (const auto& m : machines_) {
        if (!(m.box.length > 0.0) || !(m.box.width > 0.0))
            throw std::invalid_argument("machine " + m.id + " has non-positive size");
        for (const auto& c : m.box.corners()) {
            if (c.x < 0.0 || c.x > width_ || c.y < 0.0 || c.y > height_)
                throw std::invalid_argument("machine " + m.id + " extends outside the field");
        }
    }
    for (size_t i = 0; i < machines_.size(); ++i)
        for (size_t j = i + 1; j < machines_.size(); ++j)
            if (boxes_overlap(machines_[i].box, machines_[j].box))
                throw std::invalid_argument("machines " + machines_[i].id + " and " +
                                            machines_[j].id + " overlap");
}

WorldMap WorldMap::parse(const std::string& json_text) {
    json j = json::parse(json_text);
    const auto& field = j.at("field");
    const double width = field.at("width").get<double>();
    const double height = field.at("height").get<double>();
    std::vector<Machine> machines;
    if (j.contains("machines")) {
        for (const auto& jm : j.at("machines")) {
            Machine m;
            m.id = jm.at("id").get<std::string>();
            m.box.pose.x = jm.at("x").get<double>();
            m.box.pose.y = jm.at("y").get<double>();
            m.box.pose.theta = deg2rad(jm.at("theta_deg").get<double>());
            m.box.length = jm.at("length").get<double>();
            m.box.width = jm.at("width").get<double>();
            machines.push_back(std::move(m));
        }
    }
    return WorldMap(width, height, std::move(machines));
}

WorldMap WorldMap::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open map file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string WorldMap::to_json() const {
    json j;
    j["field"] = {{"width", width_}, {"height", height_}};
    j["machines"] = json::array();
    for (const auto& m : machines_) {
        j["machines"].push_back({{"id", m.id},
                                 {"x", m.box.pose.x},
                                 {"y", m.box.pose.y},
                                 {"theta_deg", rad2deg(m.box.pose.theta)},
                                 {"length", m.box.length},
                                 {"width", m.box.width}});
    }
    return j.dump(2);
}

WorldMap WorldMap::default_field() {
    auto mk = [](const char* id, double x, double y, double theta_deg) {
        Machine m;
        m.id = id;
        m.box.pose = {x, y, deg2rad(theta_deg)};
        m.box.length = 0.7;
        m.box.width = 0.35;
        return m;
    };
    std::vector<Machine> machines = {
        mk("M1", 2.0, 1.2, 45.0),  mk("M2", 10.0, 1.2, 135.0),
        mk("M3", 3.5, 3.6, 90.0),  mk("M4", 8.5, 3.6, 90.0),
        mk("M5", 1.5, 4.8, 0.0),   mk("M6", 10.5, 4.8, 0.0),
        mk("M7", 6.0, 2.4, 0.0)};
    return WorldMap(12.0, 6.0, std::move(machines));
}

bool WorldMap::inside_field(const Vec2& p, double margin) const {
    return p.x >= margin && p.x <= width_ - margin && p.y >= margin &&
           p.y <= height_ - margin;
}

double WorldMap::obstacle_distance(const Vec2& p) const {
    if (!inside_field(p)) return 0.0;
    double d = std::min(std::min(p.x, width_ - p.x), std::min(p.y, height_ - p.y));
    for (const auto& m : machines_)
        d = std::min(d, m.box.distance(p));
    return d;
}

bool WorldMap::disc_collides(const Vec2& p, double r) const {
    return obstacle_distance(p) + 1e-12 < r;
}

}  // namespace omninav
