#pragma once

#include <string>
#include <vector>

#include "core/geometry.hpp"

namespace omninav {

struct Machine {
    std::string id;
    OrientedBox box;
};

// Static field geometry: a rectangular walled field with cuboid machine
// footprints as obstacles. Machines must lie fully inside the field and may
// not overlap each other; validation runs on construction and load.
class WorldMap {
public:
    WorldMap(double width, double height, std::vector<Machine> machines);

    static WorldMap load(const std::string& path);
    static WorldMap parse(const std::string& json_text);
    std::string to_json() const;

    // 12 m x 6 m field with seven machines placed mirror-symmetrically.
    static WorldMap default_field();

    double width() const { return width_; }
    double height() const { return height_; }
    const std::vector<Machine>& machines() const { return machines_; }

    bool inside_field(const Vec2& p, double margin = 0.0) const;

    // Distance from p to the nearest obstacle surface (machine outline or
    // field border); 0 inside a machine or outside the field.
    double obstacle_distance(const Vec2& p) const;

    // True if a disc of radius r centered at p intersects a machine or the
    // field border.
    bool disc_collides(const Vec2& p, double r) const;

private:
    void validate() const;

    double width_;
    double height_;
    std::vector<Machine> machines_;
};

}  // namespace omninav
