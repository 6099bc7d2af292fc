#include "core/planners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace omninav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = 1.41421356237309514547;

struct QueueEntry {
    double f;
    double h;
    int idx;
    bool operator>(const QueueEntry& o) const {
        if (f != o.f) return f > o.f;
        if (h != o.h) return h > o.h;
        return idx > o.idx;
    }
};

using MinQueue = std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<>>;

struct GridRef {
    const Costmap& map;
    int w, h;

    int idx(int x, int y) const { return y * w + x; }
    int xof(int i) const { return i % w; }
    int yof(int i) const { return i / w; }
    bool free_cell(int x, int y) const {
        return map.in_bounds(x, y) && !map.lethal(x, y);
    }
};

const int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
const int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

// Diagonal moves require both adjacent cardinal cells to be free; a path may
// never cut a lethal corner.
bool move_allowed(const GridRef& g, int x, int y, int k) {
    const int nx = x + kDx[k], ny = y + kDy[k];
    if (!g.free_cell(nx, ny)) return false;
    if (kDx[k] != 0 && kDy[k] != 0) {
        if (!g.free_cell(x + kDx[k], y) || !g.free_cell(x, y + kDy[k])) return false;
    }
    return true;
}

double euclid_cells(const Costmap& map, int ax, int ay, int bx, int by) {
    const double dx = static_cast<double>(bx - ax) * map.resolution();
    const double dy = static_cast<double>(by - ay) * map.resolution();
    return std::hypot(dx, dy);
}

double polyline_length(const std::vector<Vec2>& pts) {
    double len = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
    return len;
}

void push_if_distinct(std::vector<Vec2>& pts, const Vec2& p) {
    if (!pts.empty() && (pts.back() - p).squared_norm() < 1e-24) return;
    pts.push_back(p);
}

// Shared 8-connected search over (distance + weighted cell cost). With
// use_heuristic the euclidean lower bound is added, which never changes the
// returned cost.
std::optional<PlannedPath> grid_plan(const Costmap& map, const Vec2& start,
                                     const Vec2& goal, const PlannerParams& params,
                                     bool use_heuristic, const char* planner_id) {
    GridRef g{map, map.width(), map.height()};
    int sx, sy, gx, gy;
    if (!map.world_to_cell(start, sx, sy) || !map.world_to_cell(goal, gx, gy))
        return std::nullopt;
    if (map.lethal(sx, sy) || map.lethal(gx, gy)) return std::nullopt;

    PlannedPath path;
    path.planner_id = planner_id;
    if (sx == gx && sy == gy) {
        push_if_distinct(path.waypoints, start);
        push_if_distinct(path.waypoints, goal);
        path.length = polyline_length(path.waypoints);
        path.cost = 0.0;
        return path;
    }

    const double res = map.resolution();
    const int n = g.w * g.h;
    std::vector<double> gval(n, kInf);
    std::vector<int> parent(n, -1);
    std::vector<uint8_t> closed(n, 0);
    MinQueue open;

    const int start_idx = g.idx(sx, sy), goal_idx = g.idx(gx, gy);
    gval[start_idx] = 0.0;
    const double h0 = use_heuristic ? euclid_cells(map, sx, sy, gx, gy) : 0.0;
    open.push({h0, h0, start_idx});

    while (!open.empty()) {
        const QueueEntry top = open.top();
        open.pop();
        const int cur = top.idx;
        if (closed[cur]) continue;
        closed[cur] = 1;
        if (cur == goal_idx) break;
        const int cx = g.xof(cur), cy = g.yof(cur);
        for (int k = 0; k < 8; ++k) {
            if (!move_allowed(g, cx, cy, k)) continue;
            const int nx = cx + kDx[k], ny = cy + kDy[k];
            const int ni = g.idx(nx, ny);
            if (closed[ni]) continue;
            const double step = (kDx[k] != 0 && kDy[k] != 0) ? res * kSqrt2 : res;
            const double soft = params.cost_weight *
                                (static_cast<double>(map.cost(nx, ny)) / kMaxInflatedCost);
            const double cand = gval[cur] + step * (1.0 + soft);
            if (cand + 1e-15 < gval[ni]) {
                gval[ni] = cand;
                parent[ni] = cur;
                const double h = use_heuristic ? euclid_cells(map, nx, ny, gx, gy) : 0.0;
                open.push({cand + h, h, ni});
            }
        }
    }

    if (!closed[goal_idx]) return std::nullopt;

    std::vector<int> cells;
    for (int i = goal_idx; i != -1; i = parent[i]) cells.push_back(i);
    std::reverse(cells.begin(), cells.end());

    push_if_distinct(path.waypoints, start);
    for (int i : cells)
        push_if_distinct(path.waypoints, map.cell_center(g.xof(i), g.yof(i)));
    push_if_distinct(path.waypoints, goal);
    path.length = polyline_length(path.waypoints);
    path.cost = gval[goal_idx];
    return path;
}

}  // namespace

bool line_of_sight(const Costmap& map, int ax, int ay, int bx, int by) {
    // Integer supercover traversal between cell centers; corner crossings
    // touch both adjacent cells.
    auto blocked = [&map](int x, int y) {
        return !map.in_bounds(x, y) || map.lethal(x, y);
    };
    if (blocked(ax, ay)) return false;
    int dx = bx - ax, dy = by - ay;
    const int xstep = dx >= 0 ? 1 : -1, ystep = dy >= 0 ? 1 : -1;
    dx = std::abs(dx);
    dy = std::abs(dy);
    int x = ax, y = ay;
    const long long ddx = 2LL * dx, ddy = 2LL * dy;
    if (ddx >= ddy) {
        long long error = dx, errorprev = dx;
        for (int i = 0; i < dx; ++i) {
            x += xstep;
            error += ddy;
            if (error > ddx) {
                y += ystep;
                error -= ddx;
                if (error + errorprev < ddx) {
                    if (blocked(x, y - ystep)) return false;
                } else if (error + errorprev > ddx) {
                    if (blocked(x - xstep, y)) return false;
                } else {
                    if (blocked(x, y - ystep)) return false;
                    if (blocked(x - xstep, y)) return false;
                }
            }
            if (blocked(x, y)) return false;
            errorprev = error;
        }
    } else {
        long long error = dy, errorprev = dy;
        for (int i = 0; i < dy; ++i) {
            y += ystep;
            error += ddx;
            if (error > ddy) {
                x += xstep;
                error -= ddy;
                if (error + errorprev < ddy) {
                    if (blocked(x - xstep, y)) return false;
                } else if (error + errorprev > ddy) {
                    if (blocked(x, y - ystep)) return false;
                } else {
                    if (blocked(x - xstep, y)) return false;
                    if (blocked(x, y - ystep)) return false;
                }
            }
            if (blocked(x, y)) return false;
            errorprev = error;
        }
    }
    return true;
}

bool line_of_sight_world(const Costmap& map, const Vec2& a, const Vec2& b) {
    int ax, ay, bx, by;
    if (!map.world_to_cell(a, ax, ay) || !map.world_to_cell(b, bx, by)) return false;
    if (map.lethal(ax, ay)) return false;

    // Amanatides-Woo traversal; near-ties conservatively touch both cells.
    const double res = map.resolution();
    const Vec2 d = b - a;
    const double len = d.norm();
    if (len < 1e-15) return !map.lethal(ax, ay);
    int x = ax, y = ay;
    const int sx = d.x > 0 ? 1 : -1, sy = d.y > 0 ? 1 : -1;
    const double tdx = d.x != 0.0 ? std::abs(res / d.x) : kInf;
    const double tdy = d.y != 0.0 ? std::abs(res / d.y) : kInf;
    double tmx = d.x != 0.0
                     ? ((sx > 0 ? (x + 1) * res - a.x : a.x - x * res) / std::abs(d.x))
                     : kInf;
    double tmy = d.y != 0.0
                     ? ((sy > 0 ? (y + 1) * res - a.y : a.y - y * res) / std::abs(d.y))
                     : kInf;

    const double tie_eps = 1e-12;
    auto blocked = [&map](int cx, int cy) {
        return !map.in_bounds(cx, cy) || map.lethal(cx, cy);
    };
    int guard = 2 * (map.width() + map.height()) + 8;
    while ((x != bx || y != by) && guard-- > 0) {
        if (std::abs(tmx - tmy) <= tie_eps && tmx <= 1.0 + tie_eps) {
            // Corner crossing: both side cells are touched.
            if (blocked(x + sx, y)) return false;
            if (blocked(x, y + sy)) return false;
            x += sx;
            y += sy;
            tmx += tdx;
            tmy += tdy;
        } else if (tmx < tmy) {
            x += sx;
            tmx += tdx;
        } else {
            y += sy;
            tmy += tdy;
        }
        if (blocked(x, y)) return false;
    }
    return guard > 0;
}

std::optional<PlannedPath> dijkstra_plan(const Costmap& map, const Vec2& start,
                                         const Vec2& goal, const PlannerParams& params) {
    return grid_plan(map, start, goal, params, false, "navfn");
}

std::optional<PlannedPath> astar_plan(const Costmap& map, const Vec2& start,
                                      const Vec2& goal, const PlannerParams& params) {
    return grid_plan(map, start, goal, params, true, "astar");
}

std::optional<PlannedPath> theta_star_plan(const Costmap& map, const Vec2& start,
                                           const Vec2& goal,
                                           const PlannerParams& params) {
    (void)params;  // theta* optimizes pure euclidean length
    GridRef g{map, map.width(), map.height()};
    int sx, sy, gx, gy;
    if (!map.world_to_cell(start, sx, sy) || !map.world_to_cell(goal, gx, gy))
        return std::nullopt;
    if (map.lethal(sx, sy) || map.lethal(gx, gy)) return std::nullopt;

    PlannedPath path;
    path.planner_id = "thetastar";
    if (sx == gx && sy == gy) {
        push_if_distinct(path.waypoints, start);
        push_if_distinct(path.waypoints, goal);
        path.length = polyline_length(path.waypoints);
        path.cost = path.length;
        return path;
    }

    const int n = g.w * g.h;
    std::vector<double> gval(n, kInf);
    std::vector<int> parent(n, -1);
    std::vector<uint8_t> closed(n, 0);
    MinQueue open;

    const int start_idx = g.idx(sx, sy), goal_idx = g.idx(gx, gy);
    gval[start_idx] = 0.0;
    parent[start_idx] = start_idx;
    const double h0 = euclid_cells(map, sx, sy, gx, gy);
    open.push({h0, h0, start_idx});

    while (!open.empty()) {
        const QueueEntry top = open.top();
        open.pop();
        const int cur = top.idx;
        if (closed[cur]) continue;
        closed[cur] = 1;
        if (cur == goal_idx) break;
        const int cx = g.xof(cur), cy = g.yof(cur);
        const int par = parent[cur];
        const int px = g.xof(par), py = g.yof(par);
        for (int k = 0; k < 8; ++k) {
            if (!move_allowed(g, cx, cy, k)) continue;
            const int nx = cx + kDx[k], ny = cy + kDy[k];
            const int ni = g.idx(nx, ny);
            if (closed[ni]) continue;

            double cand;
            int cand_parent;
            if (line_of_sight(map, px, py, nx, ny)) {
                cand = gval[par] + euclid_cells(map, px, py, nx, ny);
                cand_parent = par;
            } else {
                cand = gval[cur] + euclid_cells(map, cx, cy, nx, ny);
                cand_parent = cur;
            }
            if (cand + 1e-15 < gval[ni]) {
                gval[ni] = cand;
                parent[ni] = cand_parent;
                const double h = euclid_cells(map, nx, ny, gx, gy);
                open.push({cand + h, h, ni});
            }
        }
    }

    if (!closed[goal_idx]) return std::nullopt;

    std::vector<int> cells;
    for (int i = goal_idx; i != parent[i]; i = parent[i]) cells.push_back(i);
    cells.push_back(start_idx);
    std::reverse(cells.begin(), cells.end());

    std::vector<Vec2> raw;
    push_if_distinct(raw, start);
    for (int i : cells) push_if_distinct(raw, map.cell_center(g.xof(i), g.yof(i)));
    push_if_distinct(raw, goal);

    // String pulling: drop vertices whose neighbors see each other. This only
    // shortens the path and removes the snap-to-center jogs at the endpoints.
    std::vector<Vec2> pulled;
    size_t i = 0;
    pulled.push_back(raw.front());
    while (i + 1 < raw.size()) {
        size_t best = i + 1;
        for (size_t j = raw.size() - 1; j > i + 1; --j) {
            if (line_of_sight_world(map, raw[i], raw[j])) {
                best = j;
                break;
            }
        }
        pulled.push_back(raw[best]);
        i = best;
    }
    path.waypoints = std::move(pulled);
    path.length = polyline_length(path.waypoints);
    path.cost = path.length;
    return path;
}

std::optional<PlannedPath> plan_with(const std::string& planner_id, const Costmap& map,
                                     const Vec2& start, const Vec2& goal,
                                     const PlannerParams& params) {
    if (planner_id == "navfn" || planner_id == "dijkstra")
        return dijkstra_plan(map, start, goal, params);
    if (planner_id == "astar" || planner_id == "smac2d")
        return astar_plan(map, start, goal, params);
    if (planner_id == "thetastar" || planner_id == "theta_star")
        return theta_star_plan(map, start, goal, params);
    throw std::invalid_argument("unknown planner: " + planner_id);
}

}  // namespace omninav
