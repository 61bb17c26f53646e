#include "wheelplan/planners.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>
#include <utility>

#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/random.hpp"

namespace wheelplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kSqrt2 = std::numbers::sqrt2;

constexpr int kDirs[8][2] = {{0, 1}, {1, 0}, {0, -1}, {-1, 0}, {1, 1}, {1, -1}, {-1, 1}, {-1, -1}};

// Path cost in steps. Kept as integer counts so equal-cost paths compare exactly.
struct StepCost {
    int straight = 0;
    int diagonal = 0;

    double value() const { return straight + kSqrt2 * diagonal; }
    StepCost plus(int dr, int dc, int n) const {
        return dr != 0 && dc != 0 ? StepCost{straight, diagonal + n} : StepCost{straight + n, diagonal};
    }
};

double octile(CellIndex a, CellIndex b) {
    const int dx = std::abs(a.col - b.col), dy = std::abs(a.row - b.row);
    return std::max(dx, dy) - std::min(dx, dy) + kSqrt2 * std::min(dx, dy);
}

struct OpenEntry {
    double f;
    double g;
    std::size_t idx;  // row-major, so smaller idx == lexicographically smaller (row, col)
};

// Top of the heap: smallest f, then largest g, then smallest cell.
struct OpenOrder {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        if (a.f != b.f) return a.f > b.f;
        if (a.g != b.g) return a.g < b.g;
        return a.idx > b.idx;
    }
};

using OpenList = std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder>;

class GridView {
public:
    explicit GridView(const Costmap& map) : map_(map) {}
    int width() const { return map_.width(); }
    int height() const { return map_.height(); }
    bool free(int row, int col) const { return map_.is_free({row, col}); }
    std::size_t idx(CellIndex c) const { return static_cast<std::size_t>(c.row) * map_.width() + c.col; }
    CellIndex cell(std::size_t i) const {
        return {static_cast<int>(i / map_.width()), static_cast<int>(i % map_.width())};
    }
    // Diagonal moves may not cut a corner: both orthogonal neighbours must be free.
    bool can_move(CellIndex c, int dr, int dc) const {
        if (!free(c.row + dr, c.col + dc)) return false;
        if (dr != 0 && dc != 0) return free(c.row + dr, c.col) && free(c.row, c.col + dc);
        return true;
    }

private:
    const Costmap& map_;
};

CellIndex require_free_cell(const Costmap& map, Vec2 p, const char* what) {
    const auto c = map.cell_of(p);
    if (!c) throw ContractViolation(std::string(what) + " lies outside the costmap");
    if (map.at(*c) != CellState::Free) throw ContractViolation(std::string(what) + " is not on a Free cell");
    return *c;
}

GridPath grid_path_from_cells(const Costmap& map, std::vector<CellIndex> cells, StepCost cost) {
    GridPath out;
    out.waypoints.reserve(cells.size());
    for (CellIndex c : cells) out.waypoints.push_back(map.cell_center(c));
    out.cells = std::move(cells);
    out.length = map.resolution() * cost.value();
    return out;
}

GridPath plan_astar(const Costmap& map, CellIndex start, CellIndex goal) {
    const GridView grid(map);
    const std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
    std::vector<StepCost> g(n);
    std::vector<double> gval(n, kInf);
    std::vector<std::size_t> parent(n, n);
    std::vector<char> closed(n, 0);
    OpenList open;

    const std::size_t s = grid.idx(start), t = grid.idx(goal);
    gval[s] = 0.0;
    open.push({octile(start, goal), 0.0, s});
    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        if (closed[top.idx]) continue;
        closed[top.idx] = 1;
        if (top.idx == t) break;
        const CellIndex c = grid.cell(top.idx);
        for (const auto& d : kDirs) {
            if (!grid.can_move(c, d[0], d[1])) continue;
            const CellIndex nb{c.row + d[0], c.col + d[1]};
            const std::size_t ni = grid.idx(nb);
            if (closed[ni]) continue;
            const StepCost ng = g[top.idx].plus(d[0], d[1], 1);
            const double ngv = ng.value();
            if (ngv < gval[ni]) {
                g[ni] = ng;
                gval[ni] = ngv;
                parent[ni] = top.idx;
                open.push({ngv + octile(nb, goal), ngv, ni});
            }
        }
    }
    if (!closed[t]) throw NoPathFound("goal not reachable from start");

    std::vector<CellIndex> cells;
    for (std::size_t i = t; i != n; i = parent[i]) cells.push_back(grid.cell(i));
    std::reverse(cells.begin(), cells.end());
    return grid_path_from_cells(map, std::move(cells), g[t]);
}

// Jump point search for 8-connected grids without corner cutting.
class JumpPointSearch {
public:
    JumpPointSearch(const Costmap& map, CellIndex goal) : map_(map), grid_(map), goal_(goal) {}

    GridPath run(CellIndex start) {
        const Costmap& map = map_;
        const std::size_t n = static_cast<std::size_t>(map.width()) * map.height();
        std::vector<StepCost> g(n);
        std::vector<double> gval(n, kInf);
        std::vector<std::size_t> parent(n, n);
        std::vector<char> closed(n, 0);
        OpenList open;

        const std::size_t s = grid_.idx(start), t = grid_.idx(goal_);
        gval[s] = 0.0;
        open.push({octile(start, goal_), 0.0, s});
        std::vector<CellIndex> nbs;
        while (!open.empty()) {
            const OpenEntry top = open.top();
            open.pop();
            if (closed[top.idx]) continue;
            closed[top.idx] = 1;
            if (top.idx == t) break;
            const CellIndex c = grid_.cell(top.idx);
            const std::optional<CellIndex> par =
                parent[top.idx] == n ? std::nullopt : std::optional<CellIndex>(grid_.cell(parent[top.idx]));
            neighbours(c, par, nbs);
            for (CellIndex nb : nbs) {
                const auto jp = jump(nb, c);
                if (!jp) continue;
                const std::size_t ji = grid_.idx(*jp);
                if (closed[ji]) continue;
                const int dr = jp->row - c.row, dc = jp->col - c.col;
                const int steps = std::max(std::abs(dr), std::abs(dc));
                const StepCost ng = g[top.idx].plus(dr, dc, steps);
                const double ngv = ng.value();
                if (ngv < gval[ji]) {
                    g[ji] = ng;
                    gval[ji] = ngv;
                    parent[ji] = top.idx;
                    open.push({ngv + octile(*jp, goal_), ngv, ji});
                }
            }
        }
        if (!closed[t]) throw NoPathFound("goal not reachable from start");

        std::vector<CellIndex> jumps;
        for (std::size_t i = t; i != n; i = parent[i]) jumps.push_back(grid_.cell(i));
        std::reverse(jumps.begin(), jumps.end());
        std::vector<CellIndex> cells{jumps.front()};
        for (std::size_t k = 1; k < jumps.size(); ++k) {
            const int dr = (jumps[k].row > jumps[k - 1].row) - (jumps[k].row < jumps[k - 1].row);
            const int dc = (jumps[k].col > jumps[k - 1].col) - (jumps[k].col < jumps[k - 1].col);
            CellIndex c = jumps[k - 1];
            while (c != jumps[k]) {
                c = {c.row + dr, c.col + dc};
                cells.push_back(c);
            }
        }
        return grid_path_from_cells(map, std::move(cells), g[t]);
    }

private:
    bool free(int row, int col) const { return grid_.free(row, col); }

    void neighbours(CellIndex c, std::optional<CellIndex> parent, std::vector<CellIndex>& out) const {
        out.clear();
        const int x = c.col, y = c.row;
        if (!parent) {
            for (const auto& d : kDirs) {
                if (grid_.can_move(c, d[0], d[1])) out.push_back({y + d[0], x + d[1]});
            }
            return;
        }
        const int dx = (x > parent->col) - (x < parent->col);
        const int dy = (y > parent->row) - (y < parent->row);
        if (dx != 0 && dy != 0) {
            const bool vert = free(y + dy, x), horiz = free(y, x + dx);
            if (vert) out.push_back({y + dy, x});
            if (horiz) out.push_back({y, x + dx});
            if (vert && horiz && free(y + dy, x + dx)) out.push_back({y + dy, x + dx});
        } else if (dx != 0) {
            const bool next = free(y, x + dx), up = free(y + 1, x), down = free(y - 1, x);
            if (next) {
                out.push_back({y, x + dx});
                if (up && free(y + 1, x + dx)) out.push_back({y + 1, x + dx});
                if (down && free(y - 1, x + dx)) out.push_back({y - 1, x + dx});
            }
            if (up) out.push_back({y + 1, x});
            if (down) out.push_back({y - 1, x});
        } else {
            const bool next = free(y + dy, x), right = free(y, x + 1), left = free(y, x - 1);
            if (next) {
                out.push_back({y + dy, x});
                if (right && free(y + dy, x + 1)) out.push_back({y + dy, x + 1});
                if (left && free(y + dy, x - 1)) out.push_back({y + dy, x - 1});
            }
            if (right) out.push_back({y, x + 1});
            if (left) out.push_back({y, x - 1});
        }
    }

    // Iterative jump from `c` arriving from `from`; returns the next jump point in that direction.
    std::optional<CellIndex> jump(CellIndex c, CellIndex from) const {
        const int dx = c.col - from.col, dy = c.row - from.row;
        int x = c.col, y = c.row;
        while (true) {
            if (!free(y, x)) return std::nullopt;
            if (x == goal_.col && y == goal_.row) return CellIndex{y, x};
            if (dx != 0 && dy != 0) {
                if (straight_jump(x + dx, y, dx, 0) || straight_jump(x, y + dy, 0, dy)) return CellIndex{y, x};
                if (!(free(y, x + dx) && free(y + dy, x))) return std::nullopt;
            } else if (forced_straight(x, y, dx, dy)) {
                return CellIndex{y, x};
            }
            x += dx;
            y += dy;
        }
    }

    bool forced_straight(int x, int y, int dx, int dy) const {
        if (dx != 0) {
            return (free(y - 1, x) && !free(y - 1, x - dx)) || (free(y + 1, x) && !free(y + 1, x - dx));
        }
        return (free(y, x - 1) && !free(y - dy, x - 1)) || (free(y, x + 1) && !free(y - dy, x + 1));
    }

    // Whether a straight scan starting at (x, y) finds a jump point.
    bool straight_jump(int x, int y, int dx, int dy) const {
        while (true) {
            if (!free(y, x)) return false;
            if (x == goal_.col && y == goal_.row) return true;
            if (forced_straight(x, y, dx, dy)) return true;
            x += dx;
            y += dy;
        }
    }

    const Costmap& map_;
    GridView grid_;
    CellIndex goal_;
};

// Uniform bucket grid over the map for nearest / radius queries on tree vertices.
class PointIndex {
public:
    PointIndex(const Costmap& map, double bucket)
        : origin_(map.origin()), bucket_(bucket),
          nx_(static_cast<int>(std::ceil(map.width() * map.resolution() / bucket)) + 1),
          ny_(static_cast<int>(std::ceil(map.height() * map.resolution() / bucket)) + 1),
          buckets_(static_cast<std::size_t>(nx_) * ny_) {}

    void insert(int id, Vec2 p) {
        points_.push_back(p);
        const auto [bx, by] = bucket_of(p);
        buckets_[static_cast<std::size_t>(by) * nx_ + bx].push_back(id);
    }

    int nearest(Vec2 p) const {
        const auto [bx, by] = bucket_of(p);
        int best = -1;
        double best_d2 = kInf;
        for (int ring = 0; ring <= std::max(nx_, ny_); ++ring) {
            for (int y = by - ring; y <= by + ring; ++y) {
                for (int x = bx - ring; x <= bx + ring; ++x) {
                    if (std::max(std::abs(x - bx), std::abs(y - by)) != ring) continue;
                    if (x < 0 || y < 0 || x >= nx_ || y >= ny_) continue;
                    for (int id : buckets_[static_cast<std::size_t>(y) * nx_ + x]) {
                        const Vec2 d = points_[id] - p;
                        const double d2 = dot(d, d);
                        if (d2 < best_d2 || (d2 == best_d2 && id < best)) best_d2 = d2, best = id;
                    }
                }
            }
            if (best >= 0 && best_d2 <= (ring * bucket_) * (ring * bucket_)) break;
        }
        return best;
    }

    std::vector<int> within(Vec2 p, double r) const {
        const auto [bx, by] = bucket_of(p);
        const int span = static_cast<int>(std::ceil(r / bucket_));
        std::vector<int> out;
        for (int y = std::max(0, by - span); y <= std::min(ny_ - 1, by + span); ++y) {
            for (int x = std::max(0, bx - span); x <= std::min(nx_ - 1, bx + span); ++x) {
                for (int id : buckets_[static_cast<std::size_t>(y) * nx_ + x]) {
                    const Vec2 d = points_[id] - p;
                    if (dot(d, d) <= r * r) out.push_back(id);
                }
            }
        }
        std::sort(out.begin(), out.end());
        return out;
    }

private:
    std::pair<int, int> bucket_of(Vec2 p) const {
        const Vec2 g = transform_to(origin_, p);
        return {std::clamp(static_cast<int>(std::floor(g.x / bucket_)), 0, nx_ - 1),
                std::clamp(static_cast<int>(std::floor(g.y / bucket_)), 0, ny_ - 1)};
    }

    Pose2D origin_;
    double bucket_;
    int nx_, ny_;
    std::vector<std::vector<int>> buckets_;
    std::vector<Vec2> points_;
};

Vec2 sample_in_map(const Costmap& map, Rng& rng) {
    const double u = uniform01(rng) * map.width() * map.resolution();
    const double v = uniform01(rng) * map.height() * map.resolution();
    return transform_from(map.origin(), {u, v});
}

GridPath path_from_waypoints(const Costmap& map, std::vector<Vec2> waypoints) {
    GridPath out;
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        for (CellIndex c : segment_cells(map, waypoints[i], waypoints[i + 1])) {
            if (out.cells.empty() || out.cells.back() != c) out.cells.push_back(c);
        }
    }
    if (out.cells.empty()) out.cells.push_back(map.cell_of_unchecked(waypoints.front()));
    out.length = polyline_length(waypoints);
    out.waypoints = std::move(waypoints);
    return out;
}

GridPath plan_rrtstar(const Costmap& map, Vec2 start, Vec2 goal, const PlannerParams& params) {
    const RrtStarParams& p = params.rrtstar;
    Rng rng(derive_seed(params.seed, 0x5252542aULL));
    std::vector<Vec2> pos{start};
    std::vector<int> parent{-1};
    std::vector<double> cost{0.0};
    std::vector<std::vector<int>> children(1);
    PointIndex index(map, std::max(p.step, map.resolution()));
    index.insert(0, start);

    std::vector<int> goal_nodes;
    if (distance(start, goal) <= params.goal_tolerance && segment_clear(map, start, goal)) goal_nodes.push_back(0);
    auto best_goal_node = [&]() {
        int best = -1;
        double best_c = kInf;
        for (int id : goal_nodes) {
            const double c = cost[id] + distance(pos[id], goal);
            if (c < best_c) best_c = c, best = id;
        }
        return std::pair{best, best_c};
    };

    GridPath out;
    out.cost_history.reserve(static_cast<std::size_t>(p.max_iters));
    for (int it = 0; it < p.max_iters; ++it) {
        const Vec2 sample = uniform01(rng) < p.goal_bias ? goal : sample_in_map(map, rng);
        const int nearest = index.nearest(sample);
        const double d = distance(pos[nearest], sample);
        if (d > 1e-12) {
            const Vec2 candidate = d <= p.step ? sample : pos[nearest] + (p.step / d) * (sample - pos[nearest]);
            if (is_traversable(map, candidate) && segment_clear(map, pos[nearest], candidate)) {
                const double n = static_cast<double>(pos.size() + 1);
                const double radius = std::min(p.rewire_gamma * std::sqrt(std::log(n) / n), p.max_radius);
                const std::vector<int> near = index.within(candidate, radius);

                int best_parent = nearest;
                double best_cost = cost[nearest] + distance(pos[nearest], candidate);
                for (int q : near) {
                    const double c = cost[q] + distance(pos[q], candidate);
                    if (c < best_cost && q != best_parent && segment_clear(map, pos[q], candidate)) {
                        best_cost = c;
                        best_parent = q;
                    }
                }
                const int id = static_cast<int>(pos.size());
                pos.push_back(candidate);
                parent.push_back(best_parent);
                cost.push_back(best_cost);
                children.emplace_back();
                children[best_parent].push_back(id);
                index.insert(id, candidate);

                for (int q : near) {
                    if (q == best_parent) continue;
                    const double c = best_cost + distance(candidate, pos[q]);
                    if (c < cost[q] && segment_clear(map, candidate, pos[q])) {
                        auto& siblings = children[parent[q]];
                        siblings.erase(std::find(siblings.begin(), siblings.end(), q));
                        parent[q] = id;
                        children[id].push_back(q);
                        const double delta = cost[q] - c;
                        std::vector<int> stack{q};
                        while (!stack.empty()) {
                            const int v = stack.back();
                            stack.pop_back();
                            cost[v] -= delta;
                            for (int ch : children[v]) stack.push_back(ch);
                        }
                    }
                }
                if (distance(candidate, goal) <= params.goal_tolerance && segment_clear(map, candidate, goal)) {
                    goal_nodes.push_back(id);
                }
            }
        }
        const double best = best_goal_node().second;
        out.cost_history.push_back(out.cost_history.empty() ? best : std::min(best, out.cost_history.back()));
    }

    const auto [best, best_c] = best_goal_node();
    if (best < 0) throw NoPathFound("RRT* did not reach the goal region");
    std::vector<Vec2> waypoints;
    if (distance(pos[best], goal) > 0.0) waypoints.push_back(goal);
    for (int v = best; v >= 0; v = parent[v]) waypoints.push_back(pos[v]);
    std::reverse(waypoints.begin(), waypoints.end());
    std::vector<double> history = std::move(out.cost_history);
    out = path_from_waypoints(map, std::move(waypoints));
    out.cost_history = std::move(history);
    return out;
}

bool edge_valid(const Costmap& map, Vec2 a, Vec2 b) { return segment_clear(map, a, b) && collision_check(map, a, b); }

GridPath plan_prm(const Costmap& map, Vec2 start, Vec2 goal, const PlannerParams& params) {
    Rng rng(derive_seed(params.seed, 0x50524dULL));
    std::vector<CellIndex> free_cells;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (map.at({r, c}) == CellState::Free) free_cells.push_back({r, c});
        }
    }
    if (free_cells.empty()) throw NoFreeSpace("costmap has no Free cell");

    std::vector<Vec2> nodes{start, goal};
    nodes.reserve(static_cast<std::size_t>(params.prm.sample_count) + 2);
    for (int i = 0; i < params.prm.sample_count; ++i) {
        const CellIndex c = free_cells[uniform_index(rng, free_cells.size())];
        const double u = (c.col + uniform01(rng)) * map.resolution();
        const double v = (c.row + uniform01(rng)) * map.resolution();
        nodes.push_back(transform_from(map.origin(), {u, v}));
    }

    const std::size_t n = nodes.size();
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(params.prm.k_neighbors), n - 1);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::pair<double, std::size_t>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const Vec2 d = nodes[i] - nodes[j];
            dist[j] = {j == i ? kInf : dot(d, d), j};
        }
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
        for (std::size_t m = 0; m < k; ++m) pairs.emplace_back(std::min(i, dist[m].second), std::max(i, dist[m].second));
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());

    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const auto& [a, b] : pairs) {
        if (!edge_valid(map, nodes[a], nodes[b])) continue;
        const double w = distance(nodes[a], nodes[b]);
        adj[a].emplace_back(b, w);
        adj[b].emplace_back(a, w);
    }
    if (distance(start, goal) == 0.0) return path_from_waypoints(map, {start});

    std::vector<double> best(n, kInf);
    std::vector<std::size_t> parent(n, n);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    best[0] = 0.0;
    open.push({0.0, 0});
    while (!open.empty()) {
        const auto [d, u] = open.top();
        open.pop();
        if (d > best[u]) continue;
        if (u == 1) break;
        for (const auto& [v, w] : adj[u]) {
            if (d + w < best[v]) {
                best[v] = d + w;
                parent[v] = u;
                open.push({best[v], v});
            }
        }
    }
    if (best[1] == kInf) throw NoPathFound("PRM roadmap does not connect start and goal");
    std::vector<Vec2> waypoints;
    for (std::size_t v = 1; v != n; v = parent[v]) waypoints.push_back(nodes[v]);
    std::reverse(waypoints.begin(), waypoints.end());
    return path_from_waypoints(map, std::move(waypoints));
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::AStar: return "astar";
        case Algorithm::Jps: return "jps";
        case Algorithm::RrtStar: return "rrtstar";
        case Algorithm::Prm: return "prm";
    }
    return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
    for (Algorithm a : {Algorithm::AStar, Algorithm::Jps, Algorithm::RrtStar, Algorithm::Prm}) {
        if (algorithm_name(a) == name) return a;
    }
    return std::nullopt;
}

void PlannerParams::validate() const {
    if (!(rrtstar.step > 0.0)) throw ContractViolation("planner: rrtstar step must be positive");
    if (!(rrtstar.goal_bias >= 0.0 && rrtstar.goal_bias < 1.0)) throw ContractViolation("planner: goal_bias must be in [0,1)");
    if (rrtstar.max_iters <= 0) throw ContractViolation("planner: max_iters must be positive");
    if (!(rrtstar.rewire_gamma > 0.0 && rrtstar.max_radius > 0.0)) throw ContractViolation("planner: rewire radius must be positive");
    if (prm.sample_count <= 0 || prm.k_neighbors <= 0) throw ContractViolation("planner: PRM counts must be positive");
    if (!(goal_tolerance > 0.0)) throw ContractViolation("planner: goal_tolerance must be positive");
}

std::vector<Vec2> PlannedPath::positions() const {
    std::vector<Vec2> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) out.push_back(n.position());
    return out;
}

Pose2D snap_goal(const Costmap& map, const Pose2D& goal) {
    if (is_traversable(map, goal)) return goal;
    std::optional<CellIndex> best;
    double best_d2 = kInf;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (map.at({r, c}) != CellState::Free) continue;
            const Vec2 d = map.cell_center({r, c}) - goal.position();
            const double d2 = dot(d, d);
            if (d2 < best_d2) best_d2 = d2, best = CellIndex{r, c};  // row-major scan keeps the smaller index on ties
        }
    }
    if (!best) throw NoFreeSpace("costmap has no Free cell to snap the goal to");
    const Vec2 p = map.cell_center(*best);
    return {p.x, p.y, goal.theta};
}

GridPath plan(const Costmap& map, const Pose2D& start, const Pose2D& goal, const PlannerParams& params) {
    params.validate();
    const CellIndex s = require_free_cell(map, start.position(), "start");
    const CellIndex g = require_free_cell(map, goal.position(), "goal");
    switch (params.algorithm) {
        case Algorithm::AStar:
            return plan_astar(map, s, g);
        case Algorithm::Jps: {
            return JumpPointSearch(map, g).run(s);
        }
        case Algorithm::RrtStar:
        case Algorithm::Prm: {
            GridPath raw = params.algorithm == Algorithm::RrtStar ? plan_rrtstar(map, start.position(), goal.position(), params)
                                                                  : plan_prm(map, start.position(), goal.position(), params);
            if (!params.smooth) return raw;
            GridPath smoothed = path_from_waypoints(map, shortcut(map, raw.waypoints));
            smoothed.cost_history = std::move(raw.cost_history);
            return smoothed;
        }
    }
    throw ContractViolation("planner: unknown algorithm");
}

PlannedPath resample(const GridPath& path, const Pose2D& goal) {
    if (path.waypoints.empty()) throw ContractViolation("resample: empty path");
    const auto& w = path.waypoints;
    std::vector<double> cumulative{0.0};
    KahanSum total;
    for (std::size_t i = 1; i < w.size(); ++i) {
        total += distance(w[i - 1], w[i]);
        cumulative.push_back(total.value());
    }
    const double length = cumulative.back();

    PlannedPath out;
    out.nodes.reserve(PlannedPath::kNodeCount);
    std::size_t seg = 1;
    for (int i = 1; i < PlannedPath::kNodeCount; ++i) {
        if (length <= 0.0) {
            out.nodes.emplace_back(w.front().x, w.front().y, 0.0);
            continue;
        }
        const double target = length * i / PlannedPath::kNodeCount;
        while (seg + 1 < w.size() && cumulative[seg] < target) ++seg;
        const double seg_len = cumulative[seg] - cumulative[seg - 1];
        const double t = seg_len > 0.0 ? std::clamp((target - cumulative[seg - 1]) / seg_len, 0.0, 1.0) : 0.0;
        const Vec2 p = t == 1.0 ? w[seg] : w[seg - 1] + t * (w[seg] - w[seg - 1]);
        out.nodes.emplace_back(p.x, p.y, 0.0);
    }
    out.nodes.push_back(goal);
    return out;
}

bool collision_check(const Costmap& map, Vec2 a, Vec2 b, double step) {
    if (!(step > 0.0)) throw ContractViolation("collision_check: step must be positive");
    const double d = distance(a, b);
    const int n = std::max(1, static_cast<int>(std::ceil(d / step)));
    for (int i = 0; i <= n; ++i) {
        const Vec2 p = i == n ? b : a + (static_cast<double>(i) / n) * (b - a);
        if (!is_traversable(map, p)) return false;
    }
    return true;
}

namespace {

// Grid traversal shared by segment_cells and segment_clear. `visit` receives each
// crossed cell; `corner` receives the two side cells of an exact corner crossing.
template <typename Visit, typename Corner>
void traverse(const Costmap& map, Vec2 a, Vec2 b, Visit&& visit, Corner&& corner) {
    const double res = map.resolution();
    const Vec2 ga = (1.0 / res) * transform_to(map.origin(), a);
    const Vec2 gb = (1.0 / res) * transform_to(map.origin(), b);
    int x = static_cast<int>(std::floor(ga.x)), y = static_cast<int>(std::floor(ga.y));
    const int ex = static_cast<int>(std::floor(gb.x)), ey = static_cast<int>(std::floor(gb.y));
    const double dx = gb.x - ga.x, dy = gb.y - ga.y;
    const int sx = ex > x ? 1 : (ex < x ? -1 : 0), sy = ey > y ? 1 : (ey < y ? -1 : 0);
    double tmax_x = sx == 0 ? kInf : (sx > 0 ? (x + 1 - ga.x) : (ga.x - x)) / std::abs(dx);
    double tmax_y = sy == 0 ? kInf : (sy > 0 ? (y + 1 - ga.y) : (ga.y - y)) / std::abs(dy);
    const double tdx = sx == 0 ? kInf : 1.0 / std::abs(dx), tdy = sy == 0 ? kInf : 1.0 / std::abs(dy);
    if (!visit(CellIndex{y, x})) return;
    while (x != ex || y != ey) {
        const bool x_done = x == ex, y_done = y == ey;
        const double diff = tmax_x - tmax_y;
        if (!x_done && !y_done && std::abs(diff) <= 1e-9 * std::max(1.0, std::abs(tmax_x))) {
            if (!corner(CellIndex{y, x + sx}, CellIndex{y + sy, x})) return;
            x += sx;
            y += sy;
            tmax_x += tdx;
            tmax_y += tdy;
        } else if (y_done || (!x_done && diff < 0.0)) {
            x += sx;
            tmax_x += tdx;
        } else {
            y += sy;
            tmax_y += tdy;
        }
        if (!visit(CellIndex{y, x})) return;
    }
}

}  // namespace

std::vector<CellIndex> segment_cells(const Costmap& map, Vec2 a, Vec2 b) {
    std::vector<CellIndex> out;
    traverse(
        map, a, b, [&](CellIndex c) { out.push_back(c); return true; }, [](CellIndex, CellIndex) { return true; });
    return out;
}

bool segment_clear(const Costmap& map, Vec2 a, Vec2 b) {
    bool ok = true;
    traverse(
        map, a, b, [&](CellIndex c) { return ok = map.is_free(c); },
        [&](CellIndex c1, CellIndex c2) { return ok = map.is_free(c1) && map.is_free(c2); });
    return ok;
}

std::vector<Vec2> shortcut(const Costmap& map, std::span<const Vec2> waypoints) {
    if (waypoints.size() <= 2) return {waypoints.begin(), waypoints.end()};
    std::vector<Vec2> out{waypoints.front()};
    std::size_t i = 0;
    while (i + 1 < waypoints.size()) {
        std::size_t j = waypoints.size() - 1;
        while (j > i + 1 && !segment_clear(map, waypoints[i], waypoints[j])) --j;
        out.push_back(waypoints[j]);
        i = j;
    }
    return out;
}

PlanResult plan_path(const Costmap& map, const Pose2D& start, const Pose2D& goal, const PlannerParams& params) {
    PlanResult result;
    result.goal = snap_goal(map, goal);
    const double res = map.resolution();
    for (int attempt = 0; attempt <= 3; ++attempt) {
        const double extra = attempt * res;
        Costmap working = map;
        if (extra > 0.0) {
            constrict_free(working, extra);
            // Keep the neighbourhoods of both anchors so they stay connected.
            const int reach = attempt + 1;
            for (Vec2 anchor : {start.position(), result.goal.position()}) {
                const CellIndex a = map.cell_of_unchecked(anchor);
                for (int dr = -reach; dr <= reach; ++dr) {
                    for (int dc = -reach; dc <= reach; ++dc) {
                        const CellIndex c{a.row + dr, a.col + dc};
                        if (dr * dr + dc * dc <= reach * reach && map.is_free(c)) working.set(c, CellState::Free);
                    }
                }
            }
        }
        GridPath grid;
        try {
            grid = plan(working, start, result.goal, params);
        } catch (const NoPathFound&) {
            if (attempt == 0) throw;
            continue;
        }
        PlannedPath path = resample(grid, result.goal);
        bool ok = collision_check(map, start.position(), path.nodes.front().position());
        for (std::size_t i = 1; ok && i < path.nodes.size(); ++i) {
            ok = collision_check(map, path.nodes[i - 1].position(), path.nodes[i].position());
        }
        if (ok) {
            result.grid = std::move(grid);
            result.path = std::move(path);
            result.extra_clearance = extra;
            return result;
        }
    }
    throw NoPathFound("resampled path leaves free space");
}

std::string format_path_csv(const PlannedPath& path, std::span<const std::string> comments) {
    std::ostringstream out;
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "x_m,y_m,theta_rad\n";
    for (std::size_t i = 0; i < path.nodes.size(); ++i) {
        const auto& n = path.nodes[i];
        out << io::format_double(n.x) << ',' << io::format_double(n.y);
        if (i + 1 == path.nodes.size()) out << ',' << io::format_double(n.theta);
        out << '\n';
    }
    return out.str();
}

PlannedPath parse_path_csv(std::string_view text) {
    PlannedPath out;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        const std::size_t line_start = pos;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen && !out.nodes.size() && (line.front() == 'x' || line.front() == 'X')) {
            header_seen = true;
            continue;
        }
        std::vector<double> fields;
        std::size_t f = 0;
        while (f <= line.size()) {
            std::size_t comma = line.find(',', f);
            if (comma == std::string_view::npos) comma = line.size();
            const std::string_view field = trim(line.substr(f, comma - f));
            double v = 0.0;
            const auto r = std::from_chars(field.data(), field.data() + field.size(), v);
            if (field.empty() || r.ec != std::errc{} || r.ptr != field.data() + field.size() || !std::isfinite(v)) {
                throw ParseError("path csv: bad number '" + std::string(field) + "'", line_start);
            }
            fields.push_back(v);
            f = comma + 1;
        }
        if (fields.size() != 2 && fields.size() != 3) throw ParseError("path csv: expected 2 or 3 columns", line_start);
        if (out.nodes.size() >= static_cast<std::size_t>(PlannedPath::kNodeCount)) {
            throw ParseError("path csv: more than 25 rows", line_start);
        }
        out.nodes.emplace_back(fields[0], fields[1], fields.size() == 3 ? fields[2] : 0.0);
    }
    if (out.nodes.size() != static_cast<std::size_t>(PlannedPath::kNodeCount)) {
        throw ParseError("path csv: expected 25 rows, got " + std::to_string(out.nodes.size()), text.size());
    }
    return out;
}

}  // namespace wheelplan
