#include "wheelplan/costmap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <sstream>

#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"

namespace wheelplan {

Costmap::Costmap(int width, int height, double resolution, Pose2D origin, CellState fill)
    : width_(width), height_(height), resolution_(resolution), origin_(origin) {
    if (width <= 0 || height <= 0) throw ContractViolation("costmap: size must be positive");
    if (!(resolution > 0.0)) throw ContractViolation("costmap: resolution must be positive");
    cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

CellIndex Costmap::cell_of_unchecked(Vec2 p) const {
    const Vec2 g = transform_to(origin_, p);
    return {static_cast<int>(std::floor(g.y / resolution_)), static_cast<int>(std::floor(g.x / resolution_))};
}

std::optional<CellIndex> Costmap::cell_of(Vec2 p) const {
    const CellIndex c = cell_of_unchecked(p);
    if (!in_bounds(c)) return std::nullopt;
    return c;
}

Vec2 Costmap::cell_center(CellIndex c) const {
    return transform_from(origin_, {(c.col + 0.5) * resolution_, (c.row + 0.5) * resolution_});
}

std::size_t Costmap::count(CellState s) const {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), s));
}

bool Costmap::same_geometry(const Costmap& other) const {
    return width_ == other.width_ && height_ == other.height_ && resolution_ == other.resolution_ &&
           origin_ == other.origin_;
}

void RobotFootprint::validate() const {
    if (!(length > 0.0 && width > 0.0 && inflation_radius > 0.0 && constriction_radius > 0.0)) {
        throw ContractViolation("robot footprint: all dimensions must be positive");
    }
}

PointCloud project_to_body(const PointCloud& pc, const CameraModel& cam) {
    if (pc.frame != Frame::Camera) throw ContractViolation("project_to_body: cloud is not camera-frame tagged");
    PointCloud out;
    out.frame = Frame::ProjectedBody;
    out.points.reserve(pc.size());
    for (const auto& p : pc.points) {
        const Vec3 b = cam.camera_to_body(p.position);
        out.points.push_back({{b.x, b.y, 0.0}, p.label});
    }
    return out;
}

std::vector<CellIndex> rasterize_convex(const Costmap& map, std::span<const Vec2> hull) {
    std::vector<CellIndex> cells;
    if (hull.size() < 3) return cells;
    const double res = map.resolution();
    // Work in grid units so that cell centers sit at k + 0.5.
    std::vector<Vec2> poly;
    poly.reserve(hull.size());
    for (Vec2 p : hull) {
        const Vec2 g = transform_to(map.origin(), p);
        poly.push_back({g.x / res, g.y / res});
    }
    double ymin = poly[0].y, ymax = poly[0].y;
    for (Vec2 p : poly) {
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    constexpr double eps = 1e-9;
    const int row_lo = std::max(0, static_cast<int>(std::ceil(ymin - 0.5 - eps)));
    const int row_hi = std::min(map.height() - 1, static_cast<int>(std::floor(ymax - 0.5 + eps)));
    for (int row = row_lo; row <= row_hi; ++row) {
        const double y = row + 0.5;
        double xl = std::numeric_limits<double>::infinity();
        double xr = -xl;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Vec2 a = poly[i];
            const Vec2 b = poly[(i + 1) % poly.size()];
            const double lo = std::min(a.y, b.y), hi = std::max(a.y, b.y);
            if (y < lo - eps || y > hi + eps) continue;
            if (std::abs(b.y - a.y) <= eps) {
                xl = std::min({xl, a.x, b.x});
                xr = std::max({xr, a.x, b.x});
            } else {
                const double t = std::clamp((y - a.y) / (b.y - a.y), 0.0, 1.0);
                const double x = a.x + t * (b.x - a.x);
                xl = std::min(xl, x);
                xr = std::max(xr, x);
            }
        }
        if (xl > xr) continue;
        const int col_lo = std::max(0, static_cast<int>(std::ceil(xl - 0.5 - eps)));
        const int col_hi = std::min(map.width() - 1, static_cast<int>(std::floor(xr - 0.5 + eps)));
        for (int col = col_lo; col <= col_hi; ++col) cells.push_back({row, col});
    }
    return cells;
}

namespace {

/// Integer offsets (drow, dcol) with drow^2 + dcol^2 <= (radius / res)^2.
std::vector<CellIndex> disc_offsets(double radius, double res) {
    const double r = radius / res;
    const double r2 = r * r + 1e-9;
    const int reach = static_cast<int>(std::floor(r + 1e-9));
    std::vector<CellIndex> out;
    for (int dr = -reach; dr <= reach; ++dr) {
        for (int dc = -reach; dc <= reach; ++dc) {
            if (dr * dr + dc * dc <= r2) out.push_back({dr, dc});
        }
    }
    return out;
}

std::vector<Vec2> robot_prior_points(const RobotFootprint& fp, double margin) {
    const double hx = fp.length / 2.0 + fp.constriction_radius + margin;
    const double hy = fp.width / 2.0 + fp.constriction_radius + margin;
    return {{-hx, -hy}, {hx, -hy}, {hx, hy}, {-hx, hy}};
}

}  // namespace

void constrict_free(Costmap& map, double radius) {
    const auto offsets = disc_offsets(radius, map.resolution());
    const Costmap before = map;
    for (int row = 0; row < map.height(); ++row) {
        for (int col = 0; col < map.width(); ++col) {
            if (before.at({row, col}) != CellState::Free) continue;
            for (const auto& o : offsets) {
                const CellIndex n{row + o.row, col + o.col};
                if (before.in_bounds(n) && before.at(n) != CellState::Free) {
                    map.set({row, col}, CellState::Unknown);
                    break;
                }
            }
        }
    }
}

void inflate_occupied(Costmap& map, double radius) {
    const auto offsets = disc_offsets(radius, map.resolution());
    const Costmap before = map;
    for (int row = 0; row < map.height(); ++row) {
        for (int col = 0; col < map.width(); ++col) {
            if (before.at({row, col}) != CellState::Occupied) continue;
            for (const auto& o : offsets) {
                const CellIndex n{row + o.row, col + o.col};
                if (map.in_bounds(n)) map.set(n, CellState::Occupied);
            }
        }
    }
}

Costmap build_costmap(const PointCloud& pc, const RobotFootprint& footprint, const CostmapOptions& opts) {
    if (pc.frame != Frame::ProjectedBody) throw ContractViolation("build_costmap: cloud must be in the projected body frame");
    footprint.validate();
    const GridGeometry& g = opts.geometry;
    Costmap map(g.width, g.height, g.resolution, g.origin, CellState::Unknown);

    std::vector<Vec2> drivable, obstacle;
    for (const auto& p : pc.points) {
        if (p.label == SemanticClass::Drivable) drivable.push_back({p.position.x, p.position.y});
        if (p.label == SemanticClass::Obstacle) obstacle.push_back({p.position.x, p.position.y});
    }
    if (drivable.size() < 3) return map;

    if (opts.robot_prior) {
        const auto prior = robot_prior_points(footprint, opts.robot_prior_margin);
        drivable.insert(drivable.end(), prior.begin(), prior.end());
    }
    const auto free_hull = convex_hull(drivable);
    for (const CellIndex c : rasterize_convex(map, free_hull)) map.set(c, CellState::Free);

    if (opts.single_hull) {
        const auto hull = convex_hull(obstacle);
        for (const CellIndex c : rasterize_convex(map, hull)) map.set(c, CellState::Occupied);
        for (Vec2 p : obstacle) {
            if (auto c = map.cell_of(p)) map.set(*c, CellState::Occupied);
        }
    } else {
        // Bucket obstacle points by cell, then grow 8-connected clusters in row-major order.
        std::map<std::pair<int, int>, std::vector<Vec2>> buckets;
        for (Vec2 p : obstacle) {
            if (auto c = map.cell_of(p)) buckets[{c->row, c->col}].push_back(p);
        }
        std::map<std::pair<int, int>, bool> visited;
        for (const auto& [key, _] : buckets) {
            if (visited[key]) continue;
            std::vector<Vec2> cluster;
            std::vector<CellIndex> seeds;
            std::deque<std::pair<int, int>> queue{key};
            visited[key] = true;
            while (!queue.empty()) {
                const auto cur = queue.front();
                queue.pop_front();
                const auto& pts = buckets.at(cur);
                cluster.insert(cluster.end(), pts.begin(), pts.end());
                seeds.push_back({cur.first, cur.second});
                for (int dr = -1; dr <= 1; ++dr) {
                    for (int dc = -1; dc <= 1; ++dc) {
                        const std::pair<int, int> n{cur.first + dr, cur.second + dc};
                        if (buckets.count(n) && !visited[n]) {
                            visited[n] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
            const auto hull = convex_hull(cluster);
            for (const CellIndex c : rasterize_convex(map, hull)) map.set(c, CellState::Occupied);
            for (const CellIndex c : seeds) map.set(c, CellState::Occupied);
        }
    }

    constrict_free(map, footprint.constriction_radius);
    inflate_occupied(map, footprint.inflation_radius);
    return map;
}

double costmap_distance(const Costmap& a, const Costmap& b) {
    if (!a.same_geometry(b)) throw ContractViolation("costmap_distance: geometry mismatch");
    const auto ca = a.cells();
    const auto cb = b.cells();
    // Integer half-weights keep the sum exact.
    std::uint64_t half_units = 0;
    for (std::size_t i = 0; i < ca.size(); ++i) {
        if (ca[i] == cb[i]) continue;
        if (ca[i] == CellState::Unknown || cb[i] == CellState::Unknown) {
            half_units += 1;
        } else {
            half_units += 2;
        }
    }
    return static_cast<double>(half_units) / (2.0 * static_cast<double>(ca.size()));
}

bool is_traversable(const Costmap& map, Vec2 p) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
    const auto c = map.cell_of(p);
    return c && map.at(*c) == CellState::Free;
}

Costmap perceive_costmap(const DepthImage& depth, const SemanticImage& semantic, const CameraModel& cam,
                         const PerceptionOptions& opts) {
    PointCloud cloud = backproject(depth, semantic, cam);
    if (opts.filter) cloud = filter_outliers_per_class(cloud, opts.outlier_k, opts.outlier_std_mult);
    return build_costmap(project_to_body(cloud, cam), opts.footprint, opts.costmap);
}

std::string format_costmap(const Costmap& map, std::span<const std::string> comments) {
    std::string out;
    for (const auto& c : comments) out += "# " + c + "\n";
    out += "costmap " + std::to_string(map.width()) + " " + std::to_string(map.height()) + " " +
           io::format_double(map.resolution()) + " " + io::format_double(map.origin().x) + " " +
           io::format_double(map.origin().y) + " " + io::format_double(map.origin().theta) + "\n";
    out.reserve(out.size() + static_cast<std::size_t>(map.width() + 1) * map.height());
    for (int row = 0; row < map.height(); ++row) {
        for (int col = 0; col < map.width(); ++col) {
            switch (map.at({row, col})) {
                case CellState::Unknown: out += 'U'; break;
                case CellState::Free: out += 'F'; break;
                case CellState::Occupied: out += 'O'; break;
            }
        }
        out += '\n';
    }
    return out;
}

Costmap parse_costmap(std::string_view text) {
    std::size_t pos = 0;
    auto next_line = [&](std::size_t& start) -> std::string_view {
        start = pos;
        const std::size_t end = text.find('\n', pos);
        std::string_view line = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
        pos = end == std::string_view::npos ? text.size() : end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        return line;
    };
    std::size_t line_start = 0;
    std::string_view line;
    do {
        if (pos >= text.size()) throw ParseError("costmap: missing header", pos);
        line = next_line(line_start);
    } while (line.empty() || line.front() == '#');

    std::istringstream header{std::string(line)};
    std::string magic;
    int w = 0, h = 0;
    double res = 0, ox = 0, oy = 0, ot = 0;
    if (!(header >> magic >> w >> h >> res >> ox >> oy >> ot) || magic != "costmap") {
        throw ParseError("costmap: malformed header", line_start);
    }
    if (w <= 0 || h <= 0 || !(res > 0.0)) throw ParseError("costmap: invalid geometry in header", line_start);
    Costmap map(w, h, res, Pose2D{ox, oy, ot});
    for (int row = 0; row < h; ++row) {
        if (pos >= text.size()) throw ParseError("costmap: expected " + std::to_string(h) + " rows", pos);
        line = next_line(line_start);
        if (static_cast<int>(line.size()) != w) {
            throw ParseError("costmap: row " + std::to_string(row) + " has " + std::to_string(line.size()) +
                                 " cells, expected " + std::to_string(w),
                             line_start);
        }
        for (int col = 0; col < w; ++col) {
            CellState s;
            switch (line[col]) {
                case 'U': s = CellState::Unknown; break;
                case 'F': s = CellState::Free; break;
                case 'O': s = CellState::Occupied; break;
                default: throw ParseError("costmap: invalid cell character", line_start + col);
            }
            map.set({row, col}, s);
        }
    }
    return map;
}

}  // namespace wheelplan
