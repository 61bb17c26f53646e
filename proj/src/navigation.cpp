#include "wheelplan/navigation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "wheelplan/errors.hpp"
#include "wheelplan/evaluation.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/random.hpp"

namespace wheelplan {

namespace {

constexpr double kRayStep = std::numbers::pi / 1800.0;  // 0.1 deg between sensing rays
constexpr double kPointJitter = 0.03;                   // m, per-cell sample offset

bool line_of_sight(const Costmap& grid, Vec2 from, Vec2 to) {
    for (CellIndex c : segment_cells(grid, from, to)) {
        if (grid.in_bounds(c) && grid.at(c) == CellState::Occupied) return false;
    }
    return true;
}

bool in_fov(const Pose2D& m, const Pose2D& n, const CameraModel& cam) {
    const Vec2 d = m.position() - n.position();
    if (d.x == 0.0 && d.y == 0.0) return true;
    return std::abs(normalize_angle(std::atan2(d.y, d.x) - n.theta)) <= cam.horizontal_fov / 2.0 + 1e-12;
}

// Deterministic offset in [-jitter, jitter]^2 for a world cell.
Vec2 cell_jitter(std::size_t idx) {
    const std::uint64_t h = mix_seed(idx);
    const double a = static_cast<double>(h >> 11) * 0x1.0p-53;
    const double b = static_cast<double>(mix_seed(h) >> 11) * 0x1.0p-53;
    return {(2.0 * a - 1.0) * kPointJitter, (2.0 * b - 1.0) * kPointJitter};
}

WorldPath densify(std::span<const Vec2> waypoints, const Pose2D& start, const Pose2D& goal, double max_spacing) {
    WorldPath out;
    out.poses.push_back(start);
    for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
        const Vec2 a = waypoints[i], b = waypoints[i + 1];
        const double len = distance(a, b);
        if (len == 0.0) continue;
        const double heading = std::atan2(b.y - a.y, b.x - a.x);
        const int pieces = std::max(1, static_cast<int>(std::ceil(len / max_spacing - 1e-9)));
        for (int k = 1; k <= pieces; ++k) {
            const Vec2 p = k == pieces ? b : a + (static_cast<double>(k) / pieces) * (b - a);
            out.poses.emplace_back(p.x, p.y, heading);
        }
    }
    // Intermediate poses face along their outgoing segment.
    for (std::size_t i = 1; i + 1 < out.poses.size(); ++i) {
        const Vec2 d = out.poses[i + 1].position() - out.poses[i].position();
        if (d.x != 0.0 || d.y != 0.0) out.poses[i].theta = std::atan2(d.y, d.x);
    }
    if (out.poses.size() == 1 || out.poses.back().position() != goal.position()) {
        out.poses.push_back(goal);
    } else {
        out.poses.back() = goal;
    }
    return out;
}

}  // namespace

bool visible(const Pose2D& m, const Pose2D& n, const CameraModel& cam, const WorldMap& map, bool fov_only) {
    if (distance(m.position(), n.position()) > cam.max_range) return false;
    if (!in_fov(m, n, cam)) return false;
    return fov_only || line_of_sight(map.grid, n.position(), m.position());
}

GoalArray generate_intermediate_goals(const WorldPath& path, const CameraModel& cam, const WorldMap& map, bool fov_only) {
    if (path.poses.size() < 2) throw ContractViolation("world path needs at least start and goal");
    GoalArray out;
    out.range = cam.max_range;
    const auto& p = path.poses;
    const std::size_t m = p.size() - 2;  // intermediate poses p_1..p_M
    Pose2D cur = p.front();
    if (m >= 1 && !visible(p[1], cur, cam, map, fov_only)) throw FrameGap("first waypoint is not visible from the start");
    for (std::size_t i = 1; i <= m; ++i) {
        const bool vis_i = visible(p[i], cur, cam, map, fov_only);
        const bool vis_next = visible(p[i + 1], cur, cam, map, fov_only);
        if ((vis_i && !vis_next) || distance(p[i + 1].position(), cur.position()) > out.range) {
            if (!vis_i) throw FrameGap("waypoint " + std::to_string(i) + " is not visible from the current cursor");
            out.goals.push_back(p[i]);
            out.cursors.push_back(cur);
            cur = p[i];
        }
    }
    out.goals.push_back(p.back());
    out.cursors.push_back(cur);
    return out;
}

WorldPath plan_global(const WorldMap& map, const Pose2D& start, const Pose2D& goal, const GlobalPlanOptions& opts) {
    Costmap inflated = map.grid;
    if (opts.inflation > 0.0) inflate_occupied(inflated, opts.inflation);
    if (!is_traversable(inflated, start)) throw NoPathFound("start is not in inflated free space");
    const Pose2D snapped = snap_goal(inflated, goal);
    const GridPath grid = plan(inflated, start, snapped, opts.planner);
    std::vector<Vec2> waypoints = grid.waypoints;
    if (waypoints.empty() || waypoints.front() != start.position()) waypoints.insert(waypoints.begin(), start.position());
    if (waypoints.back() != snapped.position()) waypoints.push_back(snapped.position());
    if (snapped.position() != goal.position()) waypoints.push_back(goal.position());
    return densify(waypoints, start, goal, opts.max_spacing);
}

Costmap sense_costmap(const WorldMap& world, const Pose2D& pose, const CameraModel& cam, double flip_prob,
                      std::uint64_t seed, const PerceptionOptions& perception) {
    const Costmap& g = world.grid;
    std::vector<char> seen(static_cast<std::size_t>(g.width()) * g.height(), 0);
    std::vector<std::size_t> seen_list;
    const int rays = static_cast<int>(std::ceil(cam.horizontal_fov / kRayStep));
    for (int k = 0; k <= rays; ++k) {
        const double a = pose.theta - cam.horizontal_fov / 2.0 + cam.horizontal_fov * k / rays;
        const Vec2 end = pose.position() + cam.max_range * Vec2{std::cos(a), std::sin(a)};
        for (CellIndex c : segment_cells(g, pose.position(), end)) {
            if (!g.in_bounds(c)) break;
            if (distance(g.cell_center(c), pose.position()) > cam.max_range) break;
            const std::size_t idx = static_cast<std::size_t>(c.row) * g.width() + c.col;
            if (!seen[idx]) {
                seen[idx] = 1;
                seen_list.push_back(idx);
            }
            if (g.at(c) == CellState::Occupied) break;
        }
    }
    std::sort(seen_list.begin(), seen_list.end());

    Rng rng(seed);
    PointCloud cloud;
    cloud.frame = Frame::ProjectedBody;
    for (std::size_t idx : seen_list) {
        const CellIndex c{static_cast<int>(idx / g.width()), static_cast<int>(idx % g.width())};
        const double u = uniform01(rng);  // drawn for every cell so noise levels share one stream
        const CellState s = g.at(c);
        if (s == CellState::Unknown) continue;
        SemanticClass label = s == CellState::Free ? SemanticClass::Drivable : SemanticClass::Obstacle;
        if (u < flip_prob) label = label == SemanticClass::Drivable ? SemanticClass::Obstacle : SemanticClass::Drivable;
        const Vec2 body = transform_to(pose, g.cell_center(c) + cell_jitter(idx));
        cloud.points.push_back({{body.x, body.y, 0.0}, label});
    }
    if (perception.filter) cloud = filter_outliers_per_class(cloud, perception.outlier_k, perception.outlier_std_mult);
    return build_costmap(cloud, perception.footprint, perception.costmap);
}

std::string_view outcome_name(NavOutcome o) {
    switch (o) {
        case NavOutcome::Success: return "success";
        case NavOutcome::Collision: return "collision";
        case NavOutcome::GoalUnreachable: return "goal_unreachable";
        case NavOutcome::NoGlobalPath: return "no_global_path";
        case NavOutcome::FrameGap: return "frame_gap";
    }
    return "unknown";
}

NavigationReport simulate_navigation(const WorldMap& world, const Pose2D& start, const Pose2D& goal,
                                     const PlannerParams& local, double flip_prob, std::uint64_t seed,
                                     const NavigationOptions& opts) {
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw ContractViolation("noise probability outside [0,1]");
    NavigationReport report;
    report.seed = seed;
    report.trajectory.push_back(start);

    GoalArray goals;
    try {
        GlobalPlanOptions global = opts.global;
        global.planner.seed = derive_seed(seed, 0x474c4f42ULL);
        const WorldPath path = plan_global(world, start, goal, global);
        goals = generate_intermediate_goals(path, opts.camera, world, opts.fov_only);
    } catch (const FrameGap&) {
        report.outcome = NavOutcome::FrameGap;
        return report;
    } catch (const Error&) {
        report.outcome = NavOutcome::NoGlobalPath;
        return report;
    }
    report.intermediate_goals = goals.goals;

    Pose2D pose = start;
    KahanSum d_sum, tc_sum, travelled;
    int planned_legs = 0;
    auto finish = [&](NavOutcome outcome) {
        report.outcome = outcome;
        report.path_length = travelled.value();
        report.mean_D = report.legs > 0 ? d_sum.value() / report.legs : 0.0;
        report.mean_tc = planned_legs > 0 ? tc_sum.value() / planned_legs : 0.0;
        return report;
    };

    for (std::size_t gi = 0; gi < goals.goals.size(); ++gi) {
        const Pose2D& target = goals.goals[gi];
        int stalls = 0;
        while (distance(pose.position(), target.position()) > opts.goal_tolerance) {
            if (report.legs >= opts.max_legs) return finish(NavOutcome::GoalUnreachable);
            ++report.legs;
            LegRecord leg;
            leg.goal_index = static_cast<int>(gi);
            const std::uint64_t leg_seed = derive_seed(seed, static_cast<std::uint64_t>(report.legs));
            const Costmap sensed = sense_costmap(world, pose, opts.camera, flip_prob, leg_seed, opts.perception);
            const Costmap truth = sense_costmap(world, pose, opts.camera, 0.0, leg_seed, opts.perception);
            leg.D = costmap_distance(sensed, truth);
            d_sum += leg.D;

            const Vec2 goal_body = transform_to(pose, target.position());
            const Pose2D local_goal{goal_body.x, goal_body.y, target.theta - pose.theta};
            PlannerParams params = local;
            params.seed = derive_seed(leg_seed, 0x4c4f43ULL);
            const double before = distance(pose.position(), target.position());
            PlanResult planned;
            try {
                planned = plan_path(sensed, Pose2D{0.0, 0.0, 0.0}, local_goal, params);
            } catch (const Error&) {
                report.leg_records.push_back(leg);
                if (++stalls > opts.max_stalls) return finish(NavOutcome::GoalUnreachable);
                const Vec2 d = target.position() - pose.position();
                pose.theta = normalize_angle(std::atan2(d.y, d.x));
                continue;
            }
            leg.planned = true;
            leg.tc = turning_cost(planned.path);
            tc_sum += leg.tc;
            ++planned_legs;

            std::vector<Vec2> polyline{pose.position()};
            for (const auto& n : planned.path.nodes) polyline.push_back(transform_from(pose, n.position()));
            Vec2 at = pose.position();
            double heading = pose.theta;
            bool collided = false;
            for (std::size_t s = 1; s < polyline.size() && !leg.reached && !collided; ++s) {
                const Vec2 a = polyline[s - 1], b = polyline[s];
                const double len = distance(a, b);
                if (len == 0.0) continue;
                heading = std::atan2(b.y - a.y, b.x - a.x);
                const int steps = std::max(1, static_cast<int>(std::ceil(len / opts.motion_step)));
                for (int k = 1; k <= steps; ++k) {
                    const Vec2 p = k == steps ? b : a + (static_cast<double>(k) / steps) * (b - a);
                    travelled += distance(at, p);
                    leg.travelled += distance(at, p);
                    at = p;
                    report.trajectory.emplace_back(p.x, p.y, heading);
                    const auto cell = world.grid.cell_of(p);
                    if (cell && world.grid.at(*cell) == CellState::Occupied) {
                        collided = true;
                        break;
                    }
                    if (distance(p, target.position()) <= opts.goal_tolerance) {
                        leg.reached = true;
                        break;
                    }
                }
            }
            pose = Pose2D{at.x, at.y, leg.reached ? target.theta : heading};
            report.leg_records.push_back(leg);
            if (collided) {
                ++report.collisions;
                return finish(NavOutcome::Collision);
            }
            const double after = distance(pose.position(), target.position());
            if (!leg.reached && before - after < opts.motion_step) {
                if (++stalls > opts.max_stalls) return finish(NavOutcome::GoalUnreachable);
            } else {
                stalls = 0;
            }
        }
        // Face the next goal if it left the field of view.
        if (gi + 1 < goals.goals.size() && !in_fov(goals.goals[gi + 1], pose, opts.camera)) {
            const Vec2 d = goals.goals[gi + 1].position() - pose.position();
            pose.theta = normalize_angle(std::atan2(d.y, d.x));
        }
    }
    return finish(NavOutcome::Success);
}

CorridorWorld corridor_world(std::uint64_t seed) {
    Rng rng(seed);
    const int sections = 2 + static_cast<int>(uniform_index(rng, 3));
    const double width = uniform(rng, 2.4, 3.2);
    constexpr double wall = 0.3;
    constexpr double quarter = std::numbers::pi / 2.0;

    CorridorWorld out;
    double heading = 0.0;
    Vec2 cur{0.0, 0.0};
    out.centerline.push_back(cur);
    std::vector<double> headings;
    for (int s = 0; s < sections; ++s) {
        const double len = uniform(rng, 6.0, 10.0);
        cur = cur + len * Vec2{std::cos(heading), std::sin(heading)};
        out.centerline.push_back(cur);
        headings.push_back(heading);
        // Turn by +-45 or +-90 deg while staying within +-90 deg of the initial heading.
        std::vector<double> options;
        for (double t : {-quarter, -quarter / 2.0, quarter / 2.0, quarter}) {
            if (std::abs(heading + t) <= quarter + 1e-9) options.push_back(t);
        }
        heading += options[uniform_index(rng, options.size())];
    }

    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (Vec2 p : out.centerline) {
        min_x = std::min(min_x, p.x), min_y = std::min(min_y, p.y);
        max_x = std::max(max_x, p.x), max_y = std::max(max_y, p.y);
    }
    const double margin = width / 2.0 + wall + 1.0;
    const double res = 0.1;
    const Pose2D origin{min_x - margin, min_y - margin, 0.0};
    const int w = static_cast<int>(std::ceil((max_x - min_x + 2 * margin) / res));
    const int h = static_cast<int>(std::ceil((max_y - min_y + 2 * margin) / res));
    out.map.grid = Costmap(w, h, res, origin, CellState::Unknown);
    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            const Vec2 p = out.map.grid.cell_center({r, c});
            double d = 1e300;
            for (std::size_t i = 0; i + 1 < out.centerline.size(); ++i) {
                d = std::min(d, point_segment_distance(p, out.centerline[i], out.centerline[i + 1]));
            }
            if (d <= width / 2.0) {
                out.map.grid.set({r, c}, CellState::Free);
            } else if (d <= width / 2.0 + wall) {
                out.map.grid.set({r, c}, CellState::Occupied);
            }
        }
    }
    out.start = Pose2D{out.centerline.front().x, out.centerline.front().y, 0.0};
    out.goal = Pose2D{out.centerline.back().x, out.centerline.back().y, headings.back()};
    return out;
}

std::string format_report(const NavigationReport& r) {
    nlohmann::ordered_json j;
    j["outcome"] = outcome_name(r.outcome);
    j["legs"] = r.legs;
    j["collisions"] = r.collisions;
    j["path_length_m"] = r.path_length;
    j["mean_D"] = r.mean_D;
    j["mean_TC"] = r.mean_tc;
    j["seed"] = r.seed;
    return j.dump() + "\n";
}

std::string format_trajectory_csv(const NavigationReport& r, const std::vector<std::string>& comments) {
    std::ostringstream out;
    for (const auto& c : comments) out << "# " << c << '\n';
    out << "x_m,y_m,theta_rad\n";
    for (const auto& p : r.trajectory) {
        out << io::format_double(p.x) << ',' << io::format_double(p.y) << ',' << io::format_double(p.theta) << '\n';
    }
    return out.str();
}

}  // namespace wheelplan
