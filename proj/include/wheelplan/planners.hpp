#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/geometry.hpp"

namespace wheelplan {

enum class Algorithm { AStar, Jps, RrtStar, Prm };

std::string_view algorithm_name(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

struct RrtStarParams {
    double step = 0.3;
    double goal_bias = 0.05;
    int max_iters = 5000;
    /// Rewire radius is min(rewire_gamma * sqrt(ln n / n), max_radius).
    double rewire_gamma = 2.0;
    double max_radius = 0.9;
};

struct PrmParams {
    int sample_count = 800;
    int k_neighbors = 10;
};

struct PlannerParams {
    Algorithm algorithm = Algorithm::AStar;
    std::uint64_t seed = 0;
    RrtStarParams rrtstar{};
    PrmParams prm{};
    double goal_tolerance = 0.15;
    /// Shortcut smoothing of sampling-planner output.
    bool smooth = true;

    void validate() const;
};

struct GridPath {
    /// 8-connected chain of Free cells from the start cell to the goal cell.
    std::vector<CellIndex> cells;
    /// Polyline the path follows: cell centers for grid planners, tree/roadmap vertices otherwise.
    std::vector<Vec2> waypoints;
    /// Metric length of `waypoints`; for grid planners res * (straight + sqrt2 * diagonal) exactly.
    double length = 0.0;
    /// RRT* only: best start-to-goal cost after each iteration (infinity until the goal is reached).
    std::vector<double> cost_history;
};

/// Exactly 25 nodes: 24 intermediate positions (theta 0, unused) and the goal with its heading.
struct PlannedPath {
    static constexpr int kNodeCount = 25;
    std::vector<Pose2D> nodes;

    const Pose2D& goal() const { return nodes.back(); }
    std::vector<Vec2> positions() const;
};

Pose2D snap_goal(const Costmap& map, const Pose2D& goal);

GridPath plan(const Costmap& map, const Pose2D& start, const Pose2D& goal, const PlannerParams& params);

PlannedPath resample(const GridPath& path, const Pose2D& goal);

bool collision_check(const Costmap& map, Vec2 a, Vec2 b, double step = 0.05);

/// Cells crossed by segment ab, in order, 4-connected except where the segment
/// passes exactly through a cell corner (diagonal step).
std::vector<CellIndex> segment_cells(const Costmap& map, Vec2 a, Vec2 b);
/// Every crossed cell Free; at exact corner crossings both side cells must be Free too.
bool segment_clear(const Costmap& map, Vec2 a, Vec2 b);

/// Greedy shortcutting: from each kept vertex jump to the farthest vertex with a clear segment.
std::vector<Vec2> shortcut(const Costmap& map, std::span<const Vec2> waypoints);

struct PlanResult {
    Pose2D goal;  // snapped
    GridPath grid;
    PlannedPath path;
    /// Extra constriction applied (m) before the resampled path validated.
    double extra_clearance = 0.0;
};

/// snap -> plan -> resample, then check every chord between consecutive nodes
/// with collision_check on `map`. Chords that cut corners trigger replanning on
/// a further constricted copy of the map (up to three times).
PlanResult plan_path(const Costmap& map, const Pose2D& start, const Pose2D& goal, const PlannerParams& params);

/// Header `x_m,y_m,theta_rad`, 25 rows, theta only on the last one.
std::string format_path_csv(const PlannedPath& path, std::span<const std::string> comments = {});
PlannedPath parse_path_csv(std::string_view text);

}  // namespace wheelplan
