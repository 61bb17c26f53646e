#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/planners.hpp"
#include "wheelplan/scene.hpp"

namespace wheelplan {

/// Ground-truth occupancy of the whole environment in the world frame. Free
/// cells are drivable floor, Occupied cells obstacles, Unknown cells terrain
/// that is neither (seen through, never driven on).
struct WorldMap {
    Costmap grid;
};

struct WorldPath {
    std::vector<Pose2D> poses;  // p_s, p_1..p_M, p_g
};

struct GoalArray {
    std::vector<Pose2D> goals;
    /// Cursor pose at the moment each goal was inserted (same length as goals).
    std::vector<Pose2D> cursors;
    double range = 10.0;
};

/// m seen from n: within range, within the horizontal FOV around n's heading,
/// and (unless fov_only) no Occupied cell on the segment n -> m.
bool visible(const Pose2D& m, const Pose2D& n, const CameraModel& cam, const WorldMap& map, bool fov_only = false);

/// Walks the world path with a cursor, inserting p_i whenever p_i is visible
/// and p_{i+1} is not, or p_{i+1} is beyond range; finally inserts p_g.
/// Throws FrameGap when p_1 is not visible from p_s or a goal would be
/// inserted that the cursor cannot see.
GoalArray generate_intermediate_goals(const WorldPath& path, const CameraModel& cam, const WorldMap& map,
                                      bool fov_only = false);

struct GlobalPlanOptions {
    PlannerParams planner{.algorithm = Algorithm::Prm};
    double inflation = 0.5;      // clearance kept from world obstacles
    double max_spacing = 1.0;    // densified waypoint spacing
};

/// Plans on the inflated world grid and densifies the result. Intermediate
/// poses take the heading of their outgoing segment; the last pose is `goal`.
WorldPath plan_global(const WorldMap& map, const Pose2D& start, const Pose2D& goal, const GlobalPlanOptions& opts = {});

/// Local costmap at `pose` from the cells a forward ray fan can see. Each seen
/// cell's class is flipped with probability `flip_prob`.
Costmap sense_costmap(const WorldMap& world, const Pose2D& pose, const CameraModel& cam, double flip_prob,
                      std::uint64_t seed, const PerceptionOptions& perception = {});

enum class NavOutcome { Success, Collision, GoalUnreachable, NoGlobalPath, FrameGap };
std::string_view outcome_name(NavOutcome o);

struct LegRecord {
    int goal_index = 0;
    double D = 0.0;
    double tc = 0.0;
    bool planned = false;
    bool reached = false;
    double travelled = 0.0;
};

struct NavigationReport {
    NavOutcome outcome = NavOutcome::GoalUnreachable;
    std::uint64_t seed = 0;
    int legs = 0;
    int collisions = 0;
    double path_length = 0.0;
    double mean_D = 0.0;
    double mean_tc = 0.0;
    std::vector<LegRecord> leg_records;
    std::vector<Pose2D> trajectory;
    std::vector<Pose2D> intermediate_goals;
};

struct NavigationOptions {
    CameraModel camera = CameraModel::default_model();
    PerceptionOptions perception{};
    GlobalPlanOptions global{};
    double goal_tolerance = 0.2;
    double motion_step = 0.05;
    int max_legs = 200;
    int max_stalls = 3;
    bool fov_only = false;
};

/// Closed loop: global plan, intermediate goals, then per leg sense, plan
/// locally, resample and drive the point robot along the 25-node path.
NavigationReport simulate_navigation(const WorldMap& world, const Pose2D& start, const Pose2D& goal,
                                     const PlannerParams& local, double flip_prob, std::uint64_t seed,
                                     const NavigationOptions& opts = {});

struct CorridorWorld {
    WorldMap map;
    Pose2D start;
    Pose2D goal;
    std::vector<Vec2> centerline;
};

/// Walled corridor made of 2 to 4 straight sections joined by turns.
CorridorWorld corridor_world(std::uint64_t seed);

std::string format_report(const NavigationReport& report);
std::string format_trajectory_csv(const NavigationReport& report, const std::vector<std::string>& comments = {});

}  // namespace wheelplan
