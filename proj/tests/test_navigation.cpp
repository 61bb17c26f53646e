#include <doctest.h>

#include <cmath>

#include "wheelplan/errors.hpp"
#include "wheelplan/navigation.hpp"

using namespace wheelplan;

namespace {

WorldMap open_world(double x0, double y0, double x1, double y1) {
    const int w = static_cast<int>(std::lround((x1 - x0) / 0.1)), h = static_cast<int>(std::lround((y1 - y0) / 0.1));
    return {Costmap(w, h, 0.1, Pose2D{x0, y0, 0.0}, CellState::Free)};
}

void fill(WorldMap& w, double x0, double y0, double x1, double y1, CellState s) {
    for (int r = 0; r < w.grid.height(); ++r)
        for (int c = 0; c < w.grid.width(); ++c) {
            const Vec2 p = w.grid.cell_center({r, c});
            if (p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1) w.grid.set({r, c}, s);
        }
}

// Poses along a polyline at the given points, heading = outgoing direction.
WorldPath path_through(const std::vector<Vec2>& pts, double goal_theta) {
    WorldPath p;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double th = i + 1 < pts.size() ? std::atan2(pts[i + 1].y - pts[i].y, pts[i + 1].x - pts[i].x) : goal_theta;
        p.poses.emplace_back(pts[i].x, pts[i].y, th);
    }
    return p;
}

// L-shaped corridor: 1 m wide along +x, then 1 m wide along +y from x = 5.
WorldMap corner_world() {
    WorldMap w = open_world(-1.0, -1.0, 7.0, 10.0);
    fill(w, -2, -2, 8, 11, CellState::Occupied);
    fill(w, -0.6, -0.5, 5.5, 0.5, CellState::Free);
    fill(w, 4.5, -0.5, 5.5, 9.5, CellState::Free);
    return w;
}

}  // namespace

TEST_CASE("visibility") {
    const CameraModel cam = CameraModel::default_model();
    WorldMap w = open_world(-2, -10, 20, 10);
    const Pose2D n{0.0, 0.0, 0.0};
    CHECK(visible(Pose2D{5.0, 0.0}, n, cam, w));
    CHECK_FALSE(visible(Pose2D{12.0, 0.0}, n, cam, w));
    CHECK_FALSE(visible(Pose2D{-5.0, 0.0}, n, cam, w));
    CHECK_FALSE(visible(Pose2D{1.0, 3.0}, n, cam, w));  // 71 degrees off axis
    fill(w, 2.5, -1.0, 2.7, 1.0, CellState::Occupied);
    CHECK_FALSE(visible(Pose2D{5.0, 0.0}, n, cam, w));
    CHECK(visible(Pose2D{5.0, 0.0}, n, cam, w, true));
}

TEST_CASE("straight 8 m path needs no intermediate goal") {
    const CameraModel cam = CameraModel::default_model();
    const WorldMap w = open_world(-2, -10, 30, 10);
    std::vector<Vec2> pts;
    for (int i = 0; i <= 8; ++i) pts.push_back({double(i), 0.0});
    const GoalArray g = generate_intermediate_goals(path_through(pts, 0.0), cam, w);
    REQUIRE(g.goals.size() == 1);
    CHECK(g.goals[0].position() == Vec2{8.0, 0.0});
}

TEST_CASE("straight 25 m path inserts goals every ten metres") {
    const CameraModel cam = CameraModel::default_model();
    const WorldMap w = open_world(-2, -10, 30, 10);
    std::vector<Vec2> pts;
    for (int i = 0; i <= 25; ++i) pts.push_back({double(i), 0.0});
    const GoalArray g = generate_intermediate_goals(path_through(pts, 0.0), cam, w);
    // Hand trace: from 0 the waypoint at 11 is out of range, so 10 is kept;
    // from 10 the same happens at 21, keeping 20; then the goal.
    REQUIRE(g.goals.size() == 3);
    CHECK(g.goals[0].x == 10.0);
    CHECK(g.goals[1].x == 20.0);
    CHECK(g.goals[2].x == 25.0);
    for (std::size_t i = 0; i < g.goals.size(); ++i)
        CHECK(distance(g.goals[i].position(), g.cursors[i].position()) <= 10.0);
}

TEST_CASE("occluding corner inserts the last waypoint before it") {
    const CameraModel cam = CameraModel::default_model();
    const WorldMap w = corner_world();
    std::vector<Vec2> pts;
    for (int i = 0; i <= 5; ++i) pts.push_back({double(i), 0.0});
    for (int i = 1; i <= 8; ++i) pts.push_back({5.0, double(i)});
    const GoalArray g = generate_intermediate_goals(path_through(pts, std::numbers::pi / 2), cam, w);
    REQUIRE(g.goals.size() == 2);
    CHECK(g.goals[0].position() == Vec2{5.0, 0.0});
    CHECK(g.goals[1].position() == Vec2{5.0, 8.0});
    for (std::size_t i = 0; i < g.goals.size(); ++i) CHECK(visible(g.goals[i], g.cursors[i], cam, w));
}

TEST_CASE("invisible first waypoint is a frame gap") {
    const CameraModel cam = CameraModel::default_model();
    const WorldMap w = open_world(-5, -10, 20, 10);
    WorldPath p = path_through({{0, 0}, {-1, 0}, {-2, 0}}, 0.0);
    p.poses.front().theta = 0.0;  // facing away from the path
    CHECK_THROWS_AS(generate_intermediate_goals(p, cam, w), FrameGap);
}

TEST_CASE("global plan is densified and ends at the goal") {
    const WorldMap w = open_world(-2, -5, 28, 5);
    const WorldPath p = plan_global(w, Pose2D{0, 0, 0}, Pose2D{25, 0, 0.3});
    CHECK(p.poses.size() >= 25);
    CHECK(p.poses.front().position() == Vec2{0.0, 0.0});
    CHECK(p.poses.back() == Pose2D(25, 0, 0.3));
    for (std::size_t i = 1; i < p.poses.size(); ++i) CHECK(distance(p.poses[i].position(), p.poses[i - 1].position()) <= 1.0 + 1e-9);
}

TEST_CASE("sensing at zero noise sees only what the world holds") {
    const CameraModel cam = CameraModel::default_model();
    WorldMap w = open_world(-2, -10, 20, 10);
    fill(w, 4.0, -0.5, 4.4, 0.5, CellState::Occupied);
    const Costmap a = sense_costmap(w, Pose2D{0, 0, 0}, cam, 0.0, 1);
    const Costmap b = sense_costmap(w, Pose2D{0, 0, 0}, cam, 0.0, 1);
    CHECK(a == b);
    CHECK(a.at(*a.cell_of({4.2, 0.0})) == CellState::Occupied);
    CHECK(is_traversable(a, Vec2{2.0, 2.0}));
    CHECK_FALSE(is_traversable(a, Vec2{4.45, 0.0}));  // within the inflation radius of the seen face
}

TEST_CASE("open world, goal 20 m ahead") {
    const WorldMap w = open_world(-2, -6, 24, 6);
    PlannerParams local;
    local.algorithm = Algorithm::RrtStar;
    const NavigationReport r = simulate_navigation(w, Pose2D{0, 0, 0}, Pose2D{20, 0, 0}, local, 0.0, 3);
    CHECK(r.outcome == NavOutcome::Success);
    CHECK(r.collisions == 0);
    CHECK(distance(r.trajectory.back().position(), Vec2{20, 0}) <= 0.2);
    CHECK(r.path_length >= 20.0 - 0.2);
}

TEST_CASE("goal inside a wall cannot be reached") {
    WorldMap w = open_world(-2, -6, 24, 6);
    fill(w, 14.0, -1.5, 16.0, 1.5, CellState::Occupied);
    const NavigationReport r = simulate_navigation(w, Pose2D{0, 0, 0}, Pose2D{15, 0, 0}, PlannerParams{}, 0.0, 1);
    CHECK(r.outcome == NavOutcome::GoalUnreachable);
    CHECK(r.collisions == 0);
}

TEST_CASE("corridor worlds succeed without noise and runs are reproducible") {
    PlannerParams local;
    local.algorithm = Algorithm::RrtStar;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const CorridorWorld c = corridor_world(seed);
        CHECK(c.centerline.size() >= 3);
        const NavigationReport r = simulate_navigation(c.map, c.start, c.goal, local, 0.0, seed);
        CHECK(r.outcome == NavOutcome::Success);
        CHECK(r.collisions == 0);
        CHECK(r.mean_D == 0.0);
        const NavigationReport again = simulate_navigation(c.map, c.start, c.goal, local, 0.0, seed);
        CHECK(format_report(r) == format_report(again));
    }
}

TEST_CASE("report formats") {
    NavigationReport r;
    r.outcome = NavOutcome::Collision;
    r.seed = 7;
    r.trajectory = {Pose2D{0, 0, 0}, Pose2D{0.05, 0, 0}};
    const std::string line = format_report(r);
    CHECK(line.rfind("{\"outcome\":\"collision\"", 0) == 0);
    CHECK(line.back() == '\n');
    const std::string csv = format_trajectory_csv(r, {"note"});
    CHECK(csv.find("# note\n") == 0);
    CHECK(outcome_name(NavOutcome::FrameGap) == "frame_gap");
}
