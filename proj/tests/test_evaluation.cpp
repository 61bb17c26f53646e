#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "wheelplan/errors.hpp"
#include "wheelplan/evaluation.hpp"

using namespace wheelplan;

namespace {

// 25 nodes following unit-step directions (degrees) from the origin; goal theta given.
PlannedPath from_directions(const std::vector<double>& deg, double goal_theta, double step = 0.1) {
    PlannedPath p;
    Vec2 at{0.0, 0.0};
    for (double d : deg) {
        at = at + step * Vec2{std::cos(deg2rad(d)), std::sin(deg2rad(d))};
        p.nodes.emplace_back(at.x, at.y, 0.0);
    }
    p.nodes.back().theta = normalize_angle(goal_theta);
    return p;
}

PlannedPath axis_path(double length, double goal_theta = 0.0) {
    PlannedPath p;
    for (int i = 1; i <= 25; ++i) p.nodes.emplace_back(length * i / 25.0, 0.0, 0.0);
    p.nodes.back().theta = goal_theta;
    return p;
}

// Direct summation oracle on the heading sequence.
double oracle_tc(const PlannedPath& p, double initial) {
    std::vector<double> h{initial};
    for (std::size_t i = 1; i < p.nodes.size(); ++i) {
        const Vec2 d = p.nodes[i].position() - p.nodes[i - 1].position();
        if (d.x != 0.0 || d.y != 0.0) h.push_back(std::atan2(d.y, d.x));
    }
    h.push_back(p.goal().theta);
    double s = 0.0;
    for (std::size_t i = 1; i < h.size(); ++i) {
        double a = std::fmod(h[i] - h[i - 1], 2 * std::numbers::pi);
        if (a > std::numbers::pi) a -= 2 * std::numbers::pi;
        if (a <= -std::numbers::pi) a += 2 * std::numbers::pi;
        s += std::abs(a);
    }
    return s / (std::numbers::pi / 2) / 25.0;
}

}  // namespace

TEST_CASE("straight path has zero turning cost") {
    CHECK(turning_cost(axis_path(2.5)) == 0.0);
}

TEST_CASE("one right-angle turn costs exactly 0.04") {
    // Start along +x, one 90 degree turn, goal heading along the final leg.
    PlannedPath p;
    for (int i = 1; i <= 12; ++i) p.nodes.emplace_back(i, 0.0, 0.0);
    for (int i = 1; i <= 13; ++i) p.nodes.emplace_back(12.0, i, 0.0);
    p.nodes.back().theta = std::numbers::pi / 2;
    CHECK(turning_cost(p) == 0.04);
}

TEST_CASE("staircase of ten 45 degree turns costs 0.2") {
    std::vector<double> dirs(25, 0.0);
    for (int i : {6, 8, 10, 12, 14}) dirs[i] = 45.0;
    // Exact unit diagonal steps so every heading is exactly 0 or pi/4.
    PlannedPath p;
    Vec2 at{0.0, 0.0};
    for (double d : dirs) {
        at = at + (d == 0.0 ? Vec2{1.0, 0.0} : Vec2{1.0, 1.0});
        p.nodes.emplace_back(at.x, at.y, 0.0);
    }
    CHECK(turning_cost(p) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(turning_cost(p) == doctest::Approx(oracle_tc(p, 0.0)).epsilon(1e-15));
}

TEST_CASE("turning cost is rotation invariant and matches the oracle") {
    Rng rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> dirs;
        double h = uniform(rng, -60, 60);
        for (int i = 0; i < 25; ++i) dirs.push_back(h += uniform(rng, -30, 30));
        const PlannedPath p = from_directions(dirs, deg2rad(uniform(rng, -180, 180)));
        const double alpha = uniform(rng, -std::numbers::pi, std::numbers::pi);
        PlannedPath rotated = p;
        for (auto& n : rotated.nodes) {
            const Vec2 q = transform_from(Pose2D{0.0, 0.0, alpha}, n.position());
            n = Pose2D{q.x, q.y, n.theta + alpha};
        }
        CHECK(std::abs(turning_cost(rotated, alpha) - turning_cost(p)) <= 1e-12);
        CHECK(turning_cost(p) == doctest::Approx(oracle_tc(p, 0.0)).epsilon(1e-12));
    }
}

TEST_CASE("turning cost needs 25 nodes") {
    PlannedPath p = axis_path(1.0);
    p.nodes.pop_back();
    CHECK_THROWS_AS(turning_cost(p), ContractViolation);
}

TEST_CASE("success check") {
    const Costmap open(40, 40, 0.1, Pose2D{-1.0, -2.0, 0.0}, CellState::Free);
    const PlannedPath p = axis_path(2.5);
    CHECK(check_success(p, open, Pose2D{2.5, 0.0}).success);

    Costmap grazed = open;
    const auto cell = grazed.cell_of({1.23, 0.04});
    grazed.set(*cell, CellState::Occupied);
    CHECK_FALSE(oracle::supersampled_clear(grazed, {0.0, 0.0}, {2.5, 0.0}));
    const auto r = check_success(p, grazed, Pose2D{2.5, 0.0});
    CHECK_FALSE(r.success);
    CHECK(r.reason == FailureReason::Collision);

    const auto missed = check_success(p, open, Pose2D{3.0, 0.0});
    CHECK_FALSE(missed.success);
    CHECK(missed.reason == FailureReason::GoalMissed);
    CHECK(check_success(PlannedPath{}, open, Pose2D{}).reason == FailureReason::NoPath);
}

TEST_CASE("summary rates") {
    std::vector<EvalRecord> recs;
    for (int i = 0; i < 10; ++i) recs.push_back({std::to_string(i), "astar", i < 7, 0.1 * i, 0.0, FailureReason::None});
    const auto rows = summarize(recs);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].sr_percent == 70.0);
    CHECK(rows[0].mean_tc == doctest::Approx(0.3));

    const std::vector<EvalSample> none;
    const std::vector<PlannerParams> planners{PlannerParams{}};
    const SuiteResult empty = evaluate_suite(none, planners);
    REQUIRE(empty.rows.size() == 1);
    CHECK(empty.rows[0].n == 0);
    CHECK(std::isnan(empty.rows[0].mean_tc));
    CHECK(format_table_csv(empty.rows) == "planner,n,SR_percent,mean_TC\nastar,0,0,nan\n");
}

TEST_CASE("suite replans on the perceived map and judges on the truth") {
    Costmap truth(100, 100, 0.1, Pose2D{-1.0, -5.0, 0.0}, CellState::Free);
    Costmap perceived = truth;
    // The perceived map misses a wall that the truth has.
    for (int r = 40; r < 60; ++r) truth.set({r, 50}, CellState::Occupied);
    const std::vector<EvalSample> samples{{"a", perceived, truth, Pose2D{6.0, 0.0, 0.0}},
                                          {"b", truth, truth, Pose2D{6.0, 0.0, 0.0}}};
    std::vector<PlannerParams> planners(2);
    planners[1].algorithm = Algorithm::Jps;
    const SuiteResult r = evaluate_suite(samples, planners, 2);
    REQUIRE(r.records.size() == 4);
    CHECK_FALSE(r.records[0].success);
    CHECK(r.records[0].reason == FailureReason::Collision);
    CHECK(r.records[1].success);
    CHECK(r.records[0].D > 0.0);
    CHECK(r.records[1].D == 0.0);
    CHECK(r.rows[0].sr_percent == 50.0);
    CHECK(r.rows[1].planner == "jps");
}

TEST_CASE("quality bins and trend") {
    std::vector<EvalRecord> recs;
    for (int i = 0; i < 60; ++i) recs.push_back({"", "x", i % 10 >= i / 10, 0.0, i / 100.0, FailureReason::None});
    const auto bins = bin_by_quality(recs, 6);
    std::size_t total = 0;
    for (const auto& b : bins) total += b.n;
    CHECK(total == 60);
    CHECK(bins.front().lo == 0.0);
    CHECK(bins.back().hi == 0.59);
    CHECK(sr_trend_slope(bins) < 0.0);

    // Hand-computed weighted slope: two equal bins at x = 0 and x = 1, SR 1 and 0.
    std::vector<QualityBin> two{{-0.5, 0.5, 4, 4, 1.0}, {0.5, 1.5, 4, 0, 0.0}};
    CHECK(sr_trend_slope(two) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(bin_by_quality(recs, 1), ContractViolation);
    CHECK(format_bins_text(bins).find("SR_percent") != std::string::npos);
}

TEST_CASE("any bend or goal heading change costs something") {
    PlannedPath bent = axis_path(2.5);
    bent.nodes[12].y = 0.01;
    CHECK(turning_cost(bent) > 0.0);
    CHECK(turning_cost(axis_path(2.5, 0.01)) > 0.0);
    CHECK(turning_cost(axis_path(2.5), 0.01) > 0.0);
}

TEST_CASE("paths planned on the truth always succeed on it") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        Costmap m = oracle::random_map(seed, 60, 60, 0.03);
        for (Algorithm a : {Algorithm::AStar, Algorithm::Jps, Algorithm::RrtStar, Algorithm::Prm}) {
            PlannerParams p;
            p.algorithm = a;
            p.seed = seed;
            m.set({2, 2}, CellState::Free);
            PlanResult r;
            try {
                r = plan_path(m, Pose2D{0.25, 0.25, 0.0}, Pose2D{5.5, 5.0, 1.0}, p);
            } catch (const NoPathFound&) {
                continue;
            }
            const auto s = check_success(r.path, m, r.goal);
            CHECK(s.success);
            ++checked;
        }
    }
    CHECK(checked >= 40);
}
