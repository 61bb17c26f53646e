#include <doctest.h>

#include <cmath>
#include <map>

#include "support.hpp"
#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/labels.hpp"
#include "wheelplan/random.hpp"
#include "wheelplan/synthetic.hpp"

using namespace wheelplan;

namespace {

Costmap local_grid(CellState fill) { return Costmap(100, 100, 0.1, Pose2D{-1.0, -5.0, 0.0}, fill); }

SceneSpec walled_scene() {
    // A wall just ahead of the robot hides everything but a sliver of floor.
    SceneSpec spec = SceneSpec::open_ground();
    spec.boxes.push_back({{1.4, 0.0}, 0.2, 16.0, 0.0, 2.0});
    return spec;
}

}  // namespace

TEST_CASE("goal sampling is deterministic and respects the free space") {
    const Costmap m = local_grid(CellState::Free);
    const Pose2D a = sample_goal(m, 42), b = sample_goal(m, 42);
    CHECK(a == b);
    for (std::uint64_t s = 0; s < 200; ++s) {
        const Pose2D g = sample_goal(m, s);
        CHECK(is_traversable(m, g));
        CHECK(norm(g.position()) >= 1.0);
        CHECK(g.theta > -std::numbers::pi);
        CHECK(g.theta <= std::numbers::pi);
    }
}

TEST_CASE("goal sampling is unbiased left to right") {
    const Costmap m = local_grid(CellState::Free);  // symmetric about y = 0
    int left = 0, right = 0;
    for (std::uint64_t s = 0; s < 10000; ++s) (sample_goal(m, s).y > 0.0 ? left : right)++;
    const double expected = 5000.0;
    const double chi2 = std::pow(left - expected, 2) / expected + std::pow(right - expected, 2) / expected;
    CHECK(chi2 < 9.0);  // 3 sigma for one degree of freedom
}

TEST_CASE("goal sampling without distant free cells") {
    Costmap m = local_grid(CellState::Unknown);
    for (int r = 0; r < m.height(); ++r)
        for (int c = 0; c < m.width(); ++c)
            if (norm(m.cell_center({r, c})) <= 0.5) m.set({r, c}, CellState::Free);
    CHECK_THROWS_AS(sample_goal(m, 1, 1.0), NoFreeSpace);
}

TEST_CASE("goal disc straight ahead lands on the centre column below the horizon") {
    const CameraModel cam = CameraModel::default_model();
    const Vec2 goal{3.0, 0.0};
    const MaskResult r = project_to_mask({&goal, 1}, cam, 5.0, MaskShape::Disc);
    REQUIRE_FALSE(r.empty);
    double su = 0.0, sv = 0.0;
    const std::size_t n = count_set(r.mask);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u)
            if (r.mask.at(u, v) > 0.5) su += u, sv += v;
    // Forward projection oracle.
    const auto px = cam.project(cam.body_to_camera({3.0, 0.0, 0.0}));
    REQUIRE(px);
    CHECK(su / n == doctest::Approx(cam.cx).epsilon(1e-12));
    CHECK(sv / n == doctest::Approx(px->y).epsilon(0.02));
    const double horizon = cam.cy - cam.fy * std::tan(deg2rad(15.0));
    CHECK(sv / n > horizon);
}

TEST_CASE("points behind the camera give an empty mask") {
    const CameraModel cam = CameraModel::default_model();
    const Vec2 behind{-2.0, 0.0};
    CHECK(project_to_mask({&behind, 1}, cam, 5.0, MaskShape::Disc).empty);
    const std::vector<Vec2> line{{-3.0, 0.0}, {-1.0, 0.5}};
    CHECK(project_to_mask(line, cam, 5.0).empty);
}

TEST_CASE("straight path mask hugs the centre column") {
    const CameraModel cam = CameraModel::default_model();
    const std::vector<Vec2> line{{0.0, 0.0}, {1.0, 0.0}, {4.0, 0.0}, {8.0, 0.0}};
    const double thickness = 5.0;
    const MaskResult r = project_to_mask(line, cam, thickness);
    REQUIRE_FALSE(r.empty);
    for (int v = 0; v < cam.height; ++v)
        for (int u = 0; u < cam.width; ++u)
            if (r.mask.at(u, v) > 0.5) CHECK(std::abs(u - cam.cx) <= thickness);
}

TEST_CASE("mask encoding round trip") {
    BinaryMask m(7, 5, 0.0);
    m.at(3, 2) = 1.0;
    m.at(6, 4) = 1.0;
    const BinaryMask back = decode_mask(encode_mask(m, {"note"}));
    CHECK(back == m);
    CHECK(count_set(back) == 2);
}

TEST_CASE("splits are scene-disjoint and proportional") {
    const std::vector<std::size_t> five(5, 10);
    const auto s = assign_splits(five, {0.6, 0.2, 0.2}, 3);
    std::map<std::string, int> counts;
    for (const auto& x : s) counts[x]++;
    CHECK(counts["train"] == 3);
    CHECK(counts["val"] == 1);
    CHECK(counts["test"] == 1);
    CHECK(assign_splits(five, {0.6, 0.2, 0.2}, 3) == s);
    // Uneven scenes: sample totals stay within one sample per scene of the ratio.
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> sizes(5 + uniform_index(rng, 30));
        double total = 0;
        for (auto& n : sizes) total += static_cast<double>(n = uniform_index(rng, 11));
        const auto split = assign_splits(sizes, {0.6, 0.2, 0.2}, trial);
        std::map<std::string, double> c;
        for (std::size_t i = 0; i < sizes.size(); ++i) c[split[i]] += static_cast<double>(sizes[i]);
        const double tol = static_cast<double>(sizes.size());
        CHECK(std::abs(c["train"] - 0.6 * total) <= tol);
        CHECK(std::abs(c["val"] - 0.2 * total) <= tol);
        CHECK(std::abs(c["test"] - 0.2 * total) <= tol);
    }
}

TEST_CASE("dataset of five open scenes splits 30/10/10 and is reproducible") {
    testsupport::TempDir a("ds_a"), b("ds_b");
    const std::vector<SceneSpec> scenes(5, SceneSpec::open_ground());
    DatasetOptions opts;
    opts.seed = 17;
    opts.threads = 4;
    const DatasetResult r1 = generate_dataset(scenes, opts, a.path(), "test run");
    opts.threads = 1;
    const DatasetResult r2 = generate_dataset(scenes, opts, b.path(), "test run");
    CHECK(r1.manifest == r2.manifest);
    CHECK(io::read_file(a / "manifest.jsonl") == io::read_file(b / "manifest.jsonl"));

    std::map<std::string, int> counts;
    for (const auto& rec : r1.records) {
        CHECK(rec.status == "ok");
        counts[rec.split]++;
    }
    CHECK(r1.records.size() == 50);
    CHECK(counts["train"] == 30);
    CHECK(counts["val"] == 10);
    CHECK(counts["test"] == 10);

    // Every sample of a scene shares its split.
    std::map<int, std::string> scene_split;
    for (const auto& rec : r1.records) {
        auto [it, fresh] = scene_split.emplace(rec.scene, rec.split);
        if (!fresh) CHECK(it->second == rec.split);
    }

    // Artifacts exist and the manifest parses back.
    const auto parsed = parse_manifest(r1.manifest);
    REQUIRE(parsed.size() == r1.records.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].id == r1.records[i].id);
        CHECK(parsed[i].goal == r1.records[i].goal);
        CHECK(std::filesystem::exists(a / parsed[i].mask_path));
        CHECK(std::filesystem::exists(a / parsed[i].path_csv));
    }
    CHECK(r1.manifest.rfind("{\"provenance\":\"test run\"}\n", 0) == 0);
}

TEST_CASE("scene without reachable goals yields only failure records") {
    testsupport::TempDir dir("ds_wall");
    DatasetOptions opts;
    opts.seed = 5;
    const std::vector<SceneSpec> scenes{walled_scene()};
    const DatasetResult r = generate_dataset(scenes, opts, dir.path(), "wall");
    CHECK(r.records.size() == 10);
    for (const auto& rec : r.records) {
        CHECK(rec.status != "ok");
        CHECK(rec.split == "none");
    }
}

TEST_CASE("invalid dataset options") {
    DatasetOptions opts;
    opts.split_ratio = {0.5, 0.2, 0.2};
    CHECK_THROWS_AS(opts.validate(), ContractViolation);
    opts = DatasetOptions{};
    opts.goals_per_scene = 0;
    CHECK_THROWS_AS(opts.validate(), ContractViolation);
}

namespace {

int components(const BinaryMask& m) {
    std::vector<int> seen(m.data.size(), 0);
    int count = 0;
    for (int v = 0; v < m.height; ++v)
        for (int u = 0; u < m.width; ++u) {
            if (m.at(u, v) <= 0.5 || seen[v * m.width + u]) continue;
            ++count;
            std::vector<std::pair<int, int>> stack{{u, v}};
            seen[v * m.width + u] = 1;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = x + dx, ny = y + dy;
                        if (!m.contains(nx, ny) || m.at(nx, ny) <= 0.5 || seen[ny * m.width + nx]) continue;
                        seen[ny * m.width + nx] = 1;
                        stack.push_back({nx, ny});
                    }
            }
        }
    return count;
}

}  // namespace

TEST_CASE("emitted masks backproject onto the planned path") {
    testsupport::TempDir dir("ds_inv");
    DatasetOptions opts;
    opts.seed = 23;
    const std::vector<SceneSpec> scenes{random_scene_spec(1), random_scene_spec(2), SceneSpec::open_ground()};
    const DatasetResult r = generate_dataset(scenes, opts, dir.path(), "inv");
    const CameraModel& cam = opts.camera;
    int checked = 0;
    for (const auto& rec : r.records) {
        if (rec.status != "ok") continue;
        const BinaryMask goal_mask = decode_mask(io::read_file(dir / rec.mask_goal));
        if (count_set(goal_mask) > 0) CHECK(components(goal_mask) == 1);

        const BinaryMask path_mask = decode_mask(io::read_file(dir / rec.mask_path));
        const DepthImage depth = load_depth(dir / rec.depth);
        const PlannedPath path = parse_path_csv(io::read_file(dir / rec.path_csv));
        std::vector<Vec2> poly{{0.0, 0.0}};
        for (const auto& n : path.nodes) poly.push_back(n.position());
        for (int v = 0; v < path_mask.height; ++v)
            for (int u = 0; u < path_mask.width; ++u) {
                if (path_mask.at(u, v) <= 0.5 || depth.at(u, v) <= 0.0) continue;
                const Vec3 b = cam.camera_to_body(cam.backproject(u, v, depth.at(u, v)));
                if (std::abs(b.z) > 0.05) continue;  // pixel lands on an obstacle face, not the floor
                double best = 1e9;
                for (std::size_t i = 1; i < poly.size(); ++i) best = std::min(best, point_segment_distance({b.x, b.y}, poly[i - 1], poly[i]));
                CHECK(best <= 0.2);
                ++checked;
            }
    }
    CHECK(checked > 0);
}
