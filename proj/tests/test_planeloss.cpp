#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "wheelplan/errors.hpp"
#include "wheelplan/planeloss.hpp"
#include "wheelplan/random.hpp"
#include "wheelplan/synthetic.hpp"

using namespace wheelplan;

namespace {

std::vector<PlaneSample> synth(double a0, double a1, double phi, int stride = 8) {
    std::vector<PlaneSample> s;
    for (int v = 0; v < 224; v += stride)
        for (int u = 0; u < 320; u += stride)
            s.push_back({double(u), double(v), a0 + a1 * (-u * std::sin(phi) + v * std::cos(phi))});
    return s;
}

// Independent least squares for fixed phi via the 2x2 normal equations.
double residual_at(const std::vector<PlaneSample>& s, double phi) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : s) {
        const double x = -p.u * std::sin(phi) + p.v * std::cos(phi);
        n += 1, sx += x, sy += p.disparity, sxx += x * x, sxy += x * p.disparity;
    }
    const double det = n * sxx - sx * sx;
    const double a1 = (n * sxy - sx * sy) / det, a0 = (sy - a1 * sx) / n;
    double r = 0;
    for (const auto& p : s) {
        const double e = p.disparity - a0 - a1 * (-p.u * std::sin(phi) + p.v * std::cos(phi));
        r += e * e;
    }
    return r / n;
}

PlannedPath straight_path(double from, double to) {
    PlannedPath p;
    for (int i = 1; i <= PlannedPath::kNodeCount; ++i) p.nodes.emplace_back(from + (to - from) * i / 25.0, 0.0, 0.0);
    return p;
}

}  // namespace

TEST_CASE("noiseless level plane is recovered") {
    const auto s = synth(0.2, 0.004, 0.0);
    const PlaneFit f = fit_plane(s);
    CHECK(std::abs(f.a0 - 0.2) <= 1e-6);
    CHECK(std::abs(f.a1 - 0.004) <= 1e-6);
    CHECK(std::abs(f.phi) <= deg2rad(0.01));
    CHECK(f.mean_sq_residual <= 1e-12);
    CHECK(f.sample_count == s.size());
}

TEST_CASE("tilted plane matches a dense brute-force phi scan") {
    const double phi = deg2rad(5.0);
    const auto s = synth(0.2, 0.004, phi);
    const PlaneFit f = fit_plane(s);
    CHECK(std::abs(rad2deg(f.phi) - 5.0) <= 0.01);
    CHECK(f.mean_sq_residual <= 1e-10);
    double best = 1e300, best_phi = 0;
    for (double d = -45.0; d <= 45.0; d += 0.001) {
        const double r = residual_at(s, deg2rad(d));
        if (r < best) best = r, best_phi = d;
    }
    CHECK(std::abs(best_phi - 5.0) <= 0.001);
    CHECK(f.mean_sq_residual <= best + 1e-15);
    CHECK(plane_residual(s, f.a0, f.a1, f.phi) == doctest::Approx(f.mean_sq_residual).epsilon(1e-9));
}

TEST_CASE("fit does not depend on sample order") {
    auto s = synth(0.3, 0.006, deg2rad(-12.0), 16);
    Rng rng(4);
    for (auto& p : s) p.disparity += 0.01 * (uniform01(rng) - 0.5);
    const PlaneFit a = fit_plane(s);
    std::shuffle(s.begin(), s.end(), rng);
    const PlaneFit b = fit_plane(s);
    CHECK(a.a0 == b.a0);
    CHECK(a.a1 == b.a1);
    CHECK(a.phi == b.phi);
    CHECK(a.mean_sq_residual == b.mean_sq_residual);
}

TEST_CASE("gaussian noise residual tracks the noise variance") {
    const double sigma = 0.01;
    Rng rng(8);
    std::normal_distribution<double> noise(0.0, sigma);
    double total = 0.0;
    const int trials = 20;
    for (int t = 0; t < trials; ++t) {
        auto s = synth(0.25, 0.002, deg2rad(10.0), 4);
        for (auto& p : s) p.disparity += noise(rng);
        total += fit_plane(s).mean_sq_residual;
    }
    const double mean = total / trials;
    CHECK(mean >= 0.8 * sigma * sigma);
    CHECK(mean <= 1.2 * sigma * sigma);
}

TEST_CASE("constant disparity on a single row is degenerate") {
    std::vector<PlaneSample> s;
    for (int u = 0; u < 50; ++u) s.push_back({double(u), 40.0, 0.5});
    try {
        fit_plane(s);
        FAIL("expected a degenerate fit");
    } catch (const DegenerateFit& e) {
        CHECK(e.fallback().a1 == 0.0);
        CHECK(e.fallback().a0 == doctest::Approx(0.5));
        CHECK(e.fallback().mean_sq_residual == 0.0);
    }
    BinaryMask mask(60, 60, 0.0);
    DepthImage depth(60, 60, 2.0);
    for (int u = 0; u < 50; ++u) mask.at(u, 40) = 1.0;
    CHECK(loss_er(mask, depth) == 0.0);
}

TEST_CASE("too few samples") {
    BinaryMask mask(10, 10, 0.0);
    DepthImage depth(10, 10, 2.0);
    mask.at(1, 1) = 1.0;
    mask.at(2, 5) = 1.0;
    CHECK_THROWS_AS(loss_er(mask, depth), InsufficientSamples);
    const CameraModel cam = CameraModel::default_model();
    CHECK_THROWS_AS(loss_ir(straight_path(-5.0, -1.0), DepthImage(cam.width, cam.height, 3.0), cam), InsufficientSamples);
}

TEST_CASE("ground-only mask is planar and an obstacle face raises the loss") {
    const CameraModel cam = CameraModel::default_model();
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SceneSpec spec = SceneSpec::open_ground();
        spec.boxes.push_back({{4.0 + seed * 0.5, 0.0}, 0.6, 2.0, 0.0, 1.5});
        const SceneRender r = generate_scene(spec, cam, seed);
        BinaryMask ground(cam.width, cam.height, 0.0);
        std::vector<std::pair<int, int>> ground_px, face_px;
        for (int v = 0; v < cam.height; ++v)
            for (int u = 0; u < cam.width; ++u) {
                const auto c = r.clean_semantic.at(u, v);
                if (c == SemanticClass::Drivable && r.clean_depth.at(u, v) > 0.0) {
                    ground.at(u, v) = 1.0;
                    ground_px.push_back({u, v});
                }
                if (c == SemanticClass::Obstacle) face_px.push_back({u, v});
            }
        const double flat = loss_er(ground, r.clean_depth);
        CHECK(flat <= 1e-10);
        // Move 20% of the mask onto the obstacle face.
        BinaryMask mixed = ground;
        const std::size_t moved = std::min(face_px.size(), ground_px.size() / 5);
        REQUIRE(moved > 0);
        for (std::size_t i = 0; i < moved; ++i) {
            mixed.at(ground_px[i * 5].first, ground_px[i * 5].second) = 0.0;
            mixed.at(face_px[i].first, face_px[i].second) = 1.0;
        }
        CHECK(loss_er(mixed, r.clean_depth) > flat);
    }
}

TEST_CASE("path climbing an obstacle raises the internal plane loss") {
    const CameraModel cam = CameraModel::default_model();
    SceneSpec spec = SceneSpec::open_ground();
    const SceneRender open = generate_scene(spec, cam, 0);
    const PlannedPath path = straight_path(1.5, 7.5);
    CHECK(loss_ir(path, open.clean_depth, cam) <= 1e-10);

    // A box across the last five nodes: their pixels now see its face.
    spec.boxes.push_back({{6.9, 0.0}, 1.2, 2.0, 0.0, 1.5});
    const SceneRender blocked = generate_scene(spec, cam, 0);
    CHECK(loss_ir(path, blocked.clean_depth, cam) > loss_ir(path, open.clean_depth, cam));
}

TEST_CASE("internal path loss") {
    const PlannedPath a = straight_path(1.0, 5.0);
    CHECK(loss_ip(a, a) == 0.0);
    PlannedPath shifted = a;
    for (auto& n : shifted.nodes) n = Pose2D{n.x + 0.3, n.y + 0.4, n.theta};
    CHECK(loss_ip(shifted, a) == doctest::Approx(0.5).epsilon(1e-15));
    PlannedPath one = a;
    one.nodes[7].y += 1.0;
    CHECK(loss_ip(one, a) == doctest::Approx(0.04).epsilon(1e-15));
    PlannedPath short_path = a;
    short_path.nodes.pop_back();
    CHECK_THROWS_AS(loss_ip(short_path, a), ContractViolation);
}

TEST_CASE("external path loss") {
    BinaryMask label(20, 10, 0.0);
    for (int u = 0; u < 20; u += 3) label.at(u, 4) = 1.0;
    CHECK(loss_ep(label, label) <= 1e-6);
    const BinaryMask half(20, 10, 0.5);
    CHECK(std::abs(loss_ep(half, label) - std::log(2.0)) <= 1e-9);
    BinaryMask inverse = label;
    for (auto& x : inverse.data) x = 1.0 - x;
    CHECK(loss_ep(inverse, label) == doctest::Approx(-std::log(1e-7)).epsilon(1e-6));
    CHECK(-std::log(1e-7) == doctest::Approx(16.118).epsilon(1e-4));
}

TEST_CASE("combined losses") {
    const auto e = combined_losses(0.5, 1.0, 0.0, 0.0);
    CHECK(e.l_e == doctest::Approx(0.6).epsilon(1e-15));
    const auto i = combined_losses(0.0, 0.0, 0.2, 2.0);
    CHECK(i.l_i == doctest::Approx(0.5).epsilon(1e-15));
    const auto z = combined_losses(0.0, 0.0, 0.0, 0.0);
    CHECK(z.l_e == 0.0);
    CHECK(z.l_i == 0.0);
    const auto missing = combined_losses(0.3, std::nullopt, 0.1, std::nullopt);
    CHECK(missing.er_degenerate);
    CHECK(missing.l_e == 0.3);
    CHECK_THROWS_AS(combined_losses(0, 0, 0, 0, {-1.0, 0.1}), ContractViolation);
}

TEST_CASE("fit is never beaten by the phi grid oracle") {
    Rng rng(31);
    for (int t = 0; t < 50; ++t) {
        auto s = synth(uniform(rng, 0.1, 0.5), uniform(rng, 0.0005, 0.002), deg2rad(uniform(rng, -40.0, 40.0)), 16);
        for (auto& p : s) p.disparity = std::max(1e-3, p.disparity + 0.02 * (uniform01(rng) - 0.5));
        const PlaneFit f = fit_plane(s);
        for (double d = -45.0; d <= 45.0; d += 0.25) CHECK(f.mean_sq_residual <= residual_at(s, deg2rad(d)) + 1e-9);
    }
}

TEST_CASE("internal path loss is a symmetric metric") {
    Rng rng(32);
    auto random_path = [&] {
        PlannedPath p;
        for (int i = 0; i < PlannedPath::kNodeCount; ++i) p.nodes.emplace_back(uniform(rng, -3, 3), uniform(rng, -3, 3), 0.0);
        return p;
    };
    for (int t = 0; t < 200; ++t) {
        const PlannedPath a = random_path(), b = random_path(), c = random_path();
        CHECK(loss_ip(a, b) == loss_ip(b, a));
        CHECK(loss_ip(a, b) > 0.0);
        CHECK(loss_ip(a, c) <= loss_ip(a, b) + loss_ip(b, c) + 1e-12);
    }
}
