#include "wheelplan/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/random.hpp"

namespace wheelplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hit {
    double t = kInf;
    SemanticClass label = SemanticClass::Unknown;
};

// Slab test of a ray against an axis-aligned box in local coordinates.
double ray_box(Vec3 o, Vec3 d, Vec3 lo, Vec3 hi) {
    double t0 = 0.0, t1 = kInf;
    const double os[3] = {o.x, o.y, o.z}, ds[3] = {d.x, d.y, d.z};
    const double los[3] = {lo.x, lo.y, lo.z}, his[3] = {hi.x, hi.y, hi.z};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(ds[i]) < 1e-15) {
            if (os[i] < los[i] || os[i] > his[i]) return kInf;
            continue;
        }
        double a = (los[i] - os[i]) / ds[i], b = (his[i] - os[i]) / ds[i];
        if (a > b) std::swap(a, b);
        t0 = std::max(t0, a);
        t1 = std::min(t1, b);
        if (t0 > t1) return kInf;
    }
    return t0 > 1e-9 ? t0 : kInf;
}

double ray_cylinder(Vec3 o, Vec3 d, const CircleObstacle& c) {
    double best = kInf;
    const double ox = o.x - c.center.x, oy = o.y - c.center.y;
    const double a = d.x * d.x + d.y * d.y;
    if (a > 1e-15) {
        const double b = 2.0 * (ox * d.x + oy * d.y);
        const double cc = ox * ox + oy * oy - c.radius * c.radius;
        const double disc = b * b - 4.0 * a * cc;
        if (disc >= 0.0) {
            const double t = (-b - std::sqrt(disc)) / (2.0 * a);
            const double z = o.z + t * d.z;
            if (t > 1e-9 && z >= 0.0 && z <= c.height) best = t;
        }
    }
    if (std::abs(d.z) > 1e-15) {
        const double t = (c.height - o.z) / d.z;
        const double x = ox + t * d.x, y = oy + t * d.y;
        if (t > 1e-9 && x * x + y * y <= c.radius * c.radius) best = std::min(best, t);
    }
    return best;
}

bool inside_box(const BoxObstacle& b, Vec2 p) {
    const Vec2 local = transform_to(Pose2D{b.center.x, b.center.y, b.yaw}, p);
    return std::abs(local.x) <= b.length / 2.0 && std::abs(local.y) <= b.width / 2.0;
}

}  // namespace

void SceneSpec::validate() const {
    if (!(extent_max.x > extent_min.x && extent_max.y > extent_min.y)) {
        throw ContractViolation("scene: empty world extent");
    }
    auto inside_extent = [&](Vec2 p) {
        return p.x >= extent_min.x && p.x <= extent_max.x && p.y >= extent_min.y && p.y <= extent_max.y;
    };
    for (const auto& b : boxes) {
        if (!(b.length > 0.0 && b.width > 0.0 && b.height > 0.0)) throw ContractViolation("scene: degenerate box");
        if (!inside_extent(b.center)) throw ContractViolation("scene: box outside world extent");
    }
    for (const auto& c : circles) {
        if (!(c.radius > 0.0 && c.height > 0.0)) throw ContractViolation("scene: degenerate circle");
        if (!inside_extent(c.center)) throw ContractViolation("scene: circle outside world extent");
    }
    for (double r : {noise.drivable_flip_rate, noise.obstacle_flip_rate}) {
        if (!(r >= 0.0 && r <= 1.0)) throw ContractViolation("scene: misclassification rate outside [0,1]");
    }
    if (!(noise.depth_sigma >= 0.0)) throw ContractViolation("scene: negative depth noise");
}

SceneSpec SceneSpec::open_ground() {
    SceneSpec s;
    s.drivable_region = {s.extent_min, {s.extent_max.x, s.extent_min.y}, s.extent_max, {s.extent_min.x, s.extent_max.y}};
    return s;
}

SceneRender generate_scene(const SceneSpec& spec, const CameraModel& cam, std::uint64_t seed,
                           const PerceptionOptions& perception) {
    spec.validate();
    cam.validate();

    const Pose2D& pose = spec.robot_pose;
    const Vec2 cam_xy = transform_from(pose, {cam.translation.x, cam.translation.y});
    const Vec3 origin{cam_xy.x, cam_xy.y, cam.translation.z};
    for (const Vec2 p : {pose.position(), cam_xy}) {
        for (const auto& b : spec.boxes) {
            if (inside_box(b, p) && (p == pose.position() || origin.z <= b.height)) {
                throw InvalidScene("camera or robot inside a box obstacle");
            }
        }
        for (const auto& c : spec.circles) {
            if (distance(p, c.center) <= c.radius && (p == pose.position() || origin.z <= c.height)) {
                throw InvalidScene("camera or robot inside a circular obstacle");
            }
        }
    }

    const double c = std::cos(pose.theta), s = std::sin(pose.theta);
    // Camera-origin relative directions; the body->camera offset is already in `origin`.
    const Vec3 cam_origin_body = cam.camera_to_body({0.0, 0.0, 0.0});

    SceneRender out;
    out.clean_depth = DepthImage(cam.width, cam.height, 0.0);
    out.clean_semantic = SemanticImage(cam.width, cam.height, SemanticClass::Unknown);

    for (int v = 0; v < cam.height; ++v) {
        for (int u = 0; u < cam.width; ++u) {
            const Vec3 dir_cam{(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, 1.0};
            const Vec3 p_body = cam.camera_to_body(dir_cam);
            const Vec3 db{p_body.x - cam_origin_body.x, p_body.y - cam_origin_body.y, p_body.z - cam_origin_body.z};
            const Vec3 d{c * db.x - s * db.y, s * db.x + c * db.y, db.z};

            Hit hit;
            if (d.z < -1e-12) {
                const double t = -origin.z / d.z;
                const Vec2 g{origin.x + t * d.x, origin.y + t * d.y};
                if (g.x >= spec.extent_min.x && g.x <= spec.extent_max.x && g.y >= spec.extent_min.y &&
                    g.y <= spec.extent_max.y) {
                    hit.t = t;
                    hit.label = polygon_contains(spec.drivable_region, g) ? SemanticClass::Drivable : SemanticClass::Unknown;
                }
            }
            for (const auto& b : spec.boxes) {
                const Vec2 lo2 = transform_to(Pose2D{b.center.x, b.center.y, b.yaw}, {origin.x, origin.y});
                const double cy_ = std::cos(-b.yaw), sy_ = std::sin(-b.yaw);
                const Vec3 ol{lo2.x, lo2.y, origin.z};
                const Vec3 dl{cy_ * d.x - sy_ * d.y, sy_ * d.x + cy_ * d.y, d.z};
                const double t = ray_box(ol, dl, {-b.length / 2, -b.width / 2, 0.0}, {b.length / 2, b.width / 2, b.height});
                if (t < hit.t) hit = {t, SemanticClass::Obstacle};
            }
            for (const auto& cyl : spec.circles) {
                const double t = ray_cylinder(origin, d, cyl);
                if (t < hit.t) hit = {t, SemanticClass::Obstacle};
            }
            // Ray parameter equals optical-axis depth because dir_cam has unit z.
            if (hit.t < kInf && hit.t <= cam.max_range) {
                out.clean_depth.at(u, v) = hit.t;
                out.clean_semantic.at(u, v) = hit.label;
            }
        }
    }

    out.depth = out.clean_depth;
    out.semantic = out.clean_semantic;
    Rng rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (std::size_t i = 0; i < out.depth.data.size(); ++i) {
        // Draw a fixed number of variates per pixel so noise is stable under parameter changes.
        const double z = gauss(rng);
        const double flip = uniform01(rng);
        double& d = out.depth.data[i];
        if (d > 0.0 && spec.noise.depth_sigma > 0.0) {
            const double noisy = d + spec.noise.depth_sigma * z;
            if (noisy > 0.0) d = noisy;
        }
        SemanticClass& lbl = out.semantic.data[i];
        if (lbl == SemanticClass::Drivable && flip < spec.noise.drivable_flip_rate) {
            lbl = SemanticClass::Obstacle;
        } else if (lbl == SemanticClass::Obstacle && flip < spec.noise.obstacle_flip_rate) {
            lbl = SemanticClass::Drivable;
        }
    }

    // Shaded pseudo-RGB. Only ever stored and passed along.
    io::Netpbm rgb;
    rgb.kind = '6';
    rgb.width = cam.width;
    rgb.height = cam.height;
    rgb.maxval = 255;
    rgb.samples.reserve(static_cast<std::size_t>(cam.width) * cam.height * 3);
    for (std::size_t i = 0; i < out.clean_depth.data.size(); ++i) {
        const double d = out.clean_depth.data[i];
        const double shade = d > 0.0 ? std::clamp(1.0 - d / (1.5 * cam.max_range), 0.2, 1.0) : 1.0;
        int r = 135, g = 190, b = 235;  // sky
        if (d > 0.0) {
            switch (out.clean_semantic.data[i]) {
                case SemanticClass::Drivable: r = 128, g = 128, b = 128; break;
                case SemanticClass::Obstacle: r = 170, g = 90, b = 60; break;
                case SemanticClass::Unknown: r = 90, g = 140, b = 70; break;
            }
        }
        for (int ch : {r, g, b}) rgb.samples.push_back(static_cast<std::uint16_t>(ch * shade));
    }
    const std::string bytes = io::encode_netpbm(rgb);
    out.rgb.bytes.assign(bytes.begin(), bytes.end());

    // The clean render has no outliers; filtering it would only thin the sparse far field.
    PerceptionOptions truth_opts = perception;
    truth_opts.filter = false;
    out.ground_truth = perceive_costmap(out.clean_depth, out.clean_semantic, cam, truth_opts);
    return out;
}

SceneSpec random_scene_spec(std::uint64_t seed) {
    Rng rng(seed);
    SceneSpec spec;
    // A drivable band heading roughly forward, possibly bending.
    const double near_half = uniform(rng, 1.8, 4.0);
    const double far_half = uniform(rng, 1.5, 4.5);
    const double far_shift = uniform(rng, -3.0, 3.0);
    const double bend_x = uniform(rng, 4.0, 8.0);
    const double bend_shift = far_shift * uniform(rng, 0.2, 0.6);
    spec.drivable_region = {{-2.0, -near_half},
                            {bend_x, bend_shift - (near_half + far_half) / 2.0},
                            {20.0, far_shift - far_half},
                            {20.0, far_shift + far_half},
                            {bend_x, bend_shift + (near_half + far_half) / 2.0},
                            {-2.0, near_half}};
    const int n_obstacles = static_cast<int>(uniform_index(rng, 5)) + 1;
    for (int i = 0; i < n_obstacles; ++i) {
        const Vec2 center{uniform(rng, 2.5, 9.0), uniform(rng, -4.0, 4.0)};
        if (uniform01(rng) < 0.6) {
            spec.boxes.push_back({center, uniform(rng, 0.3, 1.5), uniform(rng, 0.3, 1.5), uniform(rng, -0.8, 0.8),
                                  uniform(rng, 0.4, 1.6)});
        } else {
            spec.circles.push_back({center, uniform(rng, 0.15, 0.6), uniform(rng, 0.4, 1.6)});
        }
    }
    return spec;
}

namespace {

using nlohmann::ordered_json;

ordered_json vec(Vec2 v) { return ordered_json::array({v.x, v.y}); }
Vec2 vec_from(const ordered_json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::string scene_to_json(const SceneSpec& spec, const std::string& provenance) {
    ordered_json j;
    if (!provenance.empty()) j["provenance"] = provenance;
    j["extent_min"] = vec(spec.extent_min);
    j["extent_max"] = vec(spec.extent_max);
    j["robot_pose"] = ordered_json::array({spec.robot_pose.x, spec.robot_pose.y, spec.robot_pose.theta});
    j["drivable_region"] = ordered_json::array();
    for (Vec2 p : spec.drivable_region) j["drivable_region"].push_back(vec(p));
    j["boxes"] = ordered_json::array();
    for (const auto& b : spec.boxes) {
        j["boxes"].push_back({{"center", vec(b.center)}, {"length", b.length}, {"width", b.width}, {"yaw", b.yaw},
                              {"height", b.height}});
    }
    j["circles"] = ordered_json::array();
    for (const auto& c : spec.circles) {
        j["circles"].push_back({{"center", vec(c.center)}, {"radius", c.radius}, {"height", c.height}});
    }
    j["noise"] = {{"depth_sigma", spec.noise.depth_sigma},
                  {"drivable_flip_rate", spec.noise.drivable_flip_rate},
                  {"obstacle_flip_rate", spec.noise.obstacle_flip_rate}};
    return j.dump(2) + "\n";
}

SceneSpec scene_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("scene json: ") + e.what(), e.byte);
    }
    try {
        SceneSpec spec;
        spec.extent_min = vec_from(j.at("extent_min"));
        spec.extent_max = vec_from(j.at("extent_max"));
        const auto& rp = j.at("robot_pose");
        spec.robot_pose = Pose2D{rp.at(0).get<double>(), rp.at(1).get<double>(), rp.at(2).get<double>()};
        for (const auto& p : j.at("drivable_region")) spec.drivable_region.push_back(vec_from(p));
        for (const auto& b : j.value("boxes", ordered_json::array())) {
            spec.boxes.push_back({vec_from(b.at("center")), b.at("length").get<double>(), b.at("width").get<double>(),
                                  b.value("yaw", 0.0), b.at("height").get<double>()});
        }
        for (const auto& c : j.value("circles", ordered_json::array())) {
            spec.circles.push_back({vec_from(c.at("center")), c.at("radius").get<double>(), c.at("height").get<double>()});
        }
        if (j.contains("noise")) {
            const auto& n = j.at("noise");
            spec.noise = {n.value("depth_sigma", 0.0), n.value("drivable_flip_rate", 0.0),
                          n.value("obstacle_flip_rate", 0.0)};
        }
        spec.validate();
        return spec;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("scene json: ") + e.what(), 0);
    }
}

}  // namespace wheelplan
