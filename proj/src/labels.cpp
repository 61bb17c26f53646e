#include "wheelplan/labels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/parallel.hpp"
#include "wheelplan/random.hpp"

namespace wheelplan {

namespace {

constexpr double kNearPlane = 0.01;  // m, clipping plane in front of the camera

void stamp_capsule(BinaryMask& mask, Vec2 a, Vec2 b, double radius) {
    const int u0 = std::max(0, static_cast<int>(std::floor(std::min(a.x, b.x) - radius)));
    const int u1 = std::min(mask.width - 1, static_cast<int>(std::ceil(std::max(a.x, b.x) + radius)));
    const int v0 = std::max(0, static_cast<int>(std::floor(std::min(a.y, b.y) - radius)));
    const int v1 = std::min(mask.height - 1, static_cast<int>(std::ceil(std::max(a.y, b.y) + radius)));
    for (int v = v0; v <= v1; ++v) {
        for (int u = u0; u <= u1; ++u) {
            if (point_segment_distance({static_cast<double>(u), static_cast<double>(v)}, a, b) <= radius + 1e-9) {
                mask.at(u, v) = 1.0;
            }
        }
    }
}

Vec3 lerp(Vec3 a, Vec3 b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y), a.z + t * (b.z - a.z)}; }

// Free cells whose ground-plane centre projects into the image. Cells kept
// free only by the robot prior are never seen, so goals there have no label.
Costmap in_view_free(const Costmap& map, const CameraModel& cam) {
    Costmap out = map;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (map.at({r, c}) != CellState::Free) continue;
            const Vec2 p = map.cell_center({r, c});
            const Vec3 q = cam.body_to_camera({p.x, p.y, 0.0});
            const auto px = q.z >= kNearPlane ? cam.project(q) : std::nullopt;
            if (!px || px->x < 0.0 || px->y < 0.0 || px->x > cam.width - 1 || px->y > cam.height - 1) {
                out.set({r, c}, CellState::Unknown);
            }
        }
    }
    return out;
}

}  // namespace

std::size_t count_set(const BinaryMask& mask) {
    return static_cast<std::size_t>(std::count_if(mask.data.begin(), mask.data.end(), [](double v) { return v > 0.5; }));
}

std::string encode_mask(const BinaryMask& mask, const std::vector<std::string>& comments) {
    io::Netpbm pgm{'5', mask.width, mask.height, 255, comments, {}};
    pgm.samples.reserve(mask.data.size());
    for (double v : mask.data) pgm.samples.push_back(static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    return io::encode_netpbm(pgm);
}

BinaryMask decode_mask(std::string_view bytes) {
    const io::Netpbm pgm = io::parse_netpbm(bytes);
    if (pgm.kind != '5') throw ParseError("mask must be a graymap", 1);
    BinaryMask mask(pgm.width, pgm.height, 0.0);
    for (std::size_t i = 0; i < mask.data.size(); ++i) mask.data[i] = static_cast<double>(pgm.samples[i]) / pgm.maxval;
    return mask;
}

Pose2D sample_goal(const Costmap& map, std::uint64_t seed, double min_dist) {
    std::vector<CellIndex> candidates;
    for (int r = 0; r < map.height(); ++r) {
        for (int c = 0; c < map.width(); ++c) {
            if (map.at({r, c}) == CellState::Free && norm(map.cell_center({r, c})) >= min_dist) candidates.push_back({r, c});
        }
    }
    if (candidates.empty()) throw NoFreeSpace("no Free cell at least " + io::format_double(min_dist) + " m from the robot");
    Rng rng(seed);
    const Vec2 p = map.cell_center(candidates[uniform_index(rng, candidates.size())]);
    // pi - [0, 2pi) lands in (-pi, pi].
    const double theta = std::numbers::pi - 2.0 * std::numbers::pi * uniform01(rng);
    return {p.x, p.y, theta};
}

MaskResult project_to_mask(std::span<const Vec2> points, const CameraModel& cam, double thickness, MaskShape shape) {
    if (points.empty()) throw ContractViolation("project_to_mask: no points");
    if (!(thickness > 0.0)) throw ContractViolation("project_to_mask: thickness must be positive");
    MaskResult out;
    out.mask = BinaryMask(cam.width, cam.height, 0.0);

    std::vector<Vec3> q;
    q.reserve(points.size());
    for (Vec2 p : points) q.push_back(cam.body_to_camera({p.x, p.y, 0.0}));

    if (shape == MaskShape::Disc || q.size() == 1) {
        const double radius = shape == MaskShape::Disc ? thickness : thickness / 2.0;
        if (q.front().z >= kNearPlane) {
            if (const auto px = cam.project(q.front())) stamp_capsule(out.mask, *px, *px, radius);
        }
    } else {
        for (std::size_t i = 0; i + 1 < q.size(); ++i) {
            Vec3 a = q[i], b = q[i + 1];
            if (a.z < kNearPlane && b.z < kNearPlane) continue;
            if (a.z < kNearPlane) a = lerp(a, b, (kNearPlane - a.z) / (b.z - a.z));
            if (b.z < kNearPlane) b = lerp(b, a, (kNearPlane - b.z) / (a.z - b.z));
            const auto pa = cam.project(a), pb = cam.project(b);
            if (pa && pb) stamp_capsule(out.mask, *pa, *pb, thickness / 2.0);
        }
    }
    out.empty = count_set(out.mask) == 0;
    return out;
}

void DatasetOptions::validate() const {
    planner.validate();
    camera.validate();
    if (goals_per_scene <= 0) throw ContractViolation("dataset: goals_per_scene must be positive");
    double sum = 0.0;
    for (double r : split_ratio) {
        if (!(r >= 0.0)) throw ContractViolation("dataset: negative split ratio");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ContractViolation("dataset: split ratios must sum to 1");
    if (!(path_thickness > 0.0 && goal_radius > 0.0)) throw ContractViolation("dataset: mask sizes must be positive");
}

std::vector<std::string> assign_splits(std::span<const std::size_t> scene_sizes, const std::array<double, 3>& ratio,
                                       std::uint64_t seed) {
    const std::size_t n = scene_sizes.size();
    double total = 0.0;
    for (std::size_t sz : scene_sizes) total += static_cast<double>(sz);
    // Seeded shuffle breaks ties between equal scenes; larger scenes go first.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(derive_seed(seed, 0x53504c4954ULL));
    for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scene_sizes[a] > scene_sizes[b]; });

    static constexpr const char* kNames[3] = {"train", "val", "test"};
    std::array<double, 3> deficit{ratio[0] * total, ratio[1] * total, ratio[2] * total};
    std::vector<std::string> split(n);
    for (std::size_t i : order) {
        int k = 0;
        for (int j = 1; j < 3; ++j)
            if (deficit[j] > deficit[k]) k = j;
        deficit[k] -= static_cast<double>(scene_sizes[i]);
        split[i] = kNames[k];
    }
    return split;
}

namespace {

std::string scene_dir_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "scene_%04zu", i);
    return buf;
}

std::vector<SampleRecord> generate_scene_samples(const SceneSpec& spec, std::size_t scene_index, const DatasetOptions& opts,
                                                 const std::filesystem::path& out_dir, const std::string& provenance) {
    const std::uint64_t scene_seed = derive_seed(opts.seed, scene_index);
    const std::string dir = scene_dir_name(scene_index);
    const std::vector<std::string> header{provenance, "scene " + dir};

    const SceneRender render = generate_scene(spec, opts.camera, derive_seed(scene_seed, 0), opts.perception);
    const Costmap perceived = perceive_costmap(render.depth, render.semantic, opts.camera, opts.perception);
    const Costmap goal_candidates = in_view_free(perceived, opts.camera);

    io::write_file(out_dir / dir / "rgb.ppm",
                   std::string_view(reinterpret_cast<const char*>(render.rgb.bytes.data()), render.rgb.bytes.size()));
    io::write_file(out_dir / dir / "depth.pgm", encode_depth(render.depth, 0.001, header));
    io::write_file(out_dir / dir / "semantic.pgm", encode_semantic(render.semantic, header));
    io::write_file(out_dir / dir / "costmap.txt", format_costmap(perceived, header));
    io::write_file(out_dir / dir / "costmap_gt.txt", format_costmap(render.ground_truth, header));
    io::write_file(out_dir / dir / "scene.json", scene_to_json(spec));

    std::vector<SampleRecord> records;
    for (int j = 0; j < opts.goals_per_scene; ++j) {
        SampleRecord rec;
        char id[48];
        std::snprintf(id, sizeof id, "%s_goal_%03d", dir.c_str(), j);
        rec.id = id;
        rec.scene = static_cast<int>(scene_index);
        rec.planner = std::string(algorithm_name(opts.planner.algorithm));
        rec.rgb = dir + "/rgb.ppm";
        rec.depth = dir + "/depth.pgm";
        rec.semantic = dir + "/semantic.pgm";
        rec.costmap = dir + "/costmap.txt";
        rec.gt_costmap = dir + "/costmap_gt.txt";
        rec.split = "none";

        const std::uint64_t goal_seed = derive_seed(scene_seed, 1 + static_cast<std::uint64_t>(j));
        Pose2D goal;
        try {
            goal = sample_goal(goal_candidates, goal_seed, opts.min_goal_dist);
        } catch (const NoFreeSpace&) {
            rec.status = "no_free_space";
            records.push_back(std::move(rec));
            continue;
        }
        rec.has_goal = true;
        rec.goal = goal;

        PlannerParams planner = opts.planner;
        planner.seed = derive_seed(goal_seed, 0x706c616eULL);
        PlanResult planned;
        try {
            planned = plan_path(perceived, Pose2D{0.0, 0.0, 0.0}, goal, planner);
        } catch (const NoPathFound&) {
            rec.status = "no_path";
            records.push_back(std::move(rec));
            continue;
        }
        rec.goal = planned.goal;

        std::vector<Vec2> polyline{{0.0, 0.0}};
        for (Vec2 p : planned.path.positions()) polyline.push_back(p);
        const MaskResult path_mask = project_to_mask(polyline, opts.camera, opts.path_thickness, MaskShape::Polyline);
        if (path_mask.empty) {
            rec.status = "out_of_view";
            records.push_back(std::move(rec));
            continue;
        }
        const Vec2 goal_point = planned.goal.position();
        const MaskResult goal_mask = project_to_mask({&goal_point, 1}, opts.camera, opts.goal_radius, MaskShape::Disc);

        const std::vector<std::string> sample_header{provenance, "sample " + rec.id};
        rec.mask_path = dir + "/" + rec.id.substr(dir.size() + 1) + "_mask_path.pgm";
        rec.mask_goal = dir + "/" + rec.id.substr(dir.size() + 1) + "_mask_goal.pgm";
        rec.path_csv = dir + "/" + rec.id.substr(dir.size() + 1) + "_path.csv";
        io::write_file(out_dir / rec.mask_path, encode_mask(path_mask.mask, sample_header));
        io::write_file(out_dir / rec.mask_goal, encode_mask(goal_mask.mask, sample_header));
        io::write_file(out_dir / rec.path_csv, format_path_csv(planned.path, sample_header));
        rec.status = "ok";
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace

DatasetResult generate_dataset(std::span<const SceneSpec> scenes, const DatasetOptions& opts,
                               const std::filesystem::path& out_dir, const std::string& provenance) {
    opts.validate();
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec || !std::filesystem::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

    std::vector<std::vector<SampleRecord>> per_scene(scenes.size());
    parallel_for(
        scenes.size(),
        [&](std::size_t i) { per_scene[i] = generate_scene_samples(scenes[i], i, opts, out_dir, provenance); },
        opts.threads);

    DatasetResult result;
    std::vector<std::size_t> ok_counts(scenes.size(), 0);
    for (std::size_t i = 0; i < scenes.size(); ++i)
        for (const auto& rec : per_scene[i]) ok_counts[i] += rec.status == "ok";
    const std::vector<std::string> splits = assign_splits(ok_counts, opts.split_ratio, opts.seed);
    for (std::size_t i = 0; i < scenes.size(); ++i) {
        for (auto& rec : per_scene[i]) {
            if (rec.status == "ok") rec.split = splits[i];
            result.records.push_back(std::move(rec));
        }
    }
    result.manifest = format_manifest(result.records, provenance);
    io::write_file(out_dir / "manifest.jsonl", result.manifest);
    return result;
}

std::string format_manifest(std::span<const SampleRecord> records, const std::string& provenance) {
    std::string out = nlohmann::ordered_json{{"provenance", provenance}}.dump() + "\n";
    for (const auto& r : records) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["scene"] = r.scene;
        j["rgb"] = r.rgb;
        j["depth"] = r.depth;
        j["semantic"] = r.semantic;
        j["costmap"] = r.costmap;
        j["gt_costmap"] = r.gt_costmap;
        if (r.has_goal) {
            j["goal_x"] = r.goal.x;
            j["goal_y"] = r.goal.y;
            j["goal_theta"] = r.goal.theta;
        } else {
            j["goal_x"] = nullptr;
            j["goal_y"] = nullptr;
            j["goal_theta"] = nullptr;
        }
        j["mask_goal"] = r.mask_goal;
        j["mask_path"] = r.mask_path;
        j["path_csv"] = r.path_csv;
        j["planner"] = r.planner;
        j["split"] = r.split;
        j["status"] = r.status;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<SampleRecord> parse_manifest(std::string_view text) {
    std::vector<SampleRecord> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        const std::size_t start = pos;
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("manifest: ") + e.what(), start + e.byte - (e.byte > 0 ? 1 : 0));
        }
        if (j.contains("provenance")) continue;
        try {
            SampleRecord r;
            r.id = j.at("id").get<std::string>();
            r.scene = j.value("scene", 0);
            r.rgb = j.value("rgb", "");
            r.depth = j.value("depth", "");
            r.semantic = j.value("semantic", "");
            r.costmap = j.value("costmap", "");
            r.gt_costmap = j.value("gt_costmap", "");
            if (j.contains("goal_x") && !j["goal_x"].is_null()) {
                r.has_goal = true;
                r.goal = Pose2D{j.at("goal_x").get<double>(), j.at("goal_y").get<double>(), j.at("goal_theta").get<double>()};
            }
            r.mask_goal = j.value("mask_goal", "");
            r.mask_path = j.value("mask_path", "");
            r.path_csv = j.value("path_csv", "");
            r.planner = j.value("planner", "");
            r.split = j.value("split", "");
            r.status = j.value("status", "");
            out.push_back(std::move(r));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("manifest record: ") + e.what(), start);
        }
    }
    return out;
}

}  // namespace wheelplan
