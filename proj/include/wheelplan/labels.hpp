#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/planners.hpp"
#include "wheelplan/scene.hpp"
#include "wheelplan/synthetic.hpp"

namespace wheelplan {

/// Per-pixel value in [0, 1]. Labels are exactly 0 or 1; predictions may be fractional.
using BinaryMask = Image<double>;

std::size_t count_set(const BinaryMask& mask);
std::string encode_mask(const BinaryMask& mask, const std::vector<std::string>& comments = {});
BinaryMask decode_mask(std::string_view bytes);

/// Uniform over Free cell centers at least `min_dist` from the body origin; heading uniform in (-pi, pi].
Pose2D sample_goal(const Costmap& map, std::uint64_t seed, double min_dist = 1.0);

enum class MaskShape { Polyline, Disc };

struct MaskResult {
    BinaryMask mask;
    bool empty = true;
};

/// Projects ground-plane body-frame points into the image. Polyline: pixels
/// within thickness/2 of the projected polyline. Disc: pixels within
/// `thickness` of the first point. Parts behind the camera are clipped.
MaskResult project_to_mask(std::span<const Vec2> points, const CameraModel& cam, double thickness,
                           MaskShape shape = MaskShape::Polyline);

struct DatasetOptions {
    PlannerParams planner{};
    int goals_per_scene = 10;
    std::uint64_t seed = 0;
    std::array<double, 3> split_ratio{0.6, 0.2, 0.2};
    double min_goal_dist = 1.0;
    double path_thickness = 5.0;
    double goal_radius = 5.0;
    CameraModel camera = CameraModel::default_model();
    PerceptionOptions perception{};
    unsigned threads = 0;  // 0: default_thread_count()

    void validate() const;
};

struct SampleRecord {
    std::string id;
    int scene = 0;
    std::string status;  // ok | no_free_space | no_path | out_of_view
    std::string split;   // train | val | test | none (failures)
    bool has_goal = false;
    Pose2D goal{};
    std::string planner;
    // Paths relative to the manifest directory; empty when not produced.
    std::string rgb, depth, semantic, costmap, gt_costmap, mask_goal, mask_path, path_csv;
};

/// Scene-disjoint split. `scene_sizes` holds each scene's sample count; scenes
/// are taken largest first (seeded order among equals) and each joins the split
/// furthest below its share of the samples.
std::vector<std::string> assign_splits(std::span<const std::size_t> scene_sizes, const std::array<double, 3>& ratio,
                                       std::uint64_t seed);

struct DatasetResult {
    std::vector<SampleRecord> records;
    std::string manifest;  // JSON lines, first line is the provenance record
};

/// Renders every scene, samples goals on the perceived costmap, plans, and
/// writes images, masks and paths under `out_dir` plus `out_dir/manifest.jsonl`.
DatasetResult generate_dataset(std::span<const SceneSpec> scenes, const DatasetOptions& opts,
                               const std::filesystem::path& out_dir, const std::string& provenance);

std::string format_manifest(std::span<const SampleRecord> records, const std::string& provenance);
std::vector<SampleRecord> parse_manifest(std::string_view text);

}  // namespace wheelplan
