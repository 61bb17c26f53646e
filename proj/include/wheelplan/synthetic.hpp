#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/scene.hpp"

namespace wheelplan {

struct BoxObstacle {
    Vec2 center;
    double length = 1.0;  // along the box's own x
    double width = 1.0;
    double yaw = 0.0;
    double height = 1.0;
};

struct CircleObstacle {
    Vec2 center;
    double radius = 0.5;
    double height = 1.0;
};

struct SceneNoise {
    double depth_sigma = 0.0;         // meters
    double drivable_flip_rate = 0.0;  // P(drivable pixel labeled obstacle)
    double obstacle_flip_rate = 0.0;  // P(obstacle pixel labeled drivable)
};

/// Synthetic stand-in for a recorded RGB-D frame: flat ground, a drivable
/// polygon on it, and extruded obstacles, seen from `robot_pose`.
struct SceneSpec {
    Vec2 extent_min{-2.0, -10.0};
    Vec2 extent_max{20.0, 10.0};
    std::vector<BoxObstacle> boxes;
    std::vector<CircleObstacle> circles;
    std::vector<Vec2> drivable_region;  // world frame polygon
    Pose2D robot_pose{};
    SceneNoise noise{};

    /// Throws ContractViolation on a malformed spec.
    void validate() const;

    /// Flat, obstacle-free world that is drivable everywhere inside the extent.
    static SceneSpec open_ground();
};

struct SceneRender {
    DepthImage depth;
    SemanticImage semantic;
    RgbRef rgb;
    Costmap ground_truth;
    /// Noise-free images the ground truth was built from.
    DepthImage clean_depth;
    SemanticImage clean_semantic;
};

/// Ray-casts the spec into depth + semantic images, applies the spec noise,
/// and builds the noise-free ground-truth costmap. Pure in (spec, cam, seed).
SceneRender generate_scene(const SceneSpec& spec, const CameraModel& cam, std::uint64_t seed,
                           const PerceptionOptions& perception = {});

/// Random but plausible corridor-like scene.
SceneSpec random_scene_spec(std::uint64_t seed);

/// `provenance`, when given, is stored as the first key and ignored on reading.
std::string scene_to_json(const SceneSpec& spec, const std::string& provenance = {});
SceneSpec scene_from_json(const std::string& text);

}  // namespace wheelplan
