#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wheelplan/geometry.hpp"

namespace wheelplan {

/// Working image resolution of the whole pipeline.
inline constexpr int kWorkingWidth = 320;
inline constexpr int kWorkingHeight = 224;

enum class SemanticClass : std::uint8_t { Unknown = 0, Drivable = 1, Obstacle = 2 };

/// Pinhole camera without distortion. Extrinsics map the camera optical frame
/// (x right, y down, z forward) into the body frame (x forward, y left, z up):
///
///   q_body = rotation * P * q_cam + translation
///
/// where P is the fixed optical-to-body axis permutation. An identity
/// `rotation` is therefore a level camera looking along body +x.
struct CameraModel {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;
    double horizontal_fov = 0.0;  // radians
    double max_range = 10.0;      // meters
    std::array<double, 9> rotation{1, 0, 0, 0, 1, 0, 0, 0, 1};
    Vec3 translation{};

    /// 320x224 camera with 86 deg horizontal FOV, mounted 1 m high, pitched 15 deg down.
    static CameraModel default_model();

    /// Throws ContractViolation if any invariant is broken.
    void validate() const;

    Vec3 camera_to_body(Vec3 q) const;
    Vec3 body_to_camera(Vec3 q) const;

    /// Pixel (u, v) of a camera-frame point, or nullopt when the point is not in front of the camera.
    std::optional<Vec2> project(Vec3 q_cam) const;
    Vec3 backproject(double u, double v, double depth) const;

    /// Same camera at a different image size; intrinsics scale with the image.
    CameraModel scaled_to(int new_width, int new_height) const;
};

template <class T>
struct Image {
    int width = 0;
    int height = 0;
    std::vector<T> data;

    Image() = default;
    Image(int w, int h, T fill = T{}) : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

    T& at(int u, int v) { return data[static_cast<std::size_t>(v) * width + u]; }
    const T& at(int u, int v) const { return data[static_cast<std::size_t>(v) * width + u]; }
    bool contains(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Depth along the optical axis in meters; 0 marks an invalid pixel.
using DepthImage = Image<double>;
using SemanticImage = Image<SemanticClass>;

/// Opaque handle to the RGB frame. Planning code never looks inside.
struct RgbRef {
    std::string path;
    std::vector<std::uint8_t> bytes;

    friend bool operator==(const RgbRef&, const RgbRef&) = default;
};

enum class Frame { Camera, ProjectedBody };

struct LabeledPoint {
    Vec3 position;
    SemanticClass label = SemanticClass::Unknown;

    friend bool operator==(const LabeledPoint&, const LabeledPoint&) = default;
};

struct PointCloud {
    Frame frame = Frame::Camera;
    std::vector<LabeledPoint> points;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Pixels with zero depth or depth beyond the camera range contribute nothing.
PointCloud backproject(const DepthImage& depth, const SemanticImage& semantic, const CameraModel& cam);

struct OutlierFilterResult {
    PointCloud cloud;
    std::size_t removed = 0;
    /// Set when the cloud is too small for the requested neighborhood; the input is returned as is.
    bool too_small = false;
};

/// Statistical outlier removal: a point is dropped when the mean distance to its
/// k nearest neighbors exceeds mean + std_mult * stddev over the whole cloud.
OutlierFilterResult filter_outliers(const PointCloud& pc, int k = 8, double std_mult = 1.0);

/// Runs filter_outliers separately on the drivable and the obstacle subsets so
/// that isolated mislabeled points are judged against their own class.
PointCloud filter_outliers_per_class(const PointCloud& pc, int k = 8, double std_mult = 1.0);

// --- file loaders -----------------------------------------------------------

DepthImage load_depth(const std::filesystem::path& path);
SemanticImage load_semantic(const std::filesystem::path& path);
CameraModel load_camera(const std::filesystem::path& path);

/// 16-bit graymap with a `depth-scale` header comment; depths are rounded to the scale.
std::string encode_depth(const DepthImage& img, double scale = 0.001, const std::vector<std::string>& comments = {});
std::string encode_semantic(const SemanticImage& img, const std::vector<std::string>& comments = {});

CameraModel parse_camera(const std::string& text);
std::string format_camera(const CameraModel& cam);

/// Area-averaging over valid (non-zero) source pixels.
DepthImage downsample_depth(const DepthImage& img, int width, int height);
/// Nearest-neighbor sampling.
SemanticImage downsample_semantic(const SemanticImage& img, int width, int height);

}  // namespace wheelplan
