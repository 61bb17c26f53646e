#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace wheelplan {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(Vec3, Vec3) = default;
};

/// Wraps an angle into (-pi, pi].
inline double normalize_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    a = std::fmod(a, two_pi);
    if (a <= -std::numbers::pi) a += two_pi;
    if (a > std::numbers::pi) a -= two_pi;
    return a;
}

inline double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

/// Planar pose: position in meters, heading in radians, normalized to (-pi, pi].
struct Pose2D {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Pose2D() = default;
    Pose2D(double x_, double y_, double theta_ = 0.0)
        : x(x_), y(y_), theta(normalize_angle(theta_)) {}

    Vec2 position() const { return {x, y}; }

    friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// Maps a point expressed in `frame` into the frame `frame` itself lives in.
inline Vec2 transform_from(const Pose2D& frame, Vec2 p) {
    const double c = std::cos(frame.theta), s = std::sin(frame.theta);
    return {frame.x + c * p.x - s * p.y, frame.y + s * p.x + c * p.y};
}

/// Inverse of transform_from.
inline Vec2 transform_to(const Pose2D& frame, Vec2 p) {
    const double c = std::cos(frame.theta), s = std::sin(frame.theta);
    const double dx = p.x - frame.x, dy = p.y - frame.y;
    return {c * dx + s * dy, -s * dx + c * dy};
}

/// Neumaier-compensated accumulator.
class KahanSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v)) {
            comp_ += (sum_ - t) + v;
        } else {
            comp_ += (v - t) + sum_;
        }
        sum_ = t;
    }
    KahanSum& operator+=(double v) {
        add(v);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Convex hull by Andrew's monotone chain, counter-clockwise, collinear points dropped.
std::vector<Vec2> convex_hull(std::span<const Vec2> points);

/// Inclusive containment test against a counter-clockwise convex polygon.
bool convex_contains(std::span<const Vec2> hull, Vec2 p, double eps = 1e-9);

/// Inclusive containment test for an arbitrary simple polygon (even-odd rule).
bool polygon_contains(std::span<const Vec2> polygon, Vec2 p);

/// Euclidean distance from p to segment ab.
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);

/// Total length of a polyline.
double polyline_length(std::span<const Vec2> pts);

}  // namespace wheelplan
