#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wheelplan/geometry.hpp"
#include "wheelplan/scene.hpp"

namespace wheelplan {

enum class CellState : std::uint8_t { Unknown = 0, Free = 1, Occupied = 2 };

struct CellIndex {
    int row = 0;  // along grid y
    int col = 0;  // along grid x

    friend bool operator==(CellIndex, CellIndex) = default;
    friend auto operator<=>(CellIndex, CellIndex) = default;
};

/// Occupancy grid. Cell (row, col) covers [col, col+1) x [row, row+1) cell
/// units in the grid frame, whose pose in the parent frame is `origin`.
class Costmap {
public:
    Costmap() = default;
    Costmap(int width, int height, double resolution, Pose2D origin, CellState fill = CellState::Unknown);

    int width() const { return width_; }
    int height() const { return height_; }
    double resolution() const { return resolution_; }
    const Pose2D& origin() const { return origin_; }

    bool in_bounds(CellIndex c) const { return c.row >= 0 && c.col >= 0 && c.row < height_ && c.col < width_; }
    CellState at(CellIndex c) const { return cells_[index(c)]; }
    void set(CellIndex c, CellState s) { cells_[index(c)] = s; }
    bool is_free(CellIndex c) const { return in_bounds(c) && at(c) == CellState::Free; }

    /// Cell containing p (parent-frame coordinates), or nullopt when outside the grid.
    std::optional<CellIndex> cell_of(Vec2 p) const;
    /// Same as cell_of but without the bounds check.
    CellIndex cell_of_unchecked(Vec2 p) const;
    Vec2 cell_center(CellIndex c) const;

    std::size_t count(CellState s) const;
    std::span<const CellState> cells() const { return cells_; }
    bool same_geometry(const Costmap& other) const;

    friend bool operator==(const Costmap&, const Costmap&) = default;

private:
    std::size_t index(CellIndex c) const { return static_cast<std::size_t>(c.row) * width_ + c.col; }

    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.1;
    Pose2D origin_{};
    std::vector<CellState> cells_;
};

struct RobotFootprint {
    double length = 1.0;
    double width = 0.5;
    double inflation_radius = 0.5;
    double constriction_radius = 0.5;

    void validate() const;
};

/// 10 m forward x 10 m lateral at 0.1 m, laterally centered on the robot with 1 m kept behind it.
struct GridGeometry {
    int width = 100;
    int height = 100;
    double resolution = 0.1;
    Pose2D origin{-1.0, -5.0, 0.0};
};

struct CostmapOptions {
    GridGeometry geometry{};
    /// One hull over all obstacle points instead of one hull per 8-connected cluster.
    bool single_hull = false;
    /// Adds the robot footprint, grown by the constriction radius plus `robot_prior_margin`,
    /// to the drivable support so the cells under the robot survive constriction.
    bool robot_prior = true;
    double robot_prior_margin = 0.2;
};

/// Camera-frame cloud -> projected body frame (z dropped, labels kept).
PointCloud project_to_body(const PointCloud& pc, const CameraModel& cam);

Costmap build_costmap(const PointCloud& pc_body, const RobotFootprint& footprint, const CostmapOptions& opts = {});

/// Cells whose centers lie inside (or on) the convex polygon, polygon in parent-frame coordinates.
std::vector<CellIndex> rasterize_convex(const Costmap& map, std::span<const Vec2> hull);

/// Free cells with any non-Free cell within `radius` (center to center) become Unknown.
void constrict_free(Costmap& map, double radius);
/// Every cell within `radius` of an Occupied cell becomes Occupied.
void inflate_occupied(Costmap& map, double radius);

/// Weighted per-cell disagreement in [0, 1]: 1 for a Free/Occupied conflict,
/// 0.5 when exactly one side is Unknown.
double costmap_distance(const Costmap& a, const Costmap& b);

bool is_traversable(const Costmap& map, Vec2 p);
inline bool is_traversable(const Costmap& map, const Pose2D& p) { return is_traversable(map, p.position()); }

struct PerceptionOptions {
    bool filter = true;
    int outlier_k = 8;
    double outlier_std_mult = 1.0;
    RobotFootprint footprint{};
    CostmapOptions costmap{};
};

/// Depth + semantic images -> costmap: backproject, per-class outlier filter, project, build.
Costmap perceive_costmap(const DepthImage& depth, const SemanticImage& semantic, const CameraModel& cam,
                         const PerceptionOptions& opts = {});

/// Text form: `costmap <w> <h> <res> <ox> <oy> <otheta>` then h rows of {U,F,O}, row 0 first.
/// Lines before the header starting with '#' are comments.
std::string format_costmap(const Costmap& map, std::span<const std::string> comments = {});
Costmap parse_costmap(std::string_view text);

}  // namespace wheelplan
