#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wheelplan/costmap.hpp"
#include "wheelplan/planners.hpp"

namespace wheelplan {

enum class FailureReason { None, Collision, GoalMissed, NoPath };

std::string_view failure_name(FailureReason r);

struct SuccessCheck {
    bool success = false;
    FailureReason reason = FailureReason::None;
};

/// Every segment between consecutive nodes passes collision_check on `gt_map`,
/// and the last node lies within `tol` of the goal position.
SuccessCheck check_success(const PlannedPath& path, const Costmap& gt_map, const Pose2D& goal, double tol = 0.2);

/// Sum of absolute turning angles over the 25 nodes divided by 25 * 90 deg. The
/// first angle is measured against the +x initial heading, the last against the
/// goal heading; zero-length segments are skipped. `initial_heading` is the
/// robot heading the path starts from (0 in the body frame).
double turning_cost(const PlannedPath& path, double initial_heading = 0.0);

struct EvalRecord {
    std::string sample_id;
    std::string planner;
    bool success = false;
    double tc = 0.0;
    double D = 0.0;
    FailureReason reason = FailureReason::None;
};

struct EvalSample {
    std::string id;
    Costmap perceived;
    Costmap ground_truth;
    Pose2D goal;
};

struct SuiteRow {
    std::string planner;
    std::size_t n = 0;
    std::size_t successes = 0;
    double sr_percent = 0.0;
    double mean_tc = 0.0;  // over successful paths; NaN when there are none
};

struct SuiteResult {
    std::vector<SuiteRow> rows;  // in planner order
    std::vector<EvalRecord> records;  // planner-major, then sample order
};

/// Plans every sample on its perceived costmap with each planner and checks the
/// result against the ground truth.
SuiteResult evaluate_suite(std::span<const EvalSample> samples, std::span<const PlannerParams> planners,
                           unsigned threads = 0);

/// Aggregates records into rows, one per distinct planner in first-seen order.
std::vector<SuiteRow> summarize(std::span<const EvalRecord> records);

struct QualityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t n = 0;
    std::size_t successes = 0;
    double sr = 0.0;  // fraction; 0 for empty bins
};

/// Equal-width bins over the observed D range.
std::vector<QualityBin> bin_by_quality(std::span<const EvalRecord> records, int bins = 6);

/// Count-weighted least-squares slope of per-bin SR against bin center (empty bins ignored).
double sr_trend_slope(std::span<const QualityBin> bins);

std::string format_table_text(std::span<const SuiteRow> rows);
std::string format_table_csv(std::span<const SuiteRow> rows);
std::string format_bins_text(std::span<const QualityBin> bins);

}  // namespace wheelplan
