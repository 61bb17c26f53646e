#include "wheelplan/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <sstream>

#include "wheelplan/errors.hpp"
#include "wheelplan/io.hpp"
#include "wheelplan/parallel.hpp"

namespace wheelplan {

std::string_view failure_name(FailureReason r) {
    switch (r) {
        case FailureReason::None: return "none";
        case FailureReason::Collision: return "collision";
        case FailureReason::GoalMissed: return "goal_missed";
        case FailureReason::NoPath: return "no_path";
    }
    return "unknown";
}

SuccessCheck check_success(const PlannedPath& path, const Costmap& gt_map, const Pose2D& goal, double tol) {
    if (path.nodes.empty()) return {false, FailureReason::NoPath};
    for (std::size_t i = 1; i < path.nodes.size(); ++i) {
        if (!collision_check(gt_map, path.nodes[i - 1].position(), path.nodes[i].position())) {
            return {false, FailureReason::Collision};
        }
    }
    if (path.nodes.size() == 1 && !is_traversable(gt_map, path.nodes.front())) return {false, FailureReason::Collision};
    if (distance(path.nodes.back().position(), goal.position()) > tol) return {false, FailureReason::GoalMissed};
    return {true, FailureReason::None};
}

double turning_cost(const PlannedPath& path, double initial_heading) {
    if (path.nodes.size() != static_cast<std::size_t>(PlannedPath::kNodeCount)) {
        throw ContractViolation("turning_cost: path needs exactly 25 nodes");
    }
    std::vector<double> headings{initial_heading};
    for (std::size_t i = 1; i < path.nodes.size(); ++i) {
        const double dx = path.nodes[i].x - path.nodes[i - 1].x, dy = path.nodes[i].y - path.nodes[i - 1].y;
        if (dx != 0.0 || dy != 0.0) headings.push_back(std::atan2(dy, dx));
    }
    headings.push_back(path.goal().theta);
    KahanSum total;
    for (std::size_t i = 1; i < headings.size(); ++i) total += std::abs(normalize_angle(headings[i] - headings[i - 1]));
    return total.value() / (std::numbers::pi / 2.0) / PlannedPath::kNodeCount;
}

std::vector<SuiteRow> summarize(std::span<const EvalRecord> records) {
    std::vector<SuiteRow> rows;
    std::vector<KahanSum> tc;
    for (const auto& r : records) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const SuiteRow& row) { return row.planner == r.planner; });
        if (it == rows.end()) {
            rows.push_back({r.planner});
            tc.emplace_back();
            it = rows.end() - 1;
        }
        ++it->n;
        if (r.success) {
            ++it->successes;
            tc[static_cast<std::size_t>(it - rows.begin())] += r.tc;
        }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].sr_percent = rows[i].n == 0 ? 0.0 : 100.0 * static_cast<double>(rows[i].successes) / rows[i].n;
        rows[i].mean_tc = rows[i].successes == 0 ? std::numeric_limits<double>::quiet_NaN()
                                                 : tc[i].value() / static_cast<double>(rows[i].successes);
    }
    return rows;
}

SuiteResult evaluate_suite(std::span<const EvalSample> samples, std::span<const PlannerParams> planners, unsigned threads) {
    SuiteResult out;
    out.records.resize(samples.size() * planners.size());
    parallel_for(
        out.records.size(),
        [&](std::size_t k) {
            const PlannerParams& params = planners[k / samples.size()];
            const EvalSample& s = samples[k % samples.size()];
            EvalRecord& rec = out.records[k];
            rec.sample_id = s.id;
            rec.planner = std::string(algorithm_name(params.algorithm));
            rec.D = costmap_distance(s.perceived, s.ground_truth);
            try {
                const PlanResult planned = plan_path(s.perceived, Pose2D{0.0, 0.0, 0.0}, s.goal, params);
                const SuccessCheck check = check_success(planned.path, s.ground_truth, s.goal);
                rec.success = check.success;
                rec.reason = check.reason;
                rec.tc = turning_cost(planned.path);
            } catch (const Error&) {
                rec.success = false;
                rec.reason = FailureReason::NoPath;
            }
        },
        threads);
    out.rows.reserve(planners.size());
    for (std::size_t p = 0; p < planners.size(); ++p) {
        const auto rows = summarize(std::span(out.records).subspan(p * samples.size(), samples.size()));
        out.rows.push_back(rows.empty() ? SuiteRow{std::string(algorithm_name(planners[p].algorithm)), 0, 0, 0.0,
                                                   std::numeric_limits<double>::quiet_NaN()}
                                        : rows.front());
    }
    return out;
}

std::vector<QualityBin> bin_by_quality(std::span<const EvalRecord> records, int bins) {
    if (bins < 2) throw ContractViolation("bin_by_quality: need at least 2 bins");
    std::vector<QualityBin> out(static_cast<std::size_t>(bins));
    if (records.empty()) return out;
    double lo = records.front().D, hi = records.front().D;
    for (const auto& r : records) lo = std::min(lo, r.D), hi = std::max(hi, r.D);
    const double width = (hi - lo) / bins;
    for (int b = 0; b < bins; ++b) {
        out[b].lo = lo + b * width;
        out[b].hi = b + 1 == bins ? hi : lo + (b + 1) * width;
    }
    for (const auto& r : records) {
        int b = width > 0.0 ? static_cast<int>(std::floor((r.D - lo) / width)) : 0;
        b = std::clamp(b, 0, bins - 1);
        ++out[b].n;
        if (r.success) ++out[b].successes;
    }
    for (auto& b : out) b.sr = b.n == 0 ? 0.0 : static_cast<double>(b.successes) / b.n;
    return out;
}

double sr_trend_slope(std::span<const QualityBin> bins) {
    KahanSum w, wx, wy;
    for (const auto& b : bins) {
        if (b.n == 0) continue;
        const double x = 0.5 * (b.lo + b.hi);
        w += b.n;
        wx += b.n * x;
        wy += b.n * b.sr;
    }
    if (w.value() == 0.0) return 0.0;
    const double mx = wx.value() / w.value(), my = wy.value() / w.value();
    KahanSum sxx, sxy;
    for (const auto& b : bins) {
        if (b.n == 0) continue;
        const double dx = 0.5 * (b.lo + b.hi) - mx;
        sxx += b.n * dx * dx;
        sxy += b.n * dx * (b.sr - my);
    }
    return sxx.value() > 0.0 ? sxy.value() / sxx.value() : 0.0;
}

namespace {

std::string fixed(double v, int digits) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

}  // namespace

std::string format_table_text(std::span<const SuiteRow> rows) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %8s %12s %10s\n", "planner", "n", "SR_percent", "mean_TC");
    out << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-10s %8zu %12s %10s\n", r.planner.c_str(), r.n, fixed(r.sr_percent, 1).c_str(),
                      fixed(r.mean_tc, 4).c_str());
        out << line;
    }
    return out.str();
}

std::string format_table_csv(std::span<const SuiteRow> rows) {
    std::ostringstream out;
    out << "planner,n,SR_percent,mean_TC\n";
    for (const auto& r : rows) {
        out << r.planner << ',' << r.n << ',' << io::format_double(r.sr_percent) << ','
            << (std::isnan(r.mean_tc) ? std::string("nan") : io::format_double(r.mean_tc)) << '\n';
    }
    return out.str();
}

std::string format_bins_text(std::span<const QualityBin> bins) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-20s %6s %10s\n", "D_range", "n", "SR_percent");
    out << line;
    for (const auto& b : bins) {
        const std::string range = "[" + fixed(b.lo, 4) + ", " + fixed(b.hi, 4) + "]";
        std::snprintf(line, sizeof line, "%-20s %6zu %10s\n", range.c_str(), b.n, b.n == 0 ? "empty" : fixed(100.0 * b.sr, 1).c_str());
        out << line;
    }
    return out.str();
}

}  // namespace wheelplan
