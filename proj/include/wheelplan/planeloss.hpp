#pragma once

#include <optional>
#include <span>
#include <vector>

#include "wheelplan/errors.hpp"
#include "wheelplan/labels.hpp"
#include "wheelplan/planners.hpp"
#include "wheelplan/scene.hpp"

namespace wheelplan {

/// Disparity regression plane d ~ a0 + a1 * (-u sin(phi) + v cos(phi)).
struct PlaneFit {
    double a0 = 0.0;
    double a1 = 0.0;
    double phi = 0.0;  // radians, within [-pi/4, pi/4]
    double mean_sq_residual = 0.0;
    std::size_t sample_count = 0;
};

struct PlaneSample {
    double u = 0.0;          // px
    double v = 0.0;          // px
    double disparity = 0.0;  // 1/m
};

/// The rotated coordinate is constant over all samples at the optimum; carries the a1 = 0 fit.
class DegenerateFit : public Error {
public:
    explicit DegenerateFit(const PlaneFit& fallback)
        : Error("DegenerateFit", "plane fit is rank deficient"), fallback_(fallback) {}
    const PlaneFit& fallback() const noexcept { return fallback_; }

private:
    PlaneFit fallback_;
};

/// Minimum depth (m) for a pixel to contribute a disparity sample.
inline constexpr double kMinDepth = 0.1;

/// Least squares in (a0, a1) for each phi; phi by a 0.5 deg scan over [-45, 45] deg
/// followed by golden-section refinement. Independent of sample order.
PlaneFit fit_plane(std::span<const PlaneSample> samples);

/// Mean squared residual of the model at the given parameters.
double plane_residual(std::span<const PlaneSample> samples, double a0, double a1, double phi);

/// Residual of the best plane through the pixels with mask > 0.5 and usable depth.
/// A rank-deficient fit yields its a1 = 0 residual.
double loss_er(const BinaryMask& mask, const DepthImage& depth, PlaneFit* fit_out = nullptr);
double loss_ir(const PlannedPath& path, const DepthImage& depth, const CameraModel& cam, PlaneFit* fit_out = nullptr);
/// Mean node-wise Euclidean distance.
double loss_ip(const PlannedPath& pred, const PlannedPath& label);
/// Mean binary cross entropy with predictions clamped to [eps, 1 - eps].
double loss_ep(const BinaryMask& pred, const BinaryMask& label, double eps = 1e-7);

struct LossWeights {
    double lambda_er = 0.10;
    double lambda_ir = 0.15;
};

struct CombinedLosses {
    double l_e = 0.0;
    double l_i = 0.0;
    bool er_degenerate = false;  // L_ER unavailable, counted as 0
    bool ir_degenerate = false;
};

/// L_E = L_EP + lambda_ER L_ER and L_I = L_IP + lambda_IR L_IR. A missing
/// plane loss (too few samples) is counted as zero and flagged.
CombinedLosses combined_losses(double l_ep, std::optional<double> l_er, double l_ip, std::optional<double> l_ir,
                               const LossWeights& weights = {});

}  // namespace wheelplan
