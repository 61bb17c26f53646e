#include "wheelplan/planeloss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace wheelplan {

namespace {

constexpr double kPhiLimit = std::numbers::pi / 4.0;
constexpr double kScanStep = std::numbers::pi / 360.0;  // 0.5 deg

struct LineFit {
    double a0 = 0.0;
    double a1 = 0.0;
    double residual = 0.0;
    bool degenerate = false;
};

// Least squares of disparity on the rotated coordinate for a fixed phi.
LineFit fit_line(std::span<const PlaneSample> s, double phi) {
    const double sp = std::sin(phi), cp = std::cos(phi);
    const auto n = static_cast<double>(s.size());
    KahanSum st, sy;
    for (const auto& p : s) {
        st += -p.u * sp + p.v * cp;
        sy += p.disparity;
    }
    const double mt = st.value() / n, my = sy.value() / n;
    KahanSum stt, sty;
    for (const auto& p : s) {
        const double dt = (-p.u * sp + p.v * cp) - mt;
        stt += dt * dt;
        sty += dt * (p.disparity - my);
    }
    LineFit f;
    const double scale = std::max(1.0, mt * mt);
    if (stt.value() <= 1e-20 * scale * n) {
        f.degenerate = true;
        f.a1 = 0.0;
        f.a0 = my;
    } else {
        f.a1 = sty.value() / stt.value();
        f.a0 = my - f.a1 * mt;
    }
    f.residual = plane_residual(s, f.a0, f.a1, phi);
    return f;
}

}  // namespace

double plane_residual(std::span<const PlaneSample> samples, double a0, double a1, double phi) {
    const double sp = std::sin(phi), cp = std::cos(phi);
    KahanSum sum;
    for (const auto& p : samples) {
        const double r = p.disparity - (a0 + a1 * (-p.u * sp + p.v * cp));
        sum += r * r;
    }
    return sum.value() / static_cast<double>(samples.size());
}

PlaneFit fit_plane(std::span<const PlaneSample> input) {
    if (input.size() < 3) throw InsufficientSamples("plane fit needs at least 3 samples, got " + std::to_string(input.size()));
    for (const auto& p : input) {
        if (!std::isfinite(p.u) || !std::isfinite(p.v) || !std::isfinite(p.disparity) || !(p.disparity > 0.0)) {
            throw ContractViolation("plane fit: samples need finite coordinates and positive disparity");
        }
    }
    // Canonical order makes every accumulation independent of the caller's order.
    std::vector<PlaneSample> s(input.begin(), input.end());
    std::sort(s.begin(), s.end(), [](const PlaneSample& a, const PlaneSample& b) {
        return std::tie(a.u, a.v, a.disparity) < std::tie(b.u, b.v, b.disparity);
    });

    // Ties prefer the smaller |phi|, so flat-out degenerate inputs settle on phi = 0.
    auto better = [](double r, double phi, double best_r, double best_phi) {
        return r < best_r || (r == best_r && std::abs(phi) < std::abs(best_phi));
    };
    double best_phi = 0.0;
    double best_r = fit_line(s, 0.0).residual;
    const int steps = static_cast<int>(std::lround(2.0 * kPhiLimit / kScanStep));
    for (int i = 0; i <= steps; ++i) {
        const double phi = -kPhiLimit + i * kScanStep;
        const double r = fit_line(s, phi).residual;
        if (better(r, phi, best_r, best_phi)) best_r = r, best_phi = phi;
    }

    if (best_r > 0.0) {
        constexpr double inv_golden = 0.6180339887498949;
        double lo = std::max(-kPhiLimit, best_phi - kScanStep), hi = std::min(kPhiLimit, best_phi + kScanStep);
        double x1 = hi - inv_golden * (hi - lo), x2 = lo + inv_golden * (hi - lo);
        double f1 = fit_line(s, x1).residual, f2 = fit_line(s, x2).residual;
        while (hi - lo > 1e-11) {
            if (f1 <= f2) {
                hi = x2, x2 = x1, f2 = f1;
                x1 = hi - inv_golden * (hi - lo);
                f1 = fit_line(s, x1).residual;
            } else {
                lo = x1, x1 = x2, f1 = f2;
                x2 = lo + inv_golden * (hi - lo);
                f2 = fit_line(s, x2).residual;
            }
        }
        const double phi = 0.5 * (lo + hi);
        const double r = fit_line(s, phi).residual;
        if (better(r, phi, best_r, best_phi)) best_r = r, best_phi = phi;
    }

    const LineFit line = fit_line(s, best_phi);
    PlaneFit fit{line.a0, line.a1, best_phi, line.residual, s.size()};
    if (line.degenerate) throw DegenerateFit(fit);
    return fit;
}

namespace {

double fit_or_fallback(std::span<const PlaneSample> samples, PlaneFit* fit_out) {
    PlaneFit fit;
    try {
        fit = fit_plane(samples);
    } catch (const DegenerateFit& e) {
        fit = e.fallback();
    }
    if (fit_out) *fit_out = fit;
    return fit.mean_sq_residual;
}

}  // namespace

double loss_er(const BinaryMask& mask, const DepthImage& depth, PlaneFit* fit_out) {
    if (mask.width != depth.width || mask.height != depth.height) throw ContractViolation("loss_er: size mismatch");
    std::vector<PlaneSample> samples;
    for (int v = 0; v < mask.height; ++v) {
        for (int u = 0; u < mask.width; ++u) {
            const double d = depth.at(u, v);
            if (mask.at(u, v) > 0.5 && d >= kMinDepth) samples.push_back({double(u), double(v), 1.0 / d});
        }
    }
    return fit_or_fallback(samples, fit_out);
}

double loss_ir(const PlannedPath& path, const DepthImage& depth, const CameraModel& cam, PlaneFit* fit_out) {
    if (depth.width != cam.width || depth.height != cam.height) throw ContractViolation("loss_ir: depth/camera size mismatch");
    std::vector<PlaneSample> samples;
    for (const auto& node : path.nodes) {
        const auto px = cam.project(cam.body_to_camera({node.x, node.y, 0.0}));
        if (!px) continue;
        const int u = static_cast<int>(std::lround(px->x)), v = static_cast<int>(std::lround(px->y));
        if (!depth.contains(u, v)) continue;
        const double d = depth.at(u, v);
        if (d >= kMinDepth) samples.push_back({double(u), double(v), 1.0 / d});
    }
    return fit_or_fallback(samples, fit_out);
}

double loss_ip(const PlannedPath& pred, const PlannedPath& label) {
    if (pred.nodes.size() != label.nodes.size() || pred.nodes.size() != static_cast<std::size_t>(PlannedPath::kNodeCount)) {
        throw ContractViolation("loss_ip: both paths need exactly 25 nodes");
    }
    KahanSum sum;
    for (std::size_t i = 0; i < pred.nodes.size(); ++i) sum += distance(pred.nodes[i].position(), label.nodes[i].position());
    return sum.value() / static_cast<double>(pred.nodes.size());
}

double loss_ep(const BinaryMask& pred, const BinaryMask& label, double eps) {
    if (pred.width != label.width || pred.height != label.height) throw ContractViolation("loss_ep: size mismatch");
    if (pred.data.empty()) throw ContractViolation("loss_ep: empty mask");
    KahanSum sum;
    for (std::size_t i = 0; i < pred.data.size(); ++i) {
        const double p = std::clamp(pred.data[i], eps, 1.0 - eps);
        const double y = label.data[i];
        sum += -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
    }
    return sum.value() / static_cast<double>(pred.data.size());
}

CombinedLosses combined_losses(double l_ep, std::optional<double> l_er, double l_ip, std::optional<double> l_ir,
                               const LossWeights& weights) {
    if (!(weights.lambda_er >= 0.0 && weights.lambda_ir >= 0.0)) throw ContractViolation("loss weights must be non-negative");
    CombinedLosses out;
    out.er_degenerate = !l_er.has_value();
    out.ir_degenerate = !l_ir.has_value();
    out.l_e = l_ep + weights.lambda_er * l_er.value_or(0.0);
    out.l_i = l_ip + weights.lambda_ir * l_ir.value_or(0.0);
    return out;
}

}  // namespace wheelplan
