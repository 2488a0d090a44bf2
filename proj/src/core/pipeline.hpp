#pragma once

#include "image.hpp"
#include "metrics.hpp"
#include "patch.hpp"

#include <functional>
#include <string>
#include <vector>

namespace gsrc {

struct DenoiseParams {
    double sigma = 0.0;
    PatchGeometry geometry;
    double c = 0.2;
    double gamma = 0.18;
    double delta = 0.67;
    double tau = 1e-4;
    int iterations = 6;
    int threads = 1;

    // patch_side 6/7/8/9 for sigma <= 20/50/75/above; stride 4 below
    // patch_side 9, else 5; (c, delta) = (0.2, 0.18) for sigma <= 30,
    // else (0.3, 0.22); gamma = 0.67; iterations 6/8/10 for
    // sigma <= 30/50/above.
    static DenoiseParams defaults_for(double sigma);

    void validate() const;
};

enum class MatchTarget { regularized, firstpass };

inline const char* to_string(MatchTarget t) {
    return t == MatchTarget::regularized ? "regularized" : "firstpass";
}

struct IterationStats {
    int t = 0;
    double sigma_t = 0.0;
    MatchTarget target = MatchTarget::firstpass;
    double gate_ssim = 0.0; // ssim(regularized image, z) at this iteration
    bool has_psnr = false;  // true when a clean reference was supplied
    double psnr = 0.0;
    double wall_ms = 0.0;
};

struct DenoiseResult {
    Image image;
    std::vector<IterationStats> iterations;
};

// Called once per iteration with the regularized input and the freshly
// aggregated estimate; lets tests recompute telemetry independently.
using IterationObserver = std::function<void(int t, const Image& y_reg, const Image& x_hat)>;

// out = x_hat + delta * (y - x_hat), elementwise.
Image iterative_regularization(const Image& y, const Image& x_hat, double delta);

// gamma * sqrt(max(0, sigma0^2 - mean((y - x_hat)^2))).
double update_sigma(double sigma0, const Image& y, const Image& x_hat, double gamma);

// Chooses the block-matching target: the candidate when
// ssim(candidate, z) - ssim(previous, z) < tau, otherwise z. Writes
// ssim(candidate, z) to gate_value when non-null.
MatchTarget select_target(const Image& candidate, const Image& previous, const Image& z, double tau,
                          double* gate_value = nullptr);

// Full loop: from the noisy input y and first-pass estimate z, iterate
// regularization, target gating, noise re-estimation, per-group shrinkage
// toward z's codes, and aggregation. The first iteration matches against
// z and runs at the input sigma. reference (optional) only feeds the
// per-iteration PSNR telemetry.
DenoiseResult denoise(const Image& y, const Image& z, const DenoiseParams& params,
                      const Image* reference = nullptr, const IterationObserver& observer = {});

// First-iteration residual coefficients A0 - B over every group, in group
// order (columns flattened per group). Deterministic.
std::vector<double> collect_residuals(const Image& y, const Image& z, const DenoiseParams& params);

DistributionFitReport residual_analysis(const Image& y, const Image& z, const DenoiseParams& params);

} // namespace gsrc
