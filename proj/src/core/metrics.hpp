#pragma once

#include "image.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace gsrc {

// 10*log10(255^2 / MSE); +infinity when the images are identical.
double psnr(const Image& reference, const Image& test);

// Single-scale SSIM, 11x11 Gaussian window (std 1.5), K1=0.01, K2=0.03,
// dynamic range 255, mean over the valid (fully covered) window positions.
double ssim(const Image& reference, const Image& test);

// Zero-mean maximum-likelihood fits of a residual sample set, one fit per
// candidate distribution. Log-likelihoods are in nats per sample.
struct DistributionFitReport {
    double gaussian_sigma = 0.0;
    double laplacian_b = 0.0;
    double hyperlap_scale = 0.0;
    double hyperlap_p = 0.0;

    double loglik_gaussian = 0.0;
    double loglik_laplacian = 0.0;
    double loglik_hyperlap = 0.0;

    std::size_t sample_count = 0;
    bool degenerate_warning = false;

    std::vector<double> histogram_edges;   // size bins+1
    std::vector<std::size_t> histogram_counts; // size bins

    // Name of the model with the highest per-sample log-likelihood.
    std::string best_model() const;
    std::string to_json() const;
};

// Gaussian sigma by RMS, Laplacian b by mean absolute value, and a
// hyper-Laplacian exp(-|x/s|^p) with p grid-searched over
// {0.5, 0.6, 0.7, 0.8} and s matched to the first absolute moment.
// Requires at least 100 samples that are not all identical.
DistributionFitReport fit_residual_distributions(const std::vector<double>& samples);

} // namespace gsrc
