#include "metrics.hpp"

#include "error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace gsrc {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* op) {
    if (a.width != b.width || a.height != b.height)
        fail(errc::dimension_mismatch, std::string(op) + ": image dimensions differ (" +
                                           std::to_string(a.width) + "x" + std::to_string(a.height) + " vs " +
                                           std::to_string(b.width) + "x" + std::to_string(b.height) + ")");
}

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;

} // namespace

double psnr(const Image& reference, const Image& test) {
    reference.validate();
    test.validate();
    require_same_dims(reference, test, "psnr");

    double sum_sq = 0.0;
    for (std::size_t i = 0; i < reference.data.size(); ++i) {
        const double d = reference.data[i] - test.data[i];
        sum_sq += d * d;
    }
    const double mse = sum_sq / static_cast<double>(reference.data.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Image& reference, const Image& test) {
    reference.validate();
    test.validate();
    require_same_dims(reference, test, "ssim");
    if (reference.width < kSsimWindow || reference.height < kSsimWindow)
        fail(errc::invalid_argument, "ssim: image smaller than the 11x11 window");

    // Normalized Gaussian window.
    double window[kSsimWindow][kSsimWindow];
    double wsum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        for (int j = 0; j < kSsimWindow; ++j) {
            const double di = i - (kSsimWindow - 1) / 2.0;
            const double dj = j - (kSsimWindow - 1) / 2.0;
            window[i][j] = std::exp(-(di * di + dj * dj) / (2.0 * kSsimSigma * kSsimSigma));
            wsum += window[i][j];
        }
    }
    for (auto& row : window)
        for (double& w : row)
            w /= wsum;

    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    double total = 0.0;
    std::size_t count = 0;
    for (int r = 0; r + kSsimWindow <= reference.height; ++r) {
        for (int c = 0; c + kSsimWindow <= reference.width; ++c) {
            double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int i = 0; i < kSsimWindow; ++i) {
                for (int j = 0; j < kSsimWindow; ++j) {
                    const double w = window[i][j];
                    const double x = reference.at(r + i, c + j);
                    const double y = test.at(r + i, c + j);
                    mx += w * x;
                    my += w * y;
                    xx += w * x * x;
                    yy += w * y * y;
                    xy += w * x * y;
                }
            }
            const double vx = xx - mx * mx;
            const double vy = yy - my * my;
            const double cov = xy - mx * my;
            const double value = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                                 ((mx * mx + my * my + c1) * (vx + vy + c2));
            total += value;
            ++count;
        }
    }
    return total / static_cast<double>(count);
}

std::string DistributionFitReport::best_model() const {
    if (loglik_laplacian >= loglik_gaussian && loglik_laplacian >= loglik_hyperlap)
        return "laplacian";
    if (loglik_hyperlap >= loglik_gaussian)
        return "hyper_laplacian";
    return "gaussian";
}

std::string DistributionFitReport::to_json() const {
    nlohmann::json models;
    const auto n = static_cast<double>(sample_count);
    models["gaussian"] = {{"scale", gaussian_sigma},
                          {"loglik", loglik_gaussian},
                          {"loglik_total", loglik_gaussian * n}};
    models["laplacian"] = {{"scale", laplacian_b},
                           {"loglik", loglik_laplacian},
                           {"loglik_total", loglik_laplacian * n}};
    models["hyper_laplacian"] = {{"scale", hyperlap_scale},
                                 {"p", hyperlap_p},
                                 {"loglik", loglik_hyperlap},
                                 {"loglik_total", loglik_hyperlap * n}};
    nlohmann::json j{{"samples", sample_count},
                     {"degenerate_warning", degenerate_warning},
                     {"models", models},
                     {"best_model", best_model()},
                     {"histogram", {{"edges", histogram_edges}, {"counts", histogram_counts}}}};
    return j.dump();
}

DistributionFitReport fit_residual_distributions(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 100)
        fail(errc::invalid_argument,
             "fit_residual_distributions: need at least 100 samples, got " + std::to_string(n));
    for (double v : samples)
        if (!std::isfinite(v))
            fail(errc::invalid_argument, "fit_residual_distributions: non-finite sample");

    const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
    if (*min_it == *max_it)
        fail(errc::degenerate_input, "fit_residual_distributions: degenerate input (zero variance)");

    double sum_sq = 0.0, sum_abs = 0.0, max_abs = 0.0;
    for (double v : samples) {
        sum_sq += v * v;
        sum_abs += std::fabs(v);
        max_abs = std::max(max_abs, std::fabs(v));
    }
    const double nd = static_cast<double>(n);

    DistributionFitReport report;
    report.sample_count = n;
    report.gaussian_sigma = std::sqrt(sum_sq / nd);
    report.laplacian_b = sum_abs / nd;

    report.loglik_gaussian =
        -0.5 * std::log(2.0 * M_PI) - std::log(report.gaussian_sigma) - 0.5;
    report.loglik_laplacian = -std::log(2.0 * report.laplacian_b) - 1.0;

    // Hyper-Laplacian p/(2 s Gamma(1/p)) exp(-|x/s|^p): for each grid p the
    // scale is matched to the first absolute moment, E|X| = s Gamma(2/p)/Gamma(1/p).
    report.loglik_hyperlap = -std::numeric_limits<double>::infinity();
    for (double p : {0.5, 0.6, 0.7, 0.8}) {
        const double scale = report.laplacian_b * std::exp(std::lgamma(1.0 / p) - std::lgamma(2.0 / p));
        double sum_pow = 0.0;
        for (double v : samples)
            sum_pow += std::pow(std::fabs(v) / scale, p);
        const double ll = std::log(p) - std::log(2.0 * scale) - std::lgamma(1.0 / p) - sum_pow / nd;
        if (ll > report.loglik_hyperlap) {
            report.loglik_hyperlap = ll;
            report.hyperlap_p = p;
            report.hyperlap_scale = scale;
        }
    }

    // Near-degenerate flag: almost every sample sits on the median.
    {
        std::vector<double> tmp(samples);
        auto mid = tmp.begin() + static_cast<std::ptrdiff_t>(n / 2);
        std::nth_element(tmp.begin(), mid, tmp.end());
        const double median = *mid;
        std::size_t at_median = 0;
        for (double v : samples)
            if (std::fabs(v - median) <= 1e-12)
                ++at_median;
        report.degenerate_warning =
            at_median >= static_cast<std::size_t>(0.99 * nd) || report.laplacian_b < 1e-9;
    }

    constexpr int kBins = 101;
    const double hi = max_abs * (1.0 + 1e-12);
    const double lo = -hi;
    const double bin_width = (hi - lo) / kBins;
    report.histogram_edges.resize(kBins + 1);
    for (int i = 0; i <= kBins; ++i)
        report.histogram_edges[i] = lo + bin_width * i;
    report.histogram_counts.assign(kBins, 0);
    for (double v : samples) {
        int bin = static_cast<int>((v - lo) / bin_width);
        bin = std::clamp(bin, 0, kBins - 1);
        ++report.histogram_counts[static_cast<std::size_t>(bin)];
    }
    return report;
}

} // namespace gsrc
