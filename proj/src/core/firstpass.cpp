#include "firstpass.hpp"

#include "error.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace gsrc {

namespace {

// Reflect-pad so every pixel has a full centered patch.
std::vector<double> reflect_pad(const Image& img, int pad, int& padded_width) {
    const int pw = img.width + 2 * pad;
    const int ph = img.height + 2 * pad;
    padded_width = pw;
    std::vector<double> out(static_cast<std::size_t>(pw) * ph);
    const auto reflect = [](int i, int n) {
        if (i < 0)
            i = -i;
        if (i >= n)
            i = 2 * n - 2 - i;
        return i;
    };
    for (int r = 0; r < ph; ++r) {
        const int sr = reflect(r - pad, img.height);
        for (int c = 0; c < pw; ++c)
            out[static_cast<std::size_t>(r) * pw + c] = img.at(sr, reflect(c - pad, img.width));
    }
    return out;
}

} // namespace

Image nlm_denoise(const Image& y, double sigma, const NlmParams& params, int threads) {
    y.validate();
    if (!(sigma >= 0.0))
        fail(errc::invalid_argument, "nlm: sigma must be >= 0");
    if (params.patch_side < 3 || params.patch_side % 2 == 0)
        fail(errc::invalid_argument, "nlm: patch_side must be odd and >= 3");
    if (params.window_side < params.patch_side)
        fail(errc::invalid_argument, "nlm: window_side must be >= patch_side");

    const double h = params.h > 0.0 ? params.h : 0.4 * sigma * params.patch_side;
    if (!(h > 0.0))
        fail(errc::invalid_argument, "nlm: filtering strength h must be positive");

    const int patch = params.patch_side;
    const int pad = patch / 2;
    int pw = 0;
    const std::vector<double> padded = reflect_pad(y, pad, pw);

    // Gaussian kernel over patch offsets, normalized to sum 1, so the
    // patch distance is a weighted mean of squared differences.
    std::vector<double> kernel(static_cast<std::size_t>(patch) * patch);
    {
        const double kstd = patch / 4.0;
        double ksum = 0.0;
        for (int i = 0; i < patch; ++i) {
            for (int j = 0; j < patch; ++j) {
                const double di = i - pad;
                const double dj = j - pad;
                const double v = std::exp(-(di * di + dj * dj) / (2.0 * kstd * kstd));
                kernel[static_cast<std::size_t>(i) * patch + j] = v;
                ksum += v;
            }
        }
        for (double& v : kernel)
            v /= ksum;
    }

    const int wlo = (params.window_side - 1) / 2;
    const int whi = params.window_side - 1 - wlo;
    const double noise_bias = 2.0 * sigma * sigma;
    const double inv_h2 = 1.0 / (h * h);

    Image out(y.width, y.height);
    parallel_chunks(static_cast<std::size_t>(y.height), threads,
                    [&](std::size_t, std::size_t row_begin, std::size_t row_end) {
        for (std::size_t pr = row_begin; pr < row_end; ++pr) {
            const int r = static_cast<int>(pr);
            for (int c = 0; c < y.width; ++c) {
                const int r_lo = std::max(0, r - wlo);
                const int r_hi = std::min(y.height - 1, r + whi);
                const int c_lo = std::max(0, c - wlo);
                const int c_hi = std::min(y.width - 1, c + whi);

                double weight_sum = 0.0;
                double value_sum = 0.0;
                for (int qr = r_lo; qr <= r_hi; ++qr) {
                    for (int qc = c_lo; qc <= c_hi; ++qc) {
                        double dist = 0.0;
                        const double* kp = kernel.data();
                        for (int i = 0; i < patch; ++i) {
                            const double* prow = &padded[static_cast<std::size_t>(r + i) * pw + c];
                            const double* qrow = &padded[static_cast<std::size_t>(qr + i) * pw + qc];
                            for (int j = 0; j < patch; ++j) {
                                const double d = prow[j] - qrow[j];
                                dist += *kp++ * d * d;
                            }
                        }
                        const double w = std::exp(-std::max(dist - noise_bias, 0.0) * inv_h2);
                        weight_sum += w;
                        value_sum += w * y.at(qr, qc);
                    }
                }
                out.at(r, c) = value_sum / weight_sum;
            }
        }
    });
    return out;
}

Image first_pass(const Image& y, double sigma, const FirstPassSpec& spec) {
    y.validate();
    if (spec.mode == FirstPassMode::external) {
        Image z = load_image(spec.external_path);
        if (z.width != y.width || z.height != y.height)
            fail(errc::dimension_mismatch,
                 "first_pass: external estimate dimensions (" + std::to_string(z.width) + "x" +
                     std::to_string(z.height) + ") do not match input (" + std::to_string(y.width) + "x" +
                     std::to_string(y.height) + ")");
        return z;
    }
    return nlm_denoise(y, sigma, spec.nlm, spec.threads);
}

} // namespace gsrc
