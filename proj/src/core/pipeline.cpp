#include "pipeline.hpp"

#include "error.hpp"
#include "group_sparse.hpp"
#include "parallel.hpp"

#include <chrono>
#include <cmath>
#include <utility>

namespace gsrc {

namespace {

void require_same_size(const Image& a, const Image& b, const char* what) {
    if (a.width != b.width || a.height != b.height)
        fail(errc::dimension_mismatch, std::string(what) + ": image dimensions disagree");
}

// One group through the GSRC chain: match on `target`, gather from the
// regularized image and z with the same index, shrink the regularized
// codes toward z's codes.
PatchGroup denoise_group(const Image& target, const Image& y_reg, const Image& z, const Pos& ref,
                         const PatchGeometry& geometry, double sigma_t, double c,
                         GroupIndex* index_out = nullptr) {
    const GroupIndex index = block_match(target, ref, geometry);
    const PatchGroup group_y = gather_group(y_reg, index, geometry.patch_side);
    const PatchGroup group_z = gather_group(z, index, geometry.patch_side);

    const Dictionary dict = pca_dictionary(group_y);
    const CodeMatrix code_noisy = encode(dict, group_y);
    const CodeMatrix code_estimate = encode(dict, group_z);

    const Eigen::VectorXd residual_std = estimate_residual_std(code_noisy, code_estimate);
    const LambdaSchedule schedule = lambda_schedule(sigma_t, residual_std, c);
    const CodeMatrix shrunk = shrink_group(code_noisy, code_estimate, schedule);

    if (index_out)
        *index_out = index;
    return reconstruct(dict, shrunk, geometry.patch_side);
}

} // namespace

DenoiseParams DenoiseParams::defaults_for(double sigma) {
    DenoiseParams p;
    p.sigma = sigma;
    if (sigma <= 20.0)
        p.geometry.patch_side = 6;
    else if (sigma <= 50.0)
        p.geometry.patch_side = 7;
    else if (sigma <= 75.0)
        p.geometry.patch_side = 8;
    else
        p.geometry.patch_side = 9;
    p.geometry.stride = p.geometry.patch_side <= 8 ? 4 : 5;
    p.geometry.window_side = 30;
    p.geometry.k = 60;
    // The roles of the two loop constants follow the method family this
    // algorithm belongs to: a small feedback factor (delta) re-adds 18-22%
    // of the method residual, and a large rescale factor (gamma) shrinks
    // the re-estimated noise level. Assigning the published values the
    // other way round caps sigma_t at 0.18 * sigma after the first
    // iteration, which makes every later lambda ~30x too small to remove
    // the 0.67 * sigma of re-added noise, and the loop decays back to the
    // noisy input.
    if (sigma <= 30.0) {
        p.c = 0.2;
        p.delta = 0.18;
    } else {
        p.c = 0.3;
        p.delta = 0.22;
    }
    p.gamma = 0.67;
    p.tau = 1e-4;
    p.iterations = sigma <= 30.0 ? 6 : (sigma <= 50.0 ? 8 : 10);
    return p;
}

void DenoiseParams::validate() const {
    if (!(sigma > 0.0))
        fail(errc::invalid_argument, "params: sigma must be > 0");
    if (!(c >= 0.0))
        fail(errc::invalid_argument, "params: c must be >= 0");
    if (!(gamma > 0.0))
        fail(errc::invalid_argument, "params: gamma must be > 0");
    if (!(delta > 0.0 && delta <= 1.0))
        fail(errc::invalid_argument, "params: delta must be in (0, 1]");
    if (!(tau > 0.0))
        fail(errc::invalid_argument, "params: tau must be > 0");
    if (iterations < 1)
        fail(errc::invalid_argument, "params: iterations must be >= 1");
    if (threads < 1)
        fail(errc::invalid_argument, "params: threads must be >= 1");
}

Image iterative_regularization(const Image& y, const Image& x_hat, double delta) {
    require_same_size(y, x_hat, "iterative_regularization");
    Image out(y.width, y.height);
    for (std::size_t i = 0; i < y.data.size(); ++i)
        out.data[i] = x_hat.data[i] + delta * (y.data[i] - x_hat.data[i]);
    return out;
}

double update_sigma(double sigma0, const Image& y, const Image& x_hat, double gamma) {
    require_same_size(y, x_hat, "update_sigma");
    double mean_sq = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) {
        const double d = y.data[i] - x_hat.data[i];
        mean_sq += d * d;
    }
    mean_sq /= static_cast<double>(y.data.size());
    return gamma * std::sqrt(std::max(0.0, sigma0 * sigma0 - mean_sq));
}

MatchTarget select_target(const Image& candidate, const Image& previous, const Image& z, double tau,
                          double* gate_value) {
    const double s_new = ssim(candidate, z);
    const double s_old = ssim(previous, z);
    if (gate_value)
        *gate_value = s_new;
    return s_new - s_old < tau ? MatchTarget::regularized : MatchTarget::firstpass;
}

DenoiseResult denoise(const Image& y, const Image& z, const DenoiseParams& params,
                      const Image* reference, const IterationObserver& observer) {
    y.validate();
    z.validate();
    require_same_size(y, z, "denoise");
    if (reference)
        require_same_size(y, *reference, "denoise (reference)");
    params.validate();
    params.geometry.validate(y.width, y.height);

    const std::vector<Pos> refs = reference_positions(y.width, y.height, params.geometry);

    DenoiseResult result;
    result.iterations.reserve(static_cast<std::size_t>(params.iterations));

    Image x_hat = y;
    double ssim_prev = 0.0;

    for (int t = 0; t < params.iterations; ++t) {
        const auto tick = std::chrono::steady_clock::now();

        const Image y_reg = iterative_regularization(y, x_hat, params.delta);

        // Gate. The first iteration always matches against z (the best
        // estimate before any shrinkage pass); afterwards the candidate is
        // the regularized image and the previous gate value is reused.
        const double gate_value = ssim(y_reg, z);
        MatchTarget target = MatchTarget::firstpass;
        if (t > 0 && gate_value - ssim_prev < params.tau)
            target = MatchTarget::regularized;
        ssim_prev = gate_value;

        // Noise level. The first iteration runs at the input sigma; the
        // regularized image equals y there, which would degenerate the
        // update formula to gamma * sigma.
        const double sigma_t =
            t == 0 ? params.sigma : update_sigma(params.sigma, y, y_reg, params.gamma);

        const Image& target_image = target == MatchTarget::regularized ? y_reg : z;

        std::vector<Aggregator> partial;
        partial.reserve(chunk_count(refs.size()));
        for (std::size_t i = 0; i < chunk_count(refs.size()); ++i)
            partial.emplace_back(y.width, y.height);

        parallel_chunks(refs.size(), params.threads,
                        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                GroupIndex index;
                const PatchGroup out = denoise_group(target_image, y_reg, z, refs[i],
                                                     params.geometry, sigma_t, params.c, &index);
                partial[chunk].add(out, index);
            }
        });

        Aggregator total(y.width, y.height);
        for (const Aggregator& p : partial)
            total.merge(p);
        x_hat = total.finish();

        const auto tock = std::chrono::steady_clock::now();

        IterationStats stats;
        stats.t = t;
        stats.sigma_t = sigma_t;
        stats.target = target;
        stats.gate_ssim = gate_value;
        if (reference) {
            stats.has_psnr = true;
            stats.psnr = psnr(*reference, x_hat);
        }
        stats.wall_ms = std::chrono::duration<double, std::milli>(tock - tick).count();
        result.iterations.push_back(stats);

        if (observer)
            observer(t, y_reg, x_hat);
    }

    result.image = std::move(x_hat);
    return result;
}

std::vector<double> collect_residuals(const Image& y, const Image& z, const DenoiseParams& params) {
    y.validate();
    z.validate();
    require_same_size(y, z, "collect_residuals");
    // Only the geometry matters here; notably sigma = 0 is legal (the
    // noiseless case feeds the degenerate-fit path downstream).
    if (!(params.sigma >= 0.0))
        fail(errc::invalid_argument, "params: sigma must be >= 0");
    if (params.threads < 1)
        fail(errc::invalid_argument, "params: threads must be >= 1");
    params.geometry.validate(y.width, y.height);

    const std::vector<Pos> refs = reference_positions(y.width, y.height, params.geometry);

    // First-iteration state: the regularized image equals y and matching
    // runs against z.
    std::vector<std::vector<double>> partial(chunk_count(refs.size()));
    parallel_chunks(refs.size(), params.threads,
                    [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        std::vector<double>& sink = partial[chunk];
        for (std::size_t i = begin; i < end; ++i) {
            const GroupIndex index = block_match(z, refs[i], params.geometry);
            const PatchGroup group_y = gather_group(y, index, params.geometry.patch_side);
            const PatchGroup group_z = gather_group(z, index, params.geometry.patch_side);
            const Dictionary dict = pca_dictionary(group_y);
            const CodeMatrix residual =
                encode(dict, group_y) - encode(dict, group_z);
            sink.insert(sink.end(), residual.data(), residual.data() + residual.size());
        }
    });

    std::vector<double> residuals;
    for (const auto& p : partial)
        residuals.insert(residuals.end(), p.begin(), p.end());
    return residuals;
}

DistributionFitReport residual_analysis(const Image& y, const Image& z, const DenoiseParams& params) {
    return fit_residual_distributions(collect_residuals(y, z, params));
}

} // namespace gsrc
