#include "gsrc/gsrc.h"

#include "core/error.hpp"
#include "core/firstpass.hpp"
#include "core/image.hpp"
#include "core/metrics.hpp"
#include "core/pipeline.hpp"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <utility>
#include <vector>

namespace {

thread_local std::string g_last_error;

gsrc_status to_status(gsrc::errc code) {
    switch (code) {
    case gsrc::errc::io:
        return GSRC_ERR_IO;
    case gsrc::errc::format:
        return GSRC_ERR_FORMAT;
    case gsrc::errc::invalid_argument:
        return GSRC_ERR_INVALID_ARGUMENT;
    case gsrc::errc::dimension_mismatch:
        return GSRC_ERR_DIMENSION_MISMATCH;
    case gsrc::errc::degenerate_input:
        return GSRC_ERR_DEGENERATE_INPUT;
    case gsrc::errc::internal:
        return GSRC_ERR_INTERNAL;
    }
    return GSRC_ERR_INTERNAL;
}

template <typename Fn>
gsrc_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return GSRC_OK;
    } catch (const gsrc::Error& e) {
        g_last_error = e.what();
        return to_status(e.code());
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return GSRC_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return GSRC_ERR_INTERNAL;
    }
}

const gsrc::Image* unwrap(const gsrc_image* image) {
    return reinterpret_cast<const gsrc::Image*>(image);
}

gsrc::Image* unwrap(gsrc_image* image) { return reinterpret_cast<gsrc::Image*>(image); }

gsrc_image* wrap(gsrc::Image* image) { return reinterpret_cast<gsrc_image*>(image); }

struct Telemetry {
    std::vector<gsrc::IterationStats> records;
};

void require(bool condition, const char* what) {
    if (!condition)
        gsrc::fail(gsrc::errc::invalid_argument, what);
}

gsrc::DenoiseParams to_core(const gsrc_denoise_params& p) {
    gsrc::DenoiseParams out;
    out.sigma = p.sigma;
    out.geometry.patch_side = p.patch_side;
    out.geometry.stride = p.stride;
    out.geometry.window_side = p.window_side;
    out.geometry.k = p.k;
    out.c = p.c;
    out.gamma = p.gamma;
    out.delta = p.delta;
    out.tau = p.tau;
    out.iterations = p.iterations;
    out.threads = p.threads;
    return out;
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

} // namespace

extern "C" {

const char* gsrc_version(void) { return "0.1.0"; }

const char* gsrc_status_name(gsrc_status status) {
    switch (status) {
    case GSRC_OK:
        return "ok";
    case GSRC_ERR_IO:
        return "io_error";
    case GSRC_ERR_FORMAT:
        return "format_error";
    case GSRC_ERR_INVALID_ARGUMENT:
        return "invalid_argument";
    case GSRC_ERR_DIMENSION_MISMATCH:
        return "dimension_mismatch";
    case GSRC_ERR_DEGENERATE_INPUT:
        return "degenerate_input";
    case GSRC_ERR_INTERNAL:
        return "internal_error";
    }
    return "unknown";
}

const char* gsrc_last_error(void) { return g_last_error.c_str(); }

gsrc_status gsrc_image_load(const char* path, gsrc_image** out) {
    return guarded([&] {
        require(path && out, "gsrc_image_load: null argument");
        *out = wrap(new gsrc::Image(gsrc::load_image(path)));
    });
}

gsrc_status gsrc_image_save(const gsrc_image* image, const char* path) {
    return guarded([&] {
        require(image && path, "gsrc_image_save: null argument");
        gsrc::save_image(*unwrap(image), path);
    });
}

gsrc_status gsrc_image_create(int width, int height, const double* data, gsrc_image** out) {
    return guarded([&] {
        require(out, "gsrc_image_create: null output");
        require(width > 0 && height > 0, "gsrc_image_create: dimensions must be positive");
        auto img = std::make_unique<gsrc::Image>(width, height);
        if (data)
            std::memcpy(img->data.data(), data, img->data.size() * sizeof(double));
        img->validate();
        *out = wrap(img.release());
    });
}

int gsrc_image_width(const gsrc_image* image) { return image ? unwrap(image)->width : 0; }

int gsrc_image_height(const gsrc_image* image) { return image ? unwrap(image)->height : 0; }

const double* gsrc_image_data(const gsrc_image* image) {
    return image ? unwrap(image)->data.data() : nullptr;
}

double* gsrc_image_data_mut(gsrc_image* image) {
    return image ? unwrap(image)->data.data() : nullptr;
}

void gsrc_image_free(gsrc_image* image) { delete unwrap(image); }

gsrc_status gsrc_add_gaussian_noise(const gsrc_image* image, double sigma, uint64_t seed,
                                    gsrc_image** out) {
    return guarded([&] {
        require(image && out, "gsrc_add_gaussian_noise: null argument");
        gsrc::NoiseSpec spec;
        spec.sigma = sigma;
        spec.seed = seed;
        *out = wrap(new gsrc::Image(gsrc::add_gaussian_noise(*unwrap(image), spec)));
    });
}

gsrc_status gsrc_psnr(const gsrc_image* reference, const gsrc_image* test, double* out) {
    return guarded([&] {
        require(reference && test && out, "gsrc_psnr: null argument");
        *out = gsrc::psnr(*unwrap(reference), *unwrap(test));
    });
}

gsrc_status gsrc_ssim(const gsrc_image* reference, const gsrc_image* test, double* out) {
    return guarded([&] {
        require(reference && test && out, "gsrc_ssim: null argument");
        *out = gsrc::ssim(*unwrap(reference), *unwrap(test));
    });
}

gsrc_status gsrc_nlm_denoise(const gsrc_image* y, double sigma, const gsrc_nlm_params* params,
                             int threads, gsrc_image** out) {
    return guarded([&] {
        require(y && out, "gsrc_nlm_denoise: null argument");
        gsrc::NlmParams nlm;
        if (params) {
            nlm.patch_side = params->patch_side;
            nlm.window_side = params->window_side;
            nlm.h = params->h;
        }
        *out = wrap(new gsrc::Image(gsrc::nlm_denoise(*unwrap(y), sigma, nlm, threads)));
    });
}

gsrc_status gsrc_denoise_params_init(double sigma, gsrc_denoise_params* out) {
    return guarded([&] {
        require(out, "gsrc_denoise_params_init: null output");
        const gsrc::DenoiseParams p = gsrc::DenoiseParams::defaults_for(sigma);
        out->sigma = p.sigma;
        out->patch_side = p.geometry.patch_side;
        out->stride = p.geometry.stride;
        out->window_side = p.geometry.window_side;
        out->k = p.geometry.k;
        out->c = p.c;
        out->gamma = p.gamma;
        out->delta = p.delta;
        out->tau = p.tau;
        out->iterations = p.iterations;
        out->threads = p.threads;
    });
}

gsrc_status gsrc_denoise(const gsrc_image* y, const gsrc_image* z,
                         const gsrc_denoise_params* params, const gsrc_image* reference,
                         gsrc_image** out, gsrc_telemetry** telemetry) {
    return guarded([&] {
        require(y && z && params && out, "gsrc_denoise: null argument");
        gsrc::DenoiseResult result = gsrc::denoise(*unwrap(y), *unwrap(z), to_core(*params),
                                                   reference ? unwrap(reference) : nullptr);
        if (telemetry) {
            auto t = std::make_unique<Telemetry>();
            t->records = std::move(result.iterations);
            *telemetry = reinterpret_cast<gsrc_telemetry*>(t.release());
        }
        *out = wrap(new gsrc::Image(std::move(result.image)));
    });
}

int gsrc_telemetry_count(const gsrc_telemetry* telemetry) {
    return telemetry
               ? static_cast<int>(reinterpret_cast<const Telemetry*>(telemetry)->records.size())
               : 0;
}

gsrc_status gsrc_telemetry_at(const gsrc_telemetry* telemetry, int index,
                              gsrc_iteration_stats* out) {
    return guarded([&] {
        require(telemetry && out, "gsrc_telemetry_at: null argument");
        const auto& records = reinterpret_cast<const Telemetry*>(telemetry)->records;
        require(index >= 0 && static_cast<std::size_t>(index) < records.size(),
                "gsrc_telemetry_at: index out of range");
        const gsrc::IterationStats& s = records[static_cast<std::size_t>(index)];
        out->t = s.t;
        out->sigma_t = s.sigma_t;
        out->target_firstpass = s.target == gsrc::MatchTarget::firstpass ? 1 : 0;
        out->gate_ssim = s.gate_ssim;
        out->has_psnr = s.has_psnr ? 1 : 0;
        out->psnr = s.psnr;
        out->wall_ms = s.wall_ms;
    });
}

void gsrc_telemetry_free(gsrc_telemetry* telemetry) {
    delete reinterpret_cast<Telemetry*>(telemetry);
}

gsrc_status gsrc_residual_analysis(const gsrc_image* y, const gsrc_image* z,
                                   const gsrc_denoise_params* params, char** json_out) {
    return guarded([&] {
        require(y && z && params && json_out, "gsrc_residual_analysis: null argument");
        const gsrc::DistributionFitReport report =
            gsrc::residual_analysis(*unwrap(y), *unwrap(z), to_core(*params));
        *json_out = copy_string(report.to_json());
    });
}

gsrc_status gsrc_fit_residuals(const double* samples, size_t count, char** json_out) {
    return guarded([&] {
        require(json_out, "gsrc_fit_residuals: null output");
        require(samples || count == 0, "gsrc_fit_residuals: null samples");
        const std::vector<double> data(samples, samples + count);
        *json_out = copy_string(gsrc::fit_residual_distributions(data).to_json());
    });
}

void gsrc_string_free(char* s) { std::free(s); }

} // extern "C"
