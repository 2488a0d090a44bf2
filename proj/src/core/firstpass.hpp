#pragma once

#include "image.hpp"

#include <string>

namespace gsrc {

struct NlmParams {
    int patch_side = 7;   // odd, >= 3
    int window_side = 21; // >= patch_side
    double h = 0.0;       // filtering strength; <= 0 means 0.4 * sigma * patch_side
};

enum class FirstPassMode { external, builtin_nlm };

struct FirstPassSpec {
    FirstPassMode mode = FirstPassMode::builtin_nlm;
    std::string external_path; // used by external mode
    NlmParams nlm;
    int threads = 1;
};

// Non-local means with a Gaussian-weighted, noise-compensated patch
// distance: w = exp(-max(d^2 - 2 sigma^2, 0) / h^2) with d^2 the weighted
// mean squared difference. Weights are normalized per pixel.
Image nlm_denoise(const Image& y, double sigma, const NlmParams& params, int threads = 1);

// EXTERNAL loads the estimate file and checks dimensions against y;
// BUILTIN_NLM runs nlm_denoise.
Image first_pass(const Image& y, double sigma, const FirstPassSpec& spec);

} // namespace gsrc
