#ifndef GSRC_H
#define GSRC_H

/* C interface to the GSRC image denoiser.
 *
 * All functions returning gsrc_status leave their outputs untouched on
 * failure; gsrc_last_error() describes the most recent failure on the
 * calling thread. Handles are freed with their matching *_free call.
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum gsrc_status {
    GSRC_OK = 0,
    GSRC_ERR_IO = 1,
    GSRC_ERR_FORMAT = 2,
    GSRC_ERR_INVALID_ARGUMENT = 3,
    GSRC_ERR_DIMENSION_MISMATCH = 4,
    GSRC_ERR_DEGENERATE_INPUT = 5,
    GSRC_ERR_INTERNAL = 6
} gsrc_status;

typedef struct gsrc_image gsrc_image;
typedef struct gsrc_telemetry gsrc_telemetry;

typedef struct gsrc_denoise_params {
    double sigma;
    int patch_side;
    int stride;
    int window_side;
    int k;
    double c;
    double gamma;
    double delta;
    double tau;
    int iterations;
    int threads;
} gsrc_denoise_params;

typedef struct gsrc_nlm_params {
    int patch_side;  /* odd, >= 3 */
    int window_side; /* >= patch_side */
    double h;        /* <= 0 selects the default 0.4 * sigma * patch_side */
} gsrc_nlm_params;

typedef struct gsrc_iteration_stats {
    int t;
    double sigma_t;
    int target_firstpass; /* 1 when block matching ran on the first-pass estimate */
    double gate_ssim;
    int has_psnr;
    double psnr;
    double wall_ms;
} gsrc_iteration_stats;

const char* gsrc_version(void);
const char* gsrc_status_name(gsrc_status status);

/* Message for the last failure on this thread; empty string if none. */
const char* gsrc_last_error(void);

/* ---- images (grayscale, row-major doubles, nominal range [0,255]) ---- */

/* Reads binary PGM (maxval <= 255) or 8-bit PNG; color PNG is reduced to
 * luminance. */
gsrc_status gsrc_image_load(const char* path, gsrc_image** out);

/* Clamps to [0,255] and rounds; writes PNG when the path ends in .png
 * (case-insensitive), binary PGM otherwise. */
gsrc_status gsrc_image_save(const gsrc_image* image, const char* path);

/* data may be NULL for a zero-filled image, else width*height doubles. */
gsrc_status gsrc_image_create(int width, int height, const double* data, gsrc_image** out);

int gsrc_image_width(const gsrc_image* image);
int gsrc_image_height(const gsrc_image* image);
const double* gsrc_image_data(const gsrc_image* image);
double* gsrc_image_data_mut(gsrc_image* image);
void gsrc_image_free(gsrc_image* image);

/* Deterministic i.i.d. Gaussian noise, unclamped. */
gsrc_status gsrc_add_gaussian_noise(const gsrc_image* image, double sigma, uint64_t seed,
                                    gsrc_image** out);

gsrc_status gsrc_psnr(const gsrc_image* reference, const gsrc_image* test, double* out);
gsrc_status gsrc_ssim(const gsrc_image* reference, const gsrc_image* test, double* out);

/* ---- first pass ---- */

/* params NULL selects {7, 21, default h}. */
gsrc_status gsrc_nlm_denoise(const gsrc_image* y, double sigma, const gsrc_nlm_params* params,
                             int threads, gsrc_image** out);

/* ---- denoising ---- */

/* Fills the documented defaults for the given noise level. */
gsrc_status gsrc_denoise_params_init(double sigma, gsrc_denoise_params* out);

/* y: noisy input; z: first-pass estimate; reference: optional clean image
 * used only for PSNR telemetry. telemetry may be NULL when the caller does
 * not want per-iteration records. */
gsrc_status gsrc_denoise(const gsrc_image* y, const gsrc_image* z,
                         const gsrc_denoise_params* params, const gsrc_image* reference,
                         gsrc_image** out, gsrc_telemetry** telemetry);

int gsrc_telemetry_count(const gsrc_telemetry* telemetry);
gsrc_status gsrc_telemetry_at(const gsrc_telemetry* telemetry, int index,
                              gsrc_iteration_stats* out);
void gsrc_telemetry_free(gsrc_telemetry* telemetry);

/* ---- residual analysis ---- */

/* Runs the first iteration's coding step only, pools the code residuals,
 * fits Gaussian/Laplacian/hyper-Laplacian models, and returns the report
 * (fits, per-sample log-likelihoods, histogram) as a JSON document. */
gsrc_status gsrc_residual_analysis(const gsrc_image* y, const gsrc_image* z,
                                   const gsrc_denoise_params* params, char** json_out);

/* Same fit on caller-provided samples. */
gsrc_status gsrc_fit_residuals(const double* samples, size_t count, char** json_out);

void gsrc_string_free(char* s);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* GSRC_H */
