#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gsrc {

// Grayscale image, row-major doubles, nominal range [0,255]. Values may
// leave that range while a pipeline is running; clamping happens at save.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    Image() = default;
    Image(int w, int h, double fill = 0.0);

    double& at(int row, int col) { return data[static_cast<std::size_t>(row) * width + col]; }
    double at(int row, int col) const { return data[static_cast<std::size_t>(row) * width + col]; }

    std::size_t pixel_count() const { return data.size(); }

    // Throws if dimensions are non-positive, the buffer size disagrees,
    // or any value is non-finite.
    void validate() const;
};

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// P5 PGM (maxval <= 255) or 8-bit PNG; PNG color is converted with
// luminance 0.299 R + 0.587 G + 0.114 B.
Image load_image(const std::string& path);

// Clamps to [0,255], rounds half-up to 8 bits. Writes PNG when the
// extension is .png (case-insensitive), binary PGM otherwise.
void save_image(const Image& image, const std::string& path);

// Adds i.i.d. Normal(0, sigma^2) noise from mt19937_64(seed) through a
// Box-Muller transform, consuming two 53-bit uniforms per pair of
// variates. Output is not clamped. Pure function of (image, spec).
Image add_gaussian_noise(const Image& image, const NoiseSpec& spec);

} // namespace gsrc
