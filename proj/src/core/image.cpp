#include "image.hpp"

#include "error.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

namespace gsrc {

Image::Image(int w, int h, double fill)
    : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 1 || h < 1)
        fail(errc::invalid_argument, "image dimensions must be at least 1x1");
}

void Image::validate() const {
    if (width < 1 || height < 1)
        fail(errc::invalid_argument, "image dimensions must be at least 1x1");
    if (data.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        fail(errc::invalid_argument, "image buffer size does not match width*height");
    for (double v : data)
        if (!std::isfinite(v))
            fail(errc::invalid_argument, "image contains non-finite values");
}

namespace {

const unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};

std::vector<unsigned char> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(errc::io, "cannot open file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (in.bad())
        fail(errc::io, "read error: " + path);
    return bytes;
}

struct PgmCursor {
    const unsigned char* p;
    const unsigned char* end;

    bool eof() const { return p >= end; }

    void skip_space_and_comments() {
        while (!eof()) {
            if (std::isspace(*p)) {
                ++p;
            } else if (*p == '#') {
                while (!eof() && *p != '\n')
                    ++p;
            } else {
                break;
            }
        }
    }

    long read_uint(const char* what) {
        skip_space_and_comments();
        if (eof() || !std::isdigit(*p))
            fail(errc::format, std::string("pgm: malformed header, expected ") + what);
        long v = 0;
        while (!eof() && std::isdigit(*p)) {
            v = v * 10 + (*p - '0');
            if (v > 1'000'000'000)
                fail(errc::format, std::string("pgm: implausible ") + what);
            ++p;
        }
        return v;
    }
};

Image load_pgm(const std::vector<unsigned char>& bytes, const std::string& path) {
    PgmCursor cur{bytes.data(), bytes.data() + bytes.size()};
    if (bytes.size() < 2 || bytes[0] != 'P')
        fail(errc::format, "unsupported format (not PGM or PNG): " + path);
    if (bytes[1] != '5') {
        if (bytes[1] == '2')
            fail(errc::format, "unsupported format (ASCII P2 PGM, only binary P5 supported): " + path);
        fail(errc::format, std::string("unsupported format (P") + static_cast<char>(bytes[1]) +
                               ", only P5 grayscale supported): " + path);
    }
    cur.p += 2;
    const long w = cur.read_uint("width");
    const long h = cur.read_uint("height");
    const long maxval = cur.read_uint("maxval");
    if (w < 1 || h < 1)
        fail(errc::format, "pgm: non-positive dimensions");
    if (maxval > 255)
        fail(errc::format, "pgm: unsupported bit depth (maxval " + std::to_string(maxval) + " > 255)");
    if (maxval < 1)
        fail(errc::format, "pgm: invalid maxval 0");
    if (cur.eof() || !std::isspace(*cur.p))
        fail(errc::format, "pgm: missing whitespace before raster");
    ++cur.p;

    const std::size_t expected = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    if (static_cast<std::size_t>(cur.end - cur.p) < expected)
        fail(errc::format, "pgm: truncated raster data");

    Image img(static_cast<int>(w), static_cast<int>(h));
    for (std::size_t i = 0; i < expected; ++i)
        img.data[i] = static_cast<double>(cur.p[i]);
    return img;
}

struct PngReadCtx {
    const unsigned char* p;
    std::size_t remaining;
    std::string error;
};

extern "C" void png_mem_read(png_structp png, png_bytep out, png_size_t len) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_io_ptr(png));
    if (len > ctx->remaining)
        png_error(png, "unexpected end of PNG stream");
    std::memcpy(out, ctx->p, len);
    ctx->p += len;
    ctx->remaining -= len;
}

extern "C" void png_capture_error(png_structp png, png_const_charp msg) {
    auto* ctx = static_cast<PngReadCtx*>(png_get_error_ptr(png));
    if (ctx && ctx->error.empty())
        ctx->error = msg ? msg : "unknown libpng error";
    longjmp(png_jmpbuf(png), 1);
}

extern "C" void png_ignore_warning(png_structp, png_const_charp) {}

Image load_png(const std::vector<unsigned char>& bytes, const std::string& path) {
    PngReadCtx ctx{bytes.data(), bytes.size(), {}};

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &ctx, png_capture_error,
                                             png_ignore_warning);
    if (!png)
        fail(errc::internal, "libpng: failed to allocate read struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        fail(errc::internal, "libpng: failed to allocate info struct");
    }

    std::vector<unsigned char> interleaved;
    int width = 0, height = 0, channels = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(errc::format, "png: " + (ctx.error.empty() ? "decode error" : ctx.error) + ": " + path);
    }

    png_set_read_fn(png, &ctx, png_mem_read);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    const int color_type = png_get_color_type(png, info);
    if (bit_depth > 8) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(errc::format,
             "png: unsupported bit depth (" + std::to_string(bit_depth) + "-bit, only 8-bit supported): " + path);
    }
    if (color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    width = static_cast<int>(png_get_image_width(png, info));
    height = static_cast<int>(png_get_image_height(png, info));
    channels = png_get_channels(png, info);
    if (width < 1 || height < 1) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(errc::format, "png: non-positive dimensions: " + path);
    }
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(errc::format, "png: unsupported channel count " + std::to_string(channels) + ": " + path);
    }

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    interleaved.resize(row_bytes * static_cast<std::size_t>(height));
    std::vector<png_bytep> rows(static_cast<std::size_t>(height));
    for (int r = 0; r < height; ++r)
        rows[static_cast<std::size_t>(r)] = interleaved.data() + row_bytes * static_cast<std::size_t>(r);
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(width, height);
    if (channels == 1) {
        for (int r = 0; r < height; ++r)
            for (int c = 0; c < width; ++c)
                img.at(r, c) = static_cast<double>(interleaved[row_bytes * r + c]);
    } else {
        for (int r = 0; r < height; ++r) {
            const unsigned char* row = interleaved.data() + row_bytes * static_cast<std::size_t>(r);
            for (int c = 0; c < width; ++c) {
                const double red = row[3 * c + 0];
                const double green = row[3 * c + 1];
                const double blue = row[3 * c + 2];
                img.at(r, c) = 0.299 * red + 0.587 * green + 0.114 * blue;
            }
        }
    }
    return img;
}

bool has_png_extension(const std::string& path) {
    if (path.size() < 4)
        return false;
    std::string ext = path.substr(path.size() - 4);
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    return ext == ".png";
}

unsigned char quantize(double v) {
    v = std::clamp(v, 0.0, 255.0);
    return static_cast<unsigned char>(std::floor(v + 0.5));
}

void save_pgm(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(errc::io, "cannot open file for writing: " + path);
    out << "P5\n" << image.width << " " << image.height << "\n255\n";
    std::vector<unsigned char> bytes(image.pixel_count());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = quantize(image.data[i]);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        fail(errc::io, "write error: " + path);
}

struct PngWriteCtx {
    std::ofstream* out;
    std::string error;
};

extern "C" void png_stream_write(png_structp png, png_bytep data, png_size_t len) {
    auto* ctx = static_cast<PngWriteCtx*>(png_get_io_ptr(png));
    ctx->out->write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
    if (!*ctx->out)
        png_error(png, "write error");
}

extern "C" void png_stream_flush(png_structp png) {
    auto* ctx = static_cast<PngWriteCtx*>(png_get_io_ptr(png));
    ctx->out->flush();
}

extern "C" void png_capture_write_error(png_structp png, png_const_charp msg) {
    auto* ctx = static_cast<PngWriteCtx*>(png_get_error_ptr(png));
    if (ctx && ctx->error.empty())
        ctx->error = msg ? msg : "unknown libpng error";
    longjmp(png_jmpbuf(png), 1);
}

void save_png(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(errc::io, "cannot open file for writing: " + path);
    PngWriteCtx ctx{&out, {}};

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &ctx, png_capture_write_error,
                                              png_ignore_warning);
    if (!png)
        fail(errc::internal, "libpng: failed to allocate write struct");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        fail(errc::internal, "libpng: failed to allocate info struct");
    }

    std::vector<unsigned char> bytes(image.pixel_count());
    for (std::size_t i = 0; i < bytes.size(); ++i)
        bytes[i] = quantize(image.data[i]);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(errc::io, "png: " + (ctx.error.empty() ? "write error" : ctx.error) + ": " + path);
    }

    png_set_write_fn(png, &ctx, png_stream_write, png_stream_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height),
                 8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < image.height; ++r)
        png_write_row(png, bytes.data() + static_cast<std::size_t>(r) * image.width);
    png_write_end(png, info);
    png_destroy_write_struct(&png, &info);
    if (!out)
        fail(errc::io, "write error: " + path);
}

} // namespace

Image load_image(const std::string& path) {
    const std::vector<unsigned char> bytes = read_file(path);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0)
        return load_png(bytes, path);
    return load_pgm(bytes, path);
}

void save_image(const Image& image, const std::string& path) {
    image.validate();
    if (has_png_extension(path))
        save_png(image, path);
    else
        save_pgm(image, path);
}

Image add_gaussian_noise(const Image& image, const NoiseSpec& spec) {
    image.validate();
    if (!(spec.sigma >= 0.0))
        fail(errc::invalid_argument, "noise sigma must be >= 0");

    Image out = image;
    if (spec.sigma == 0.0)
        return out;

    std::mt19937_64 rng(spec.seed);
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    const std::size_t n = out.data.size();
    std::size_t i = 0;
    while (i < n) {
        // u1 in (0,1] so the log is finite, u2 in [0,1).
        const double u1 = 1.0 - static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
        const double radius = std::sqrt(-2.0 * std::log(u1));
        out.data[i++] += spec.sigma * radius * std::cos(kTwoPi * u2);
        if (i < n)
            out.data[i++] += spec.sigma * radius * std::sin(kTwoPi * u2);
    }
    return out;
}

} // namespace gsrc
