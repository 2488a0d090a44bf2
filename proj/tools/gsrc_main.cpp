#include <gsrc/gsrc.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

[[noreturn]] void die(const std::string& reason) {
    std::cerr << "error: " << reason << "\n";
    std::exit(1);
}

void check(gsrc_status status) {
    if (status != GSRC_OK)
        die(gsrc_last_error());
}

struct ImageDeleter {
    void operator()(gsrc_image* p) const { gsrc_image_free(p); }
};
using ImagePtr = std::unique_ptr<gsrc_image, ImageDeleter>;

struct TelemetryDeleter {
    void operator()(gsrc_telemetry* p) const { gsrc_telemetry_free(p); }
};
using TelemetryPtr = std::unique_ptr<gsrc_telemetry, TelemetryDeleter>;

ImagePtr load_or_die(const std::string& path, const char* what) {
    gsrc_image* img = nullptr;
    if (gsrc_image_load(path.c_str(), &img) != GSRC_OK) {
        std::error_code ec;
        if (!fs::exists(path, ec))
            die(std::string(what) + " not found");
        die(gsrc_last_error());
    }
    return ImagePtr(img);
}

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

// Everything settable from flags or the JSON config; zero/NaN means unset.
struct Options {
    std::string input;
    std::string clean;
    std::string output;
    std::string telemetry;
    std::string csv;
    std::string first_pass = "nlm";
    std::vector<double> sigma;
    std::uint64_t seed = 0;
    bool has_seed = false;
    int patch_side = 0;
    int stride = 0;
    int window = 0;
    int k = 0;
    int iterations = 0;
    int threads = 0;
    double c = std::numeric_limits<double>::quiet_NaN();
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double delta = std::numeric_limits<double>::quiet_NaN();
    double tau = std::numeric_limits<double>::quiet_NaN();
    int nlm_patch = 0;
    int nlm_window = 0;
    double nlm_h = std::numeric_limits<double>::quiet_NaN();
    std::string config; // consumed by the prescan; bound so CLI11 accepts the flag
};

void apply_config(Options& o, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        die("config not found");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        die(std::string("config: ") + e.what());
    }
    if (!j.is_object())
        die("config: expected a JSON object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "input")
                o.input = value.get<std::string>();
            else if (key == "clean")
                o.clean = value.get<std::string>();
            else if (key == "output")
                o.output = value.get<std::string>();
            else if (key == "telemetry")
                o.telemetry = value.get<std::string>();
            else if (key == "csv")
                o.csv = value.get<std::string>();
            else if (key == "first_pass")
                o.first_pass = value.get<std::string>();
            else if (key == "sigma") {
                o.sigma.clear();
                if (value.is_array())
                    for (const auto& v : value)
                        o.sigma.push_back(v.get<double>());
                else
                    o.sigma.push_back(value.get<double>());
            } else if (key == "seed") {
                o.seed = value.get<std::uint64_t>();
                o.has_seed = true;
            } else if (key == "patch_side")
                o.patch_side = value.get<int>();
            else if (key == "stride")
                o.stride = value.get<int>();
            else if (key == "window")
                o.window = value.get<int>();
            else if (key == "k")
                o.k = value.get<int>();
            else if (key == "iterations")
                o.iterations = value.get<int>();
            else if (key == "c")
                o.c = value.get<double>();
            else if (key == "gamma")
                o.gamma = value.get<double>();
            else if (key == "delta")
                o.delta = value.get<double>();
            else if (key == "tau")
                o.tau = value.get<double>();
            else if (key == "threads")
                o.threads = value.get<int>();
            else if (key == "nlm") {
                if (!value.is_object())
                    die("config: nlm must be an object");
                for (const auto& [nk, nv] : value.items()) {
                    if (nk == "patch_side")
                        o.nlm_patch = nv.get<int>();
                    else if (nk == "window_side")
                        o.nlm_window = nv.get<int>();
                    else if (nk == "h")
                        o.nlm_h = nv.get<double>();
                    else
                        die("config: unknown key 'nlm." + nk + "'");
                }
            } else
                die("config: unknown key '" + key + "'");
        } catch (const nlohmann::json::exception&) {
            die("config: bad value for '" + key + "'");
        }
    }
}

void add_common_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "JSON config file; flags override it");
    cmd->add_option("--input", o.input, "input image (or directory for bench)");
    cmd->add_option("--clean", o.clean, "clean reference image");
    cmd->add_option("--output", o.output, "output path");
    cmd->add_option("--sigma", o.sigma, "noise standard deviation(s)")->delimiter(',');
    cmd->add_option("--seed", o.seed, "noise synthesis seed");
    cmd->add_option("--first-pass", o.first_pass, "nlm or external:PATH");
    cmd->add_option("--patch-side", o.patch_side, "patch side in pixels");
    cmd->add_option("--stride", o.stride, "reference patch step");
    cmd->add_option("--window", o.window, "search window side");
    cmd->add_option("--k", o.k, "patches per group");
    cmd->add_option("--iterations", o.iterations, "denoising iterations");
    cmd->add_option("--c", o.c, "lambda constant");
    cmd->add_option("--gamma", o.gamma, "noise re-estimation factor");
    cmd->add_option("--delta", o.delta, "regularization feedback factor");
    cmd->add_option("--tau", o.tau, "SSIM gate threshold");
    cmd->add_option("--threads", o.threads, "worker threads (env GSRC_THREADS as fallback)");
    cmd->add_option("--telemetry", o.telemetry, "telemetry JSON-lines path");
    cmd->add_option("--csv", o.csv, "CSV output path");
}

int resolve_threads(int flag_value) {
    if (flag_value > 0)
        return flag_value;
    if (const char* env = std::getenv("GSRC_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1 && v <= 1024)
            return static_cast<int>(v);
    }
    return 1;
}

gsrc_denoise_params build_params(const Options& o, double sigma) {
    gsrc_denoise_params params;
    check(gsrc_denoise_params_init(sigma, &params));
    if (o.patch_side > 0)
        params.patch_side = o.patch_side;
    if (o.stride > 0)
        params.stride = o.stride;
    if (o.window > 0)
        params.window_side = o.window;
    if (o.k > 0)
        params.k = o.k;
    if (o.iterations > 0)
        params.iterations = o.iterations;
    if (!std::isnan(o.c))
        params.c = o.c;
    if (!std::isnan(o.gamma))
        params.gamma = o.gamma;
    if (!std::isnan(o.delta))
        params.delta = o.delta;
    if (!std::isnan(o.tau))
        params.tau = o.tau;
    params.threads = resolve_threads(o.threads);
    return params;
}

gsrc_nlm_params build_nlm_params(const Options& o) {
    gsrc_nlm_params nlm;
    nlm.patch_side = o.nlm_patch > 0 ? o.nlm_patch : 7;
    nlm.window_side = o.nlm_window > 0 ? o.nlm_window : 21;
    nlm.h = std::isnan(o.nlm_h) ? 0.0 : o.nlm_h;
    return nlm;
}

struct FirstPassChoice {
    bool external = false;
    std::string path;
};

FirstPassChoice parse_first_pass(const std::string& value) {
    FirstPassChoice fp;
    if (value == "nlm")
        return fp;
    const std::string prefix = "external:";
    if (value.rfind(prefix, 0) == 0 && value.size() > prefix.size()) {
        fp.external = true;
        fp.path = value.substr(prefix.size());
        return fp;
    }
    die("unknown first-pass mode '" + value + "'");
}

// Returns (estimate, seconds spent). External estimates cost no time by
// definition here; their generation happened elsewhere.
std::pair<ImagePtr, double> run_first_pass(const gsrc_image* y, double sigma, const Options& o,
                                           int threads) {
    const FirstPassChoice fp = parse_first_pass(o.first_pass);
    if (fp.external) {
        ImagePtr z = load_or_die(fp.path, "first-pass file");
        if (gsrc_image_width(z.get()) != gsrc_image_width(y) ||
            gsrc_image_height(z.get()) != gsrc_image_height(y))
            die("first-pass dimensions do not match input");
        return {std::move(z), 0.0};
    }
    const gsrc_nlm_params nlm = build_nlm_params(o);
    gsrc_image* z = nullptr;
    const auto tick = std::chrono::steady_clock::now();
    check(gsrc_nlm_denoise(y, sigma, &nlm, threads, &z));
    const auto tock = std::chrono::steady_clock::now();
    return {ImagePtr(z), std::chrono::duration<double>(tock - tick).count()};
}

double require_single_sigma(const Options& o) {
    if (o.sigma.empty())
        die("sigma required");
    if (o.sigma.size() > 1)
        die("this command takes a single sigma");
    return o.sigma.front();
}

void write_telemetry(const std::string& path, const gsrc_telemetry* telemetry) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        die("cannot write telemetry file '" + path + "'");
    const int n = gsrc_telemetry_count(telemetry);
    for (int i = 0; i < n; ++i) {
        gsrc_iteration_stats s;
        check(gsrc_telemetry_at(telemetry, i, &s));
        nlohmann::json rec;
        rec["t"] = s.t;
        rec["sigma_t"] = s.sigma_t;
        rec["gate_choice"] = s.target_firstpass ? "firstpass" : "regularized";
        if (s.has_psnr && std::isfinite(s.psnr))
            rec["psnr"] = s.psnr;
        rec["ssim_gate_value"] = s.gate_ssim;
        rec["wall_ms"] = s.wall_ms;
        out << rec.dump() << "\n";
    }
}

int cmd_denoise(const Options& o) {
    if (o.input.empty())
        die("input required");
    if (o.output.empty())
        die("output required");
    const double sigma = require_single_sigma(o);
    const gsrc_denoise_params params = build_params(o, sigma);

    ImagePtr y = load_or_die(o.input, "input");

    // With a seed, the input is taken as clean and noise is synthesized
    // before denoising; without one the input is already noisy.
    if (o.has_seed) {
        gsrc_image* noisy = nullptr;
        check(gsrc_add_gaussian_noise(y.get(), sigma, o.seed, &noisy));
        y.reset(noisy);
    }

    ImagePtr reference;
    if (!o.clean.empty())
        reference = load_or_die(o.clean, "clean reference");

    auto [z, fp_seconds] = run_first_pass(y.get(), sigma, o, params.threads);
    (void)fp_seconds;

    gsrc_image* out = nullptr;
    gsrc_telemetry* telemetry = nullptr;
    check(gsrc_denoise(y.get(), z.get(), &params, reference.get(), &out, &telemetry));
    ImagePtr result(out);
    TelemetryPtr records(telemetry);

    check(gsrc_image_save(result.get(), o.output.c_str()));
    const std::string telemetry_path =
        o.telemetry.empty() ? o.output + ".telemetry.jsonl" : o.telemetry;
    write_telemetry(telemetry_path, records.get());

    std::cout << "wrote " << o.output << "\n";
    std::cout << "telemetry " << telemetry_path << "\n";
    if (reference) {
        double psnr_value = 0.0;
        double ssim_value = 0.0;
        check(gsrc_psnr(reference.get(), result.get(), &psnr_value));
        check(gsrc_ssim(reference.get(), result.get(), &ssim_value));
        std::cout << "psnr " << fmt(psnr_value, 6) << "\n";
        std::cout << "ssim " << fmt(ssim_value, 6) << "\n";
    }
    return 0;
}

struct BenchRow {
    std::string image;
    double sigma = 0.0;
    bool failed = false;
    double psnr_noisy = 0.0;
    double psnr_firstpass = 0.0;
    double psnr_gsrc = 0.0;
    double ssim_gsrc = 0.0;
    double seconds_firstpass = 0.0;
    double seconds_gsrc = 0.0;
};

std::optional<std::string> run_bench_item(const fs::path& path, double sigma, const Options& o,
                                          BenchRow& row) {
    gsrc_image* raw = nullptr;
    if (gsrc_image_load(path.string().c_str(), &raw) != GSRC_OK)
        return std::string(gsrc_last_error());
    ImagePtr clean(raw);

    const std::uint64_t seed = fnv1a64(path.stem().string() + ":" + fmt_g(sigma));
    gsrc_image* noisy_raw = nullptr;
    if (gsrc_add_gaussian_noise(clean.get(), sigma, seed, &noisy_raw) != GSRC_OK)
        return std::string(gsrc_last_error());
    ImagePtr noisy(noisy_raw);

    if (gsrc_psnr(clean.get(), noisy.get(), &row.psnr_noisy) != GSRC_OK)
        return std::string(gsrc_last_error());

    const gsrc_nlm_params nlm = build_nlm_params(o);
    const int threads = resolve_threads(o.threads);
    gsrc_image* z_raw = nullptr;
    auto tick = std::chrono::steady_clock::now();
    if (gsrc_nlm_denoise(noisy.get(), sigma, &nlm, threads, &z_raw) != GSRC_OK)
        return std::string(gsrc_last_error());
    auto tock = std::chrono::steady_clock::now();
    ImagePtr z(z_raw);
    row.seconds_firstpass = std::chrono::duration<double>(tock - tick).count();

    if (gsrc_psnr(clean.get(), z.get(), &row.psnr_firstpass) != GSRC_OK)
        return std::string(gsrc_last_error());

    const gsrc_denoise_params params = build_params(o, sigma);
    gsrc_image* out_raw = nullptr;
    tick = std::chrono::steady_clock::now();
    if (gsrc_denoise(noisy.get(), z.get(), &params, nullptr, &out_raw, nullptr) != GSRC_OK)
        return std::string(gsrc_last_error());
    tock = std::chrono::steady_clock::now();
    ImagePtr denoised(out_raw);
    row.seconds_gsrc = std::chrono::duration<double>(tock - tick).count();

    if (gsrc_psnr(clean.get(), denoised.get(), &row.psnr_gsrc) != GSRC_OK)
        return std::string(gsrc_last_error());
    if (gsrc_ssim(clean.get(), denoised.get(), &row.ssim_gsrc) != GSRC_OK)
        return std::string(gsrc_last_error());
    return std::nullopt;
}

int cmd_bench(const Options& o) {
    if (o.input.empty())
        die("input directory required");
    if (o.sigma.empty())
        die("sigma required");
    const FirstPassChoice fp = parse_first_pass(o.first_pass);
    if (fp.external)
        die("bench supports only the nlm first pass");

    std::error_code ec;
    if (!fs::is_directory(o.input, ec))
        die("image directory not found");
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(o.input)) {
        if (!entry.is_regular_file())
            continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (ext == ".pgm" || ext == ".png")
            images.push_back(entry.path());
    }
    if (images.empty())
        die("no images");
    std::sort(images.begin(), images.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

    const std::string csv_path = o.csv.empty() ? "bench.csv" : o.csv;
    std::ofstream csv(csv_path, std::ios::binary);
    if (!csv)
        die("cannot write CSV file '" + csv_path + "'");
    csv << "image,sigma,status,psnr_noisy,psnr_firstpass,psnr_gsrc,ssim_gsrc,"
           "seconds_firstpass,seconds_gsrc,seconds_gsrc_std\n";

    bool any_failed = false;
    for (const double sigma : o.sigma) {
        std::vector<BenchRow> ok_rows;
        for (const fs::path& path : images) {
            BenchRow row;
            row.image = path.stem().string();
            row.sigma = sigma;
            const std::optional<std::string> error = run_bench_item(path, sigma, o, row);
            if (error) {
                any_failed = true;
                csv << row.image << "," << fmt_g(sigma) << ",FAILED,,,,,,,\n";
                std::cout << row.image << " sigma=" << fmt_g(sigma) << " FAILED " << *error
                          << "\n";
                continue;
            }
            csv << row.image << "," << fmt_g(sigma) << ",ok," << fmt(row.psnr_noisy, 6) << ","
                << fmt(row.psnr_firstpass, 6) << "," << fmt(row.psnr_gsrc, 6) << ","
                << fmt(row.ssim_gsrc, 6) << "," << fmt(row.seconds_firstpass, 3) << ","
                << fmt(row.seconds_gsrc, 3) << ",\n";
            std::cout << row.image << " sigma=" << fmt_g(sigma)
                      << " psnr_gsrc=" << fmt(row.psnr_gsrc, 2)
                      << " seconds=" << fmt(row.seconds_gsrc, 2) << "\n";
            ok_rows.push_back(row);
        }

        if (ok_rows.empty()) {
            csv << "AVERAGE," << fmt_g(sigma) << ",summary,,,,,,,\n";
            continue;
        }
        const auto mean = [&](double BenchRow::*field) {
            double sum = 0.0;
            for (const BenchRow& r : ok_rows)
                sum += r.*field;
            return sum / static_cast<double>(ok_rows.size());
        };
        const double mean_seconds = mean(&BenchRow::seconds_gsrc);
        double var = 0.0;
        for (const BenchRow& r : ok_rows) {
            const double d = r.seconds_gsrc - mean_seconds;
            var += d * d;
        }
        const double std_seconds =
            ok_rows.size() > 1 ? std::sqrt(var / static_cast<double>(ok_rows.size() - 1)) : 0.0;
        csv << "AVERAGE," << fmt_g(sigma) << ",summary," << fmt(mean(&BenchRow::psnr_noisy), 6)
            << "," << fmt(mean(&BenchRow::psnr_firstpass), 6) << ","
            << fmt(mean(&BenchRow::psnr_gsrc), 6) << "," << fmt(mean(&BenchRow::ssim_gsrc), 6)
            << "," << fmt(mean(&BenchRow::seconds_firstpass), 3) << "," << fmt(mean_seconds, 3)
            << "," << fmt(std_seconds, 3) << "\n";
    }

    csv.close();
    std::cout << "wrote " << csv_path << "\n";
    return any_failed ? 1 : 0;
}

int cmd_residual(const Options& o) {
    if (o.input.empty())
        die("input required");
    if (o.sigma.empty())
        die("sigma required");
    if (o.sigma.size() > 1)
        die("this command takes a single sigma");
    const double sigma = o.sigma.front();

    ImagePtr clean = load_or_die(o.input, "input");
    gsrc_image* noisy_raw = nullptr;
    check(gsrc_add_gaussian_noise(clean.get(), sigma, o.seed, &noisy_raw));
    ImagePtr noisy(noisy_raw);

    const gsrc_denoise_params params = build_params(o, sigma);

    auto [z, fp_seconds] = run_first_pass(noisy.get(), sigma, o, params.threads);
    (void)fp_seconds;

    char* json_raw = nullptr;
    check(gsrc_residual_analysis(noisy.get(), z.get(), &params, &json_raw));
    std::unique_ptr<char, decltype(&gsrc_string_free)> json_guard(json_raw, &gsrc_string_free);
    const nlohmann::json report = nlohmann::json::parse(json_raw);

    const std::string report_path = o.output.empty() ? "residual_report.json" : o.output;
    {
        std::ofstream out(report_path, std::ios::binary);
        if (!out)
            die("cannot write report file '" + report_path + "'");
        out << report.dump(2) << "\n";
    }

    const std::string hist_path = o.csv.empty() ? "residual_histogram.csv" : o.csv;
    {
        std::ofstream out(hist_path, std::ios::binary);
        if (!out)
            die("cannot write histogram file '" + hist_path + "'");
        out << "bin_left,bin_right,count,log_count\n";
        const auto& edges = report.at("histogram").at("edges");
        const auto& counts = report.at("histogram").at("counts");
        for (std::size_t i = 0; i < counts.size(); ++i) {
            const double count = counts.at(i).get<double>();
            out << fmt_g(edges.at(i).get<double>()) << "," << fmt_g(edges.at(i + 1).get<double>())
                << "," << fmt_g(count) << "," << fmt(std::log10(1.0 + count), 6) << "\n";
        }
    }

    std::cout << "samples " << report.at("samples").get<std::uint64_t>() << "\n";
    const auto& models = report.at("models");
    std::cout << "loglik gaussian " << fmt(models.at("gaussian").at("loglik").get<double>(), 6)
              << "\n";
    std::cout << "loglik laplacian " << fmt(models.at("laplacian").at("loglik").get<double>(), 6)
              << "\n";
    std::cout << "loglik hyper_laplacian "
              << fmt(models.at("hyper_laplacian").at("loglik").get<double>(), 6) << " p "
              << fmt_g(models.at("hyper_laplacian").at("p").get<double>()) << "\n";
    std::cout << "best " << report.at("best_model").get<std::string>() << "\n";
    std::cout << "wrote " << report_path << "\n";
    std::cout << "wrote " << hist_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    Options o;

    // The config file provides defaults; flags parsed afterwards override
    // them, so the file has to be read before CLI11 runs.
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--config" && i + 1 < argc)
            apply_config(o, argv[i + 1]);
        else if (a.rfind("--config=", 0) == 0)
            apply_config(o, a.substr(9));
    }

    CLI::App app{"GSRC grayscale image denoiser"};
    app.require_subcommand(1);

    CLI::App* denoise =
        app.add_subcommand("denoise", "denoise one image (with --seed: add noise first)");
    add_common_flags(denoise, o);
    CLI::App* bench =
        app.add_subcommand("bench", "run the benchmark over a directory of clean images");
    add_common_flags(bench, o);
    CLI::App* residual =
        app.add_subcommand("residual", "fit the code-residual distribution of a clean image");
    add_common_flags(residual, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    for (const CLI::App* sub : {denoise, bench, residual})
        if (sub->parsed() && sub->count("--seed") > 0)
            o.has_seed = true;

    if (denoise->parsed())
        return cmd_denoise(o);
    if (bench->parsed())
        return cmd_bench(o);
    if (residual->parsed())
        return cmd_residual(o);
    return 1;
}
