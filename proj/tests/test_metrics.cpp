#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/error.hpp"
#include "core/image.hpp"
#include "core/metrics.hpp"
#include "oracles.hpp"
#include "test_images.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

using gsrc::Image;

TEST_CASE("psnr of identical images is infinite") {
    const Image img = testimg::by_name("gradient", 32);
    CHECK(gsrc::psnr(img, img) == std::numeric_limits<double>::infinity());
}

TEST_CASE("psnr closed form") {
    const Image zero(16, 16, 0.0);
    const Image five(16, 16, 5.0);
    CHECK(gsrc::psnr(zero, five) == doctest::Approx(34.1514).epsilon(1e-5));
}

TEST_CASE("psnr is symmetric") {
    const Image a = testimg::by_name("plasma", 32);
    const Image b = testimg::by_name("waves", 32);
    CHECK(gsrc::psnr(a, b) == gsrc::psnr(b, a));
}

TEST_CASE("psnr decreases as noise grows") {
    const Image clean = testimg::by_name("gradient", 64);
    double prev = std::numeric_limits<double>::infinity();
    for (double sigma : {5.0, 15.0, 30.0}) {
        const Image noisy = gsrc::add_gaussian_noise(clean, {sigma, 3});
        const double p = gsrc::psnr(clean, noisy);
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("psnr rejects mismatched dimensions") {
    try {
        gsrc::psnr(Image(4, 4), Image(4, 5));
        FAIL("expected a dimension error");
    } catch (const gsrc::Error& e) {
        CHECK(e.code() == gsrc::errc::dimension_mismatch);
    }
}

TEST_CASE("ssim of an image with itself is exactly one") {
    const Image img = testimg::by_name("leaf", 48);
    CHECK(gsrc::ssim(img, img) == 1.0);
}

TEST_CASE("ssim penalizes a pure luminance shift but stays positive") {
    const Image a(32, 32, 100.0);
    Image b(32, 32, 110.0);
    const double s = gsrc::ssim(a, b);
    CHECK(s < 1.0);
    CHECK(s > 0.0);
}

TEST_CASE("ssim of a textured image against its negative is low") {
    const Image img = testimg::by_name("plasma", 64);
    Image neg(img.width, img.height);
    for (std::size_t i = 0; i < img.data.size(); ++i)
        neg.data[i] = 255.0 - img.data[i];
    const double s = gsrc::ssim(img, neg);
    CHECK(s < 0.5);
    CHECK(s == doctest::Approx(oracle::ssim(img, neg)).epsilon(1e-9));
}

TEST_CASE("ssim matches the independent oracle") {
    const Image a = testimg::by_name("leaf", 64);
    const Image b = gsrc::add_gaussian_noise(a, {20.0, 17});
    CHECK(gsrc::ssim(a, b) == doctest::Approx(oracle::ssim(a, b)).epsilon(1e-9));

    const Image c = testimg::by_name("blocks", 40);
    const Image d = testimg::by_name("rings", 40);
    CHECK(gsrc::ssim(c, d) == doctest::Approx(oracle::ssim(c, d)).epsilon(1e-9));
}

TEST_CASE("ssim rejects images smaller than its window") {
    CHECK_THROWS_AS(gsrc::ssim(Image(10, 10), Image(10, 10)), gsrc::Error);
}

TEST_CASE("fit prefers laplacian on laplacian samples") {
    const auto samples = oracle::sample_laplacian(100000, 1.0, 41);
    const auto report = gsrc::fit_residual_distributions(samples);
    CHECK(report.loglik_laplacian > report.loglik_gaussian);
    CHECK(report.best_model() == "laplacian");
    CHECK(report.laplacian_b == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fit prefers gaussian on gaussian samples") {
    const auto samples = oracle::sample_normal(100000, 1.0, 42);
    const auto report = gsrc::fit_residual_distributions(samples);
    CHECK(report.loglik_gaussian > report.loglik_laplacian);
    CHECK(report.loglik_gaussian > report.loglik_hyperlap);
    CHECK(report.best_model() == "gaussian");
    CHECK(report.gaussian_sigma == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("fit prefers the hyper-laplacian on heavy-tailed samples") {
    const auto samples = oracle::sample_hyper_laplacian(100000, 1.0, 0.5, 43);
    const auto report = gsrc::fit_residual_distributions(samples);
    CHECK(report.loglik_hyperlap > report.loglik_laplacian);
    CHECK(report.loglik_hyperlap > report.loglik_gaussian);
    CHECK(report.best_model() == "hyper_laplacian");
    CHECK(report.hyperlap_p == doctest::Approx(0.5));
}

TEST_CASE("fit validates its input") {
    CHECK_THROWS_AS(gsrc::fit_residual_distributions(std::vector<double>(99, 1.0)), gsrc::Error);

    try {
        gsrc::fit_residual_distributions(std::vector<double>(500, 3.25));
        FAIL("expected a degenerate-input error");
    } catch (const gsrc::Error& e) {
        CHECK(e.code() == gsrc::errc::degenerate_input);
        CHECK(std::string(e.what()).find("degenerate") != std::string::npos);
    }
}

TEST_CASE("fit flags near-degenerate samples instead of failing") {
    std::vector<double> samples(1000, 0.0);
    samples[0] = 1.0;
    const auto report = gsrc::fit_residual_distributions(samples);
    CHECK(report.degenerate_warning);
    CHECK(report.sample_count == 1000);
}

TEST_CASE("fit report invariants") {
    const auto samples = oracle::sample_laplacian(5000, 2.0, 44);
    const auto report = gsrc::fit_residual_distributions(samples);

    CHECK(report.gaussian_sigma > 0.0);
    CHECK(report.laplacian_b > 0.0);
    CHECK(report.hyperlap_scale > 0.0);
    CHECK(report.hyperlap_p >= 0.5);
    CHECK(report.hyperlap_p <= 0.8);
    CHECK_FALSE(report.degenerate_warning);

    REQUIRE(report.histogram_edges.size() == report.histogram_counts.size() + 1);
    const std::size_t total = std::accumulate(report.histogram_counts.begin(),
                                              report.histogram_counts.end(), std::size_t{0});
    CHECK(total == samples.size());
    CHECK(report.histogram_edges.front() == doctest::Approx(-report.histogram_edges.back()));
}

TEST_CASE("fit report serializes to well-formed json") {
    const auto samples = oracle::sample_normal(2000, 5.0, 45);
    const auto report = gsrc::fit_residual_distributions(samples);
    const nlohmann::json j = nlohmann::json::parse(report.to_json());

    CHECK(j.at("samples").get<std::size_t>() == 2000);
    CHECK(j.at("best_model").get<std::string>() == report.best_model());
    CHECK(j.at("models").at("gaussian").at("loglik").get<double>() ==
          doctest::Approx(report.loglik_gaussian));
    CHECK(j.at("models").at("hyper_laplacian").at("p").get<double>() == report.hyperlap_p);
    CHECK(j.at("histogram").at("counts").size() == report.histogram_counts.size());
}
