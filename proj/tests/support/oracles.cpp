#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace oracle {

std::vector<gsrc::Pos> knn_members(const gsrc::Image& image, const gsrc::Pos& reference,
                                   const gsrc::PatchGeometry& geometry) {
    const int patch = geometry.patch_side;
    const auto patch_ssd = [&](const gsrc::Pos& a, const gsrc::Pos& b) {
        double s = 0.0;
        for (int i = 0; i < patch; ++i)
            for (int j = 0; j < patch; ++j) {
                const double d = image.at(a.row + i, a.col + j) - image.at(b.row + i, b.col + j);
                s += d * d;
            }
        return s;
    };

    const auto span = [&](int ref, int extent) {
        const int lo = ref - (geometry.window_side - 1) / 2;
        const int hi = lo + geometry.window_side - 1;
        return std::pair<int, int>{std::max(0, lo), std::min(extent - patch, hi)};
    };
    const auto [rlo, rhi] = span(reference.row, image.height);
    const auto [clo, chi] = span(reference.col, image.width);

    struct Scored {
        double dist;
        gsrc::Pos pos;
    };
    std::vector<Scored> scored;
    for (int r = rlo; r <= rhi; ++r)
        for (int c = clo; c <= chi; ++c) {
            if (r == reference.row && c == reference.col)
                continue;
            scored.push_back({patch_ssd(reference, gsrc::Pos{r, c}), gsrc::Pos{r, c}});
        }
    std::stable_sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.dist != b.dist)
            return a.dist < b.dist;
        if (a.pos.row != b.pos.row)
            return a.pos.row < b.pos.row;
        return a.pos.col < b.pos.col;
    });

    std::vector<gsrc::Pos> members{reference};
    const std::size_t keep = std::min<std::size_t>(static_cast<std::size_t>(geometry.k) - 1, scored.size());
    for (std::size_t i = 0; i < keep; ++i)
        members.push_back(scored[i].pos);
    return members;
}

double ssim(const gsrc::Image& a, const gsrc::Image& b) {
    constexpr int n = 11;
    constexpr double sigma = 1.5;
    constexpr double c1 = 6.5025;  // (0.01 * 255)^2
    constexpr double c2 = 58.5225; // (0.03 * 255)^2

    double g[n];
    double gsum = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = i - (n - 1) / 2.0;
        g[i] = std::exp(-d * d / (2.0 * sigma * sigma));
        gsum += g[i];
    }
    for (double& v : g)
        v /= gsum;

    double total = 0.0;
    std::size_t positions = 0;
    for (int r = 0; r + n <= a.height; ++r) {
        for (int c = 0; c + n <= a.width; ++c) {
            double mua = 0.0, mub = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double w = g[i] * g[j];
                    mua += w * a.at(r + i, c + j);
                    mub += w * b.at(r + i, c + j);
                }
            double va = 0.0, vb = 0.0, cov = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double w = g[i] * g[j];
                    const double da = a.at(r + i, c + j) - mua;
                    const double db = b.at(r + i, c + j) - mub;
                    va += w * da * da;
                    vb += w * db * db;
                    cov += w * da * db;
                }
            total += ((2.0 * mua * mub + c1) * (2.0 * cov + c2)) /
                     ((mua * mua + mub * mub + c1) * (va + vb + c2));
            ++positions;
        }
    }
    return total / static_cast<double>(positions);
}

EigenSystem jacobi_eigensystem(Eigen::MatrixXd s) {
    const Eigen::Index n = s.rows();
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    const auto off_diagonal_max = [&] {
        double m = 0.0;
        for (Eigen::Index p = 0; p < n; ++p)
            for (Eigen::Index q = p + 1; q < n; ++q)
                m = std::max(m, std::fabs(s(p, q)));
        return m;
    };

    const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 100 && off_diagonal_max() > 1e-14 * scale; ++sweep) {
        for (Eigen::Index p = 0; p < n; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = s(p, q);
                if (std::fabs(apq) <= 1e-300)
                    continue;
                const double theta = (s(q, q) - s(p, p)) / (2.0 * apq);
                double t = 1.0;
                if (theta != 0.0) {
                    t = 1.0 / (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                    if (theta < 0.0)
                        t = -t;
                }
                const double cs = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * cs;
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double sip = s(i, p);
                    const double siq = s(i, q);
                    s(i, p) = cs * sip - sn * siq;
                    s(i, q) = sn * sip + cs * siq;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double spi = s(p, i);
                    const double sqi = s(q, i);
                    s(p, i) = cs * spi - sn * sqi;
                    s(q, i) = sn * spi + cs * sqi;
                }
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double vip = v(i, p);
                    const double viq = v(i, q);
                    v(i, p) = cs * vip - sn * viq;
                    v(i, q) = sn * vip + cs * viq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        order[static_cast<std::size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index a, Eigen::Index b) { return s(a, a) > s(b, b); });

    EigenSystem out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = s(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

double shrink_scalar(double noisy, double estimate, double lambda) {
    const double lo = std::min(noisy, estimate) - 1.0;
    const double hi = std::max(noisy, estimate) + 1.0;
    const double step = 1e-4;
    double best = lo;
    double best_cost = std::numeric_limits<double>::infinity();
    for (double a = lo; a <= hi; a += step) {
        const double cost = (noisy - a) * (noisy - a) + 2.0 * lambda * std::fabs(a - estimate);
        if (cost < best_cost) {
            best_cost = cost;
            best = a;
        }
    }
    return best;
}

std::vector<double> sample_normal(std::size_t n, double sigma, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    std::vector<double> out(n);
    for (double& v : out)
        v = dist(rng);
    return out;
}

std::vector<double> sample_laplacian(std::size_t n, double b, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> out(n);
    for (double& v : out) {
        const double u = dist(rng);
        v = -b * (u < 0.0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::fabs(u));
    }
    return out;
}

std::vector<double> sample_hyper_laplacian(std::size_t n, double scale, double p, std::uint64_t seed) {
    // |x/scale|^p is Gamma(1/p, 1) distributed, so invert the power.
    std::mt19937_64 rng(seed);
    std::gamma_distribution<double> mag(1.0 / p, 1.0);
    std::bernoulli_distribution flip(0.5);
    std::vector<double> out(n);
    for (double& v : out) {
        const double m = scale * std::pow(mag(rng), 1.0 / p);
        v = flip(rng) ? -m : m;
    }
    return out;
}

} // namespace oracle
