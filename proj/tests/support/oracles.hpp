#pragma once

#include "core/image.hpp"
#include "core/patch.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace oracle {

// Exhaustive nearest-neighbour search written straight from the matching
// rules: fixed window span clipped to valid patch positions, squared L2
// patch distance, ties broken by (distance, row, col), reference first.
std::vector<gsrc::Pos> knn_members(const gsrc::Image& image, const gsrc::Pos& reference,
                                   const gsrc::PatchGeometry& geometry);

// SSIM from the published formula, two-pass central moments and a
// separable window, structured unlike the library version.
double ssim(const gsrc::Image& a, const gsrc::Image& b);

struct EigenSystem {
    Eigen::VectorXd values;  // descending
    Eigen::MatrixXd vectors; // columns follow values
};

// Cyclic Jacobi rotations on a symmetric matrix.
EigenSystem jacobi_eigensystem(Eigen::MatrixXd s);

// Dense grid argmin of (noisy - a)^2 + 2 lambda |a - estimate|.
double shrink_scalar(double noisy, double estimate, double lambda);

std::vector<double> sample_normal(std::size_t n, double sigma, std::uint64_t seed);
std::vector<double> sample_laplacian(std::size_t n, double b, std::uint64_t seed);
// Density proportional to exp(-|x/scale|^p).
std::vector<double> sample_hyper_laplacian(std::size_t n, double scale, double p, std::uint64_t seed);

} // namespace oracle
