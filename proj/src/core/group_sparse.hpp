#pragma once

#include "patch.hpp"

#include <Eigen/Core>

namespace gsrc {

// Orthonormal per-group PCA basis, columns sorted by descending
// eigenvalue of the group scatter matrix.
struct Dictionary {
    Eigen::MatrixXd basis; // bc x bc
};

using CodeMatrix = Eigen::MatrixXd; // bc x k

struct LambdaSchedule {
    Eigen::VectorXd per_atom; // length bc, entries >= 0
    double c = 0.0;
    double sigma_n = 0.0;
};

// Residual rows with RMS below this are floored so the lambda schedule
// stays finite.
constexpr double kResidualStdFloor = 1e-6;

// Eigendecomposition of the uncentered scatter (1/k) G G^T. Determinism
// rules: eigenvalues sorted descending, and each eigenvector's first
// component larger than 1e-12 in magnitude is made positive.
Dictionary pca_dictionary(const PatchGroup& group);

// A = D^T X; exact inverse of reconstruct for orthonormal D.
CodeMatrix encode(const Dictionary& dictionary, const PatchGroup& group);

PatchGroup reconstruct(const Dictionary& dictionary, const CodeMatrix& code, int patch_side);

// Per-atom RMS of the code residual, floored at kResidualStdFloor.
Eigen::VectorXd estimate_residual_std(const CodeMatrix& code_noisy, const CodeMatrix& code_estimate);

// lambda_j = c * 2*sqrt(2) * sigma_n^2 / residual_std_j
LambdaSchedule lambda_schedule(double sigma_n, const Eigen::VectorXd& residual_std, double c);

inline double soft_threshold(double value, double lambda) {
    const double magnitude = std::fabs(value) - lambda;
    return magnitude > 0.0 ? (value < 0.0 ? -magnitude : magnitude) : 0.0;
}

// out[j,l] = S_lambda_j(noisy[j,l] - estimate[j,l]) + estimate[j,l].
// For orthonormal dictionaries this is the exact column-wise minimizer of
// ||y - D a||_2^2 + sum_j 2 lambda_j |a_j - b_j|.
CodeMatrix shrink_group(const CodeMatrix& code_noisy, const CodeMatrix& code_estimate,
                        const LambdaSchedule& schedule);

} // namespace gsrc
