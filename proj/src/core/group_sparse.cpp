#include "group_sparse.hpp"

#include "error.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace gsrc {

Dictionary pca_dictionary(const PatchGroup& group) {
    const Eigen::Index bc = group.values.rows();
    const Eigen::Index k = group.values.cols();
    if (k < 1)
        fail(errc::invalid_argument, "pca_dictionary: group has no columns");
    if (!group.values.allFinite())
        fail(errc::invalid_argument, "pca_dictionary: non-finite group values");

    const Eigen::MatrixXd scatter =
        (group.values * group.values.transpose()) / static_cast<double>(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
    if (solver.info() != Eigen::Success)
        fail(errc::internal, "pca_dictionary: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; flip to descending and pin the
    // sign of each eigenvector.
    Dictionary dict;
    dict.basis.resize(bc, bc);
    for (Eigen::Index j = 0; j < bc; ++j) {
        Eigen::VectorXd v = solver.eigenvectors().col(bc - 1 - j);
        for (Eigen::Index i = 0; i < bc; ++i) {
            if (std::fabs(v(i)) > 1e-12) {
                if (v(i) < 0.0)
                    v = -v;
                break;
            }
        }
        dict.basis.col(j) = v;
    }
    return dict;
}

CodeMatrix encode(const Dictionary& dictionary, const PatchGroup& group) {
    if (dictionary.basis.rows() != group.values.rows())
        fail(errc::dimension_mismatch, "encode: dictionary/group dimension mismatch");
    return dictionary.basis.transpose() * group.values;
}

PatchGroup reconstruct(const Dictionary& dictionary, const CodeMatrix& code, int patch_side) {
    if (dictionary.basis.cols() != code.rows())
        fail(errc::dimension_mismatch, "reconstruct: dictionary/code dimension mismatch");
    if (dictionary.basis.rows() != static_cast<Eigen::Index>(patch_side) * patch_side)
        fail(errc::dimension_mismatch, "reconstruct: dictionary rows are not patch_side^2");
    PatchGroup group;
    group.patch_side = patch_side;
    group.values = dictionary.basis * code;
    return group;
}

Eigen::VectorXd estimate_residual_std(const CodeMatrix& code_noisy, const CodeMatrix& code_estimate) {
    if (code_noisy.rows() != code_estimate.rows() || code_noisy.cols() != code_estimate.cols())
        fail(errc::dimension_mismatch, "estimate_residual_std: code dimension mismatch");
    Eigen::VectorXd out(code_noisy.rows());
    const double inv_k = 1.0 / static_cast<double>(code_noisy.cols());
    for (Eigen::Index j = 0; j < code_noisy.rows(); ++j) {
        double sum_sq = 0.0;
        for (Eigen::Index l = 0; l < code_noisy.cols(); ++l) {
            const double r = code_noisy(j, l) - code_estimate(j, l);
            sum_sq += r * r;
        }
        out(j) = std::max(kResidualStdFloor, std::sqrt(sum_sq * inv_k));
    }
    return out;
}

LambdaSchedule lambda_schedule(double sigma_n, const Eigen::VectorXd& residual_std, double c) {
    if (!(sigma_n >= 0.0))
        fail(errc::invalid_argument, "lambda_schedule: sigma_n must be >= 0");
    LambdaSchedule schedule;
    schedule.c = c;
    schedule.sigma_n = sigma_n;
    const double numerator = c * 2.0 * std::sqrt(2.0) * sigma_n * sigma_n;
    schedule.per_atom = numerator * residual_std.cwiseInverse();
    return schedule;
}

CodeMatrix shrink_group(const CodeMatrix& code_noisy, const CodeMatrix& code_estimate,
                        const LambdaSchedule& schedule) {
    if (code_noisy.rows() != code_estimate.rows() || code_noisy.cols() != code_estimate.cols())
        fail(errc::dimension_mismatch, "shrink_group: code dimension mismatch");
    if (schedule.per_atom.size() != code_noisy.rows())
        fail(errc::dimension_mismatch, "shrink_group: schedule length mismatch");
    CodeMatrix out(code_noisy.rows(), code_noisy.cols());
    for (Eigen::Index j = 0; j < code_noisy.rows(); ++j) {
        const double lambda = schedule.per_atom(j);
        for (Eigen::Index l = 0; l < code_noisy.cols(); ++l) {
            const double estimate = code_estimate(j, l);
            out(j, l) = soft_threshold(code_noisy(j, l) - estimate, lambda) + estimate;
        }
    }
    return out;
}

} // namespace gsrc
