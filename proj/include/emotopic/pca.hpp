#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "diag.hpp"
#include "embeddings.hpp"
#include "error.hpp"

namespace emotopic {

struct PcaFit {
    Eigen::VectorXd mean;          // dim
    Eigen::MatrixXd components;    // dim x target_dim, orthonormal columns (zero when padded)
    Eigen::VectorXd eigenvalues;   // target_dim, descending; population covariance
    Eigen::MatrixXd scores;        // n x target_dim
    std::size_t rank = 0;          // number of non-padded components
};

// Exact PCA through the eigendecomposition of the population covariance
// matrix. Component signs are fixed so the largest-magnitude loading is
// positive. Components beyond the numerical rank are zero and a warning is
// issued.
inline PcaFit fit_pca(const EmbeddingMatrix& m, std::size_t target_dim) {
    if (target_dim < 2 || target_dim >= m.dim)
        throw ConfigError("reduce_dimensions requires 2 <= target_dim < dim (got target_dim=" +
                          std::to_string(target_dim) + ", dim=" + std::to_string(m.dim) + ")");
    const auto n = static_cast<Eigen::Index>(m.rows());
    const auto d = static_cast<Eigen::Index>(m.dim);
    if (n == 0) throw ConfigError("reduce_dimensions on an empty matrix");

    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> x(m.data.data(), n, d);
    PcaFit fit;
    fit.mean = x.colwise().mean().transpose();
    Eigen::MatrixXd centered = x.rowwise() - fit.mean.transpose();
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw ValidationError("covariance eigendecomposition failed");
    // Eigen returns ascending eigenvalues.
    const Eigen::VectorXd& values = solver.eigenvalues();
    const Eigen::MatrixXd& vectors = solver.eigenvectors();
    const auto k = static_cast<Eigen::Index>(target_dim);
    const double top = std::max(values(d - 1), 0.0);
    const double tol = 1e-12 * std::max(1.0, top);

    fit.components = Eigen::MatrixXd::Zero(d, k);
    fit.eigenvalues = Eigen::VectorXd::Zero(k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const Eigen::Index src = d - 1 - c;
        if (values(src) <= tol) continue;
        Eigen::VectorXd v = vectors.col(src);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v(arg) < 0) v = -v;
        fit.components.col(c) = v;
        fit.eigenvalues(c) = values(src);
        ++fit.rank;
    }
    if (fit.rank < target_dim)
        diag::warn("input rank " + std::to_string(fit.rank) + " < target_dim " + std::to_string(target_dim) +
                   "; padding with zero components");
    fit.scores = centered * fit.components;
    return fit;
}

// `seed` is accepted for interface stability; exact PCA is deterministic.
inline EmbeddingMatrix reduce_dimensions(const EmbeddingMatrix& m, std::size_t target_dim, std::uint64_t seed = 0) {
    (void)seed;
    const auto fit = fit_pca(m, target_dim);
    EmbeddingMatrix out;
    out.review_ids = m.review_ids;
    out.flagged = m.flagged;
    out.dim = target_dim;
    out.data.resize(m.rows() * target_dim);
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < target_dim; ++j)
            out.at(i, j) = fit.scores(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return out;
}

} // namespace emotopic
