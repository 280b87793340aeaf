#pragma once

#include <Eigen/Dense>

namespace scts {

// Rank-truncated SVD factors of a donor observation matrix. When the
// requested rank exceeds min(n, t), the trailing columns of every factor are
// zero and rank_used records the effective rank, so downstream consumers see
// a fixed dimension from epoch 1.
struct LatentEstimate {
    Eigen::MatrixXd Z_hat;             // t x r, row s is the context for epoch s
    Eigen::VectorXd singular_values;   // r, non-increasing, zeros past rank_used
    Eigen::MatrixXd U_hat;             // n x r
    int rank_used = 0;

    int rank() const { return static_cast<int>(singular_values.size()); }
};

// PCA loadings of Y (n x t): Z_hat = V * S / sqrt(n) from the truncated SVD,
// signs fixed by the shared convention.
LatentEstimate estimate_factors(const Eigen::MatrixXd& y, int r);

// Orthogonal matrix closest to mapping B onto A, from the SVD of B^T A.
// residual is the spectral norm of A - B*Phi.
struct ProcrustesResult {
    Eigen::MatrixXd phi;   // r x r orthogonal
    double residual = 0.0;
};
ProcrustesResult procrustes_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

// High-probability spectral norm bound 5*sigma*sqrt(max(n, t)) for an n x t
// matrix with i.i.d. N(0, sigma^2) entries.
double spectral_noise_bound(int n, int t, double sigma);

// Clean-event alignment radius 20*sigma*sqrt(max(n, T)/n).
double recovery_radius(int n, int T, double sigma);

}  // namespace scts
