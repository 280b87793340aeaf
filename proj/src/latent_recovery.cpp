#include "scts/latent_recovery.hpp"

#include <algorithm>
#include <cmath>

#include "scts/errors.hpp"
#include "scts/linalg.hpp"

namespace scts {

LatentEstimate estimate_factors(const Eigen::MatrixXd& y, int r) {
    int n = static_cast<int>(y.rows());
    int t = static_cast<int>(y.cols());
    if (n < 1 || t < 1) throw ConfigError("factor estimation needs a non-empty matrix");
    if (r < 1) throw ConfigError("rank r must be >= 1");
    int k = std::min({r, n, t});

    Eigen::BDCSVD<Eigen::MatrixXd> svd(y, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::MatrixXd u = svd.matrixU().leftCols(k);
    Eigen::MatrixXd v = svd.matrixV().leftCols(k);
    fix_factor_signs(u, v);

    LatentEstimate est;
    est.rank_used = k;
    est.U_hat = Eigen::MatrixXd::Zero(n, r);
    est.U_hat.leftCols(k) = u;
    est.singular_values = Eigen::VectorXd::Zero(r);
    est.singular_values.head(k) = svd.singularValues().head(k);
    est.Z_hat = Eigen::MatrixXd::Zero(t, r);
    est.Z_hat.leftCols(k) =
        v * svd.singularValues().head(k).asDiagonal() / std::sqrt(static_cast<double>(n));
    return est;
}

ProcrustesResult procrustes_align(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ConfigError("procrustes alignment needs matching shapes");
    Eigen::MatrixXd m = b.transpose() * a;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    ProcrustesResult out;
    out.phi = svd.matrixU() * svd.matrixV().transpose();
    out.residual = spectral_norm(a - b * out.phi);
    return out;
}

double spectral_noise_bound(int n, int t, double sigma) {
    return 5.0 * sigma * std::sqrt(static_cast<double>(std::max(n, t)));
}

double recovery_radius(int n, int T, double sigma) {
    return 20.0 * sigma * std::sqrt(static_cast<double>(std::max(n, T)) / static_cast<double>(n));
}

}  // namespace scts
