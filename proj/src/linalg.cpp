#include "scts/linalg.hpp"

#include <cmath>

namespace scts {

void fix_factor_signs(Eigen::MatrixXd& left, Eigen::MatrixXd& right) {
    for (int j = 0; j < left.cols(); ++j) {
        int best = 0;
        double best_mag = -1.0;
        for (int i = 0; i < left.rows(); ++i) {
            double mag = std::abs(left(i, j));
            if (mag > best_mag) {
                best_mag = mag;
                best = i;
            }
        }
        if (left(best, j) < 0.0) {
            left.col(j) = -left.col(j);
            if (j < right.cols()) right.col(j) = -right.col(j);
        }
    }
}

double spectral_norm(const Eigen::MatrixXd& a, double tol, int max_iter) {
    if (a.rows() == 0 || a.cols() == 0) return 0.0;
    // Iterate on the smaller Gram matrix; deterministic slightly-sloped start
    // so the iterate is never exactly orthogonal to the top direction by
    // symmetry of an all-ones start.
    bool wide = a.cols() > a.rows();
    const Eigen::MatrixXd& m = a;
    int d = wide ? static_cast<int>(a.rows()) : static_cast<int>(a.cols());
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = 1.0 + 1e-3 * i;
    v.normalize();
    double sigma = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w;
        if (wide) w = m * (m.transpose() * v);
        else w = m.transpose() * (m * v);
        double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        double next = std::sqrt(norm);
        if (std::abs(next - sigma) <= tol * std::max(1.0, next)) return next;
        sigma = next;
    }
    return sigma;
}

}  // namespace scts
