#pragma once

#include <Eigen/Dense>

namespace scts {

// Makes an SVD-like factor pair deterministic: flips each column pair of
// (left, right) so that the largest-magnitude entry of the left column is
// positive, taking the first index on ties. The product left * right^T is
// unchanged.
void fix_factor_signs(Eigen::MatrixXd& left, Eigen::MatrixXd& right);

// Largest singular value by power iteration on the smaller Gram matrix.
double spectral_norm(const Eigen::MatrixXd& a, double tol = 1e-10, int max_iter = 10000);

}  // namespace scts
