#include "scts/ridge_eiv.hpp"

#include <cmath>

#include "scts/errors.hpp"

namespace scts {

RidgeFit fit_ridge_from_stats(const Eigen::MatrixXd& omega_data,
                              const Eigen::VectorXd& rhs, double rho) {
    if (rho <= 0.0) throw ConfigError("ridge penalty rho must be > 0");
    int d = static_cast<int>(omega_data.rows());
    if (omega_data.cols() != d || rhs.size() != d)
        throw ConfigError("ridge statistics have inconsistent shapes");

    RidgeFit fit;
    fit.rho = rho;
    fit.omega = omega_data;
    fit.omega.diagonal().array() += rho;
    Eigen::LLT<Eigen::MatrixXd> llt(fit.omega);
    Eigen::VectorXd theta = llt.solve(rhs);
    Eigen::VectorXd e0 = Eigen::VectorXd::Zero(d);
    e0(0) = 1.0;
    fit.sigma_hat = std::sqrt(llt.solve(e0)(0));
    fit.tau_hat = theta(0);
    fit.lambda_hat = theta.tail(d - 1);
    return fit;
}

RidgeFit fit_ridge(const Eigen::VectorXd& y0, const Eigen::VectorXd& actions,
                   const Eigen::MatrixXd& z_hat, double rho) {
    int t = static_cast<int>(y0.size());
    if (actions.size() != t || z_hat.rows() != t)
        throw ConfigError("ridge inputs have inconsistent epoch counts");
    int r = static_cast<int>(z_hat.cols());
    int d = r + 1;

    Eigen::MatrixXd omega_data = Eigen::MatrixXd::Zero(d, d);
    omega_data(0, 0) = actions.squaredNorm();
    omega_data.block(0, 1, 1, r) = (actions.transpose() * z_hat);
    omega_data.block(1, 0, r, 1) = omega_data.block(0, 1, 1, r).transpose();
    omega_data.block(1, 1, r, r) = z_hat.transpose() * z_hat;

    Eigen::VectorXd rhs(d);
    rhs(0) = actions.dot(y0);
    rhs.tail(r) = z_hat.transpose() * y0;
    return fit_ridge_from_stats(omega_data, rhs, rho);
}

double BetaSchedule::alpha() const {
    return 20.0 * sigma * std::sqrt(static_cast<double>(std::max(n, T)) / static_cast<double>(n));
}

double BetaSchedule::at(int t) const {
    if (t < 1) throw ConfigError("beta schedule index must be >= 1");
    double a = alpha();
    double td = static_cast<double>(t);
    double log_arg = td * (r + 1 + td * (B + 1.0 + a));
    double lg = std::max(std::log(log_arg), std::log(2.0));
    double value = 2.0 * sigma * std::sqrt(2.0 * (r + 1) * lg) +
                   lambda_norm_plus_tau * (1.0 + a);
    if (mode == Mode::Scaled) value *= scale;
    return value;
}

double beta_t(const BetaSchedule& schedule, int t) { return schedule.at(t); }

double elliptical_potential_bound(double B, double rho, int d, int T) {
    if (rho <= 0.0) throw ConfigError("rho must be > 0");
    if (d < 1) throw ConfigError("dimension d must be >= 1");
    if (T <= 0 || B == 0.0) return 0.0;
    double b2 = B * B;
    return std::sqrt((b2 / rho) * d * T * std::log1p(T * b2 / (d * rho)));
}

}  // namespace scts
