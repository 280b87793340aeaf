#pragma once

#include <Eigen/Dense>

namespace scts {

// Regularized least-squares fit of the unit outcome on (action, estimated
// contexts). Coordinate 0 of the design is the action, coordinates 1..r the
// context, so sigma_hat^2 = (omega^-1)(0,0).
struct RidgeFit {
    double tau_hat = 0.0;
    Eigen::VectorXd lambda_hat;   // r
    Eigen::MatrixXd omega;        // (r+1) x (r+1), rho*I + sum of x x^T
    double sigma_hat = 0.0;
    double rho = 1.0;
};

// Solves min over (tau, lambda) of
//   sum_s (y0_s - tau*a_s - <lambda, z_s>)^2 + rho*(tau^2 + |lambda|^2).
// Empty data returns the prior fit: tau=0, lambda=0, omega=rho*I.
RidgeFit fit_ridge(const Eigen::VectorXd& y0, const Eigen::VectorXd& actions,
                   const Eigen::MatrixXd& z_hat, double rho);

// Same solve from sufficient statistics: omega_data = sum x x^T and
// rhs = sum y*x, both over the raw data (no rho term).
RidgeFit fit_ridge_from_stats(const Eigen::MatrixXd& omega_data,
                              const Eigen::VectorXd& rhs, double rho);

// Posterior expansion factor schedule
//   beta_t = 2*sigma*sqrt(2(r+1)*log(t*(r+1 + t*(B+1+alpha)))) + L*(1+alpha)
// with alpha = 20*sigma*sqrt(max(n,T)/n) and L = lambda_norm_plus_tau.
// The log is floored at log 2 (only reachable in degenerate shapes).
// Scaled mode multiplies the whole expression by `scale`.
struct BetaSchedule {
    double sigma = 0.0;
    double B = 1.0;                    // context norm bound
    int r = 1;
    int n = 1;
    int T = 1;
    double lambda_norm_plus_tau = 0.0;
    enum class Mode { Theoretical, Scaled } mode = Mode::Theoretical;
    double scale = 1.0;                // only read in Scaled mode

    double alpha() const;
    double at(int t) const;
};

double beta_t(const BetaSchedule& schedule, int t);

// Right-hand side of the elliptical potential inequality:
//   sum_t |x_t|_{Omega_{t-1}^-1} <= sqrt((B^2/rho) * d * T * log(1 + T*B^2/(d*rho))).
double elliptical_potential_bound(double B, double rho, int d, int T);

}  // namespace scts
