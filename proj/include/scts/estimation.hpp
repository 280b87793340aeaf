#pragma once

#include <Eigen/Dense>

#include <optional>
#include <utility>

#include "scts/panel_model.hpp"

namespace scts {

// Convex synthetic-control weights: non-negative, summing to one.
struct ScWeights {
    Eigen::VectorXd w;
};

enum class EstimatorKind { Sc, Scts, Ridge, DiffInMeans };

struct EffectEstimate {
    double value = 0.0;
    EstimatorKind kind = EstimatorKind::Sc;
    int M_size = -1;   // |M|, adaptive estimators only
    std::optional<std::pair<double, double>> hp_interval;
};

// Least squares over the probability simplex: w minimizing
// |unit_pre - donor_pre^T w|^2, by accelerated projected gradient from the
// uniform start, stopping at relative objective improvement < 1e-10 or
// 50000 iterations. The returned w is exactly a Euclidean simplex projection.
ScWeights fit_sc_weights(const Eigen::MatrixXd& donor_pre, const Eigen::VectorXd& unit_pre);

// Mean treatment-epoch gap between the unit and its synthetic control.
// Requires every treatment action to be 1 (the static design).
EffectEstimate estimate_sc(const PanelData& panel, const ScWeights& w);

// Mean gap over the treated epochs M, gated to 0 when 2|M| < T.
EffectEstimate estimate_scts(const PanelData& panel, const ScWeights& w, int T);

// Final ridge coefficient tau_hat on the full panel, gated by the same
// 2|M| >= T rule.
EffectEstimate estimate_ridge_final(const PanelData& panel, int r, int T, double rho = 1.0);

// Mean outcome under a=1 minus mean under a=0, treatment epochs only.
// Requires both actions to occur.
EffectEstimate estimate_diff_in_means(const PanelData& panel);

// The two additive half-width terms of the synthetic-control error bound at
// confidence 1-delta, with unit leading constants:
//   (sigma/sqrt(T)) * sqrt(log(1/delta))  and
//   (c2*sigma/sqrt(c1*T0)) * sqrt(log(1/delta) + log(n)).
std::pair<double, double> hp_interval_sc(int T, int T0, double sigma, double c1,
                                         double c2, int n, double delta);

// c1: smallest eigenvalue of the pre-treatment factor second moment
// (1/T0) * sum z_t z_t^T. c2: largest factor row norm.
double factor_excitation_c1(const Eigen::MatrixXd& pre_factors);
double factor_norm_bound_c2(const Eigen::MatrixXd& factors);

}  // namespace scts
