#include "scts/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "scts/errors.hpp"
#include "scts/latent_recovery.hpp"
#include "scts/linalg.hpp"
#include "scts/ridge_eiv.hpp"

namespace scts {

namespace {

// Exact Euclidean projection onto the probability simplex (sort-based).
Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
    int n = static_cast<int>(v.size());
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumulative = 0.0;
    double theta = 0.0;
    int support = 0;
    for (int k = 0; k < n; ++k) {
        cumulative += sorted[k];
        double candidate = (cumulative - 1.0) / (k + 1);
        if (sorted[k] - candidate > 0.0) {
            theta = candidate;
            support = k + 1;
        }
    }
    (void)support;
    return (v.array() - theta).max(0.0);
}

}  // namespace

ScWeights fit_sc_weights(const Eigen::MatrixXd& donor_pre, const Eigen::VectorXd& unit_pre) {
    int n = static_cast<int>(donor_pre.rows());
    int t0 = static_cast<int>(donor_pre.cols());
    if (t0 < 1) throw ConfigError("synthetic-control weights need pre-treatment data");
    if (unit_pre.size() != t0) throw ConfigError("unit series length must match donor columns");
    if (n < 1) throw ConfigError("need at least one donor");

    Eigen::MatrixXd gram = donor_pre * donor_pre.transpose();
    Eigen::VectorXd b = donor_pre * unit_pre;
    double lip = spectral_norm(gram);
    if (lip <= 0.0) {
        // Zero donors: every simplex point is optimal; return the start.
        return {Eigen::VectorXd::Constant(n, 1.0 / n)};
    }
    double step = 1.0 / lip;

    auto objective = [&](const Eigen::VectorXd& w) {
        return 0.5 * w.dot(gram * w) - b.dot(w);
    };

    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    Eigen::VectorXd y = w;
    double momentum = 1.0;
    double f_prev = objective(w);
    for (int it = 0; it < 50000; ++it) {
        Eigen::VectorXd grad = gram * y - b;
        Eigen::VectorXd w_next = project_simplex(y - step * grad);
        double m_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
        double f_next = objective(w_next);
        if (f_next > f_prev) {
            // Function restart: drop momentum and retry from the best point.
            y = w;
            momentum = 1.0;
            Eigen::VectorXd grad_r = gram * y - b;
            w_next = project_simplex(y - step * grad_r);
            f_next = objective(w_next);
            m_next = 1.0;
        }
        y = w_next + ((momentum - 1.0) / m_next) * (w_next - w);
        double improvement = f_prev - f_next;
        w = w_next;
        momentum = m_next;
        if (improvement >= 0.0 && improvement < 1e-10 * std::max(1.0, std::abs(f_prev))) {
            f_prev = f_next;
            break;
        }
        f_prev = f_next;
    }
    return {w};
}

namespace {

double synthetic_gap_mean(const PanelData& panel, const ScWeights& w,
                          const std::vector<int>& epochs_idx) {
    double acc = 0.0;
    for (int t : epochs_idx)
        acc += panel.unit_obs(t) - w.w.dot(panel.donor_obs.col(t));
    return epochs_idx.empty() ? 0.0 : acc / static_cast<double>(epochs_idx.size());
}

}  // namespace

EffectEstimate estimate_sc(const PanelData& panel, const ScWeights& w) {
    panel.validate();
    if (w.w.size() != panel.donor_obs.rows())
        throw ConfigError("weight vector length must match donor count");
    std::vector<int> idx;
    for (int t = panel.pre_treatment; t < panel.epochs(); ++t) {
        if (panel.actions[t] != 1)
            throw ConfigError(
                "static synthetic-control estimator needs a_t = 1 on every treatment epoch; "
                "use the adaptive-design estimator for mixed actions");
        idx.push_back(t);
    }
    EffectEstimate est;
    est.kind = EstimatorKind::Sc;
    est.value = synthetic_gap_mean(panel, w, idx);
    return est;
}

EffectEstimate estimate_scts(const PanelData& panel, const ScWeights& w, int T) {
    panel.validate();
    if (w.w.size() != panel.donor_obs.rows())
        throw ConfigError("weight vector length must match donor count");
    if (T != panel.treatment_epochs())
        throw ConfigError("T must equal the panel's treatment epoch count");
    std::vector<int> idx;
    for (int t = panel.pre_treatment; t < panel.epochs(); ++t)
        if (panel.actions[t] == 1) idx.push_back(t);
    EffectEstimate est;
    est.kind = EstimatorKind::Scts;
    est.M_size = static_cast<int>(idx.size());
    est.value = 2 * est.M_size >= T ? synthetic_gap_mean(panel, w, idx) : 0.0;
    return est;
}

EffectEstimate estimate_ridge_final(const PanelData& panel, int r, int T, double rho) {
    panel.validate();
    if (T != panel.treatment_epochs())
        throw ConfigError("T must equal the panel's treatment epoch count");
    LatentEstimate latent = estimate_factors(panel.donor_obs, r);
    Eigen::VectorXd actions(panel.epochs());
    int m = 0;
    for (int t = 0; t < panel.epochs(); ++t) {
        actions(t) = panel.actions[t];
        if (t >= panel.pre_treatment && panel.actions[t] == 1) ++m;
    }
    RidgeFit fit = fit_ridge(panel.unit_obs, actions, latent.Z_hat, rho);
    EffectEstimate est;
    est.kind = EstimatorKind::Ridge;
    est.M_size = m;
    est.value = 2 * m >= T ? fit.tau_hat : 0.0;
    return est;
}

EffectEstimate estimate_diff_in_means(const PanelData& panel) {
    panel.validate();
    double sum1 = 0.0, sum0 = 0.0;
    int n1 = 0, n0 = 0;
    for (int t = panel.pre_treatment; t < panel.epochs(); ++t) {
        if (panel.actions[t] == 1) {
            sum1 += panel.unit_obs(t);
            ++n1;
        } else {
            sum0 += panel.unit_obs(t);
            ++n0;
        }
    }
    if (n1 == 0 || n0 == 0)
        throw ConfigError("difference in means needs both actions to occur");
    EffectEstimate est;
    est.kind = EstimatorKind::DiffInMeans;
    est.value = sum1 / n1 - sum0 / n0;
    return est;
}

std::pair<double, double> hp_interval_sc(int T, int T0, double sigma, double c1,
                                         double c2, int n, double delta) {
    if (T < 1 || T0 < 1) throw ConfigError("interval needs T >= 1 and T0 >= 1");
    if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
    if (c1 <= 0.0) throw ConfigError("c1 must be > 0");
    if (n < 1) throw ConfigError("n must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
    double log_term = std::log(1.0 / delta);
    double half_T = sigma / std::sqrt(static_cast<double>(T)) * std::sqrt(log_term);
    double half_T0 = c2 * sigma / std::sqrt(c1 * static_cast<double>(T0)) *
                     std::sqrt(log_term + std::log(static_cast<double>(n)));
    return {half_T, half_T0};
}

double factor_excitation_c1(const Eigen::MatrixXd& pre_factors) {
    int t0 = static_cast<int>(pre_factors.rows());
    if (t0 < 1) throw ConfigError("need pre-treatment factors");
    Eigen::MatrixXd moment =
        pre_factors.transpose() * pre_factors / static_cast<double>(t0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(moment);
    return es.eigenvalues()(0);
}

double factor_norm_bound_c2(const Eigen::MatrixXd& factors) {
    double best = 0.0;
    for (int t = 0; t < factors.rows(); ++t)
        best = std::max(best, factors.row(t).norm());
    return best;
}

}  // namespace scts
