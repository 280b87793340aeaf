#include "scts/randomization_inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scts/errors.hpp"

namespace scts {

void GridSpec::validate() const {
    if (!(lo < hi)) throw ConfigError("grid.lo must be < grid.hi");
    if (!(step > 0.0)) throw ConfigError("grid.step must be > 0");
}

void RerandomizationConfig::validate() const {
    if (k < 1) throw ConfigError("resample count k must be >= 1");
    if (!(significance > 0.0 && significance <= 1.0))
        throw ConfigError("significance must lie in (0,1]");
    if (grid) grid->validate();
}

namespace {

// Presents the historical panel as a generator whose unit outcome is adjusted
// to the sharp null: what the unit would have shown had the replay's actions
// been taken and the per-epoch effect been exactly tau_null.
class CounterfactualView final : public PanelGenerator {
public:
    CounterfactualView(const PanelData& hist, double tau_null)
        : hist_(hist), tau_null_(tau_null) {}

    int donors() const override { return static_cast<int>(hist_.donor_obs.rows()); }
    int epochs() const override { return hist_.epochs(); }
    int pre_treatment() const override { return hist_.pre_treatment; }

    Eigen::VectorXd donor_column(int t) const override { return hist_.donor_obs.col(t); }
    double unit_value(int t, int action) const override {
        return hist_.unit_obs(t) + tau_null_ * (action - hist_.actions[t]);
    }

private:
    const PanelData& hist_;
    double tau_null_;
};

}  // namespace

TestReport rerandomize_test(const ExperimentResult& history, double tau_null,
                            const RerandomizationConfig& config, const DonorTrace* trace) {
    config.validate();
    if (history.panel.donor_obs.rows() < 1 ||
        history.panel.donor_obs.cols() != history.panel.epochs())
        throw DataError("history is missing its donor panel");

    CounterfactualView view(history.panel, tau_null);
    std::unique_ptr<DonorTrace> local_trace;
    if (!trace) {
        local_trace = std::make_unique<DonorTrace>(view, history.config.rank);
        trace = local_trace.get();
    }

    DesignConfig replay_cfg = history.config;
    replay_cfg.kind = DesignKind::Scts;

    TestReport report;
    report.tau_null = tau_null;
    report.statistic = history.final_fit.tau_hat;
    report.samples.reserve(config.k);
    int below = 0;
    double nan = std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < config.k; ++i) {
        replay_cfg.sampler_seed = stable_hash(config.base_seed, i);
        ExperimentResult replay = run_experiment(replay_cfg, view, nan, trace);
        double sample = replay.final_fit.tau_hat;
        report.samples.push_back(sample);
        if (sample < report.statistic) ++below;
    }
    report.p_value = 1.0 - static_cast<double>(below) / static_cast<double>(config.k);
    double decision_p = config.two_sided
                            ? 2.0 * std::min(report.p_value, 1.0 - report.p_value)
                            : report.p_value;
    report.rejected = decision_p < config.significance;
    return report;
}

CiResult invert_to_ci(const ExperimentResult& history, const RerandomizationConfig& config,
                      const DonorTrace* trace) {
    config.validate();
    GridSpec grid;
    if (config.grid) {
        grid = *config.grid;
    } else {
        double center = history.final_fit.tau_hat;
        double width = 6.0 * history.final_fit.sigma_hat;
        if (width <= 0.0) width = 1e-6;
        grid.lo = center - width;
        grid.hi = center + width;
        grid.step = width / 24.0;
    }
    grid.validate();

    std::unique_ptr<DonorTrace> local_trace;
    if (!trace) {
        CounterfactualView view(history.panel, 0.0);
        local_trace = std::make_unique<DonorTrace>(view, history.config.rank);
        trace = local_trace.get();
    }

    CiResult out;
    for (double tau = grid.lo; tau <= grid.hi + 0.5 * grid.step; tau += grid.step)
        out.grid.push_back(tau);
    for (double tau : out.grid) {
        TestReport report = rerandomize_test(history, tau, config, trace);
        out.p_values.push_back(report.p_value);
        if (!report.rejected) out.accepted.push_back(tau);
    }
    if (out.accepted.empty()) {
        out.empty = true;
    } else {
        out.lo = out.accepted.front();
        out.hi = out.accepted.back();
    }
    return out;
}

}  // namespace scts
