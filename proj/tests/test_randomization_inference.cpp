#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "scts/errors.hpp"
#include "scts/estimation.hpp"
#include "scts/panel_model.hpp"
#include "scts/policies.hpp"
#include "scts/randomization_inference.hpp"
#include "scts/rng.hpp"

using namespace scts;

namespace {

struct SmallRun {
    SyntheticInstance inst;
    ExperimentResult history;
};

SmallRun make_history(double tau_star, uint64_t model_seed, uint64_t noise_seed,
                      uint64_t sampler_seed, int n = 12, int t0 = 15, int horizon = 20) {
    FactorModelSpec spec = draw_factor_model(n, 2, t0, horizon, 1.0, tau_star, model_seed);
    SmallRun run{generate_instance(spec, noise_seed), {}};
    DesignConfig cfg;
    cfg.kind = DesignKind::Scts;
    cfg.rank = 2;
    cfg.rho = 1.0;
    cfg.beta.sigma = 1.0;
    cfg.beta.B = factor_norm_bound_c2(spec.factors);
    cfg.beta.r = 2;
    cfg.beta.n = n;
    cfg.beta.T = horizon;
    cfg.beta.lambda_norm_plus_tau = spec.lambda_star.norm() + std::abs(tau_star);
    cfg.beta.mode = BetaSchedule::Mode::Scaled;
    cfg.beta.scale = 0.05;
    cfg.sampler_seed = sampler_seed;
    run.history = run_experiment(cfg, *run.inst.generator, tau_star);
    return run;
}

}  // namespace

TEST_CASE("rerandomization config validation") {
    RerandomizationConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.k = 10;
    cfg.significance = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.significance = 0.1;
    cfg.grid = GridSpec{1.0, 0.0, 0.1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg.grid = GridSpec{0.0, 1.0, -0.1};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("test reports are deterministic and trace-independent") {
    SmallRun run = make_history(0.8, 1, 2, 3);
    RerandomizationConfig cfg;
    cfg.k = 20;
    cfg.base_seed = 77;
    TestReport a = rerandomize_test(run.history, 0.8, cfg);
    TestReport b = rerandomize_test(run.history, 0.8, cfg);
    CHECK(a.samples == b.samples);
    CHECK(a.p_value == b.p_value);
    CHECK(a.statistic == run.history.final_fit.tau_hat);
    CHECK(static_cast<int>(a.samples.size()) == 20);

    DonorTrace trace(*run.inst.generator, 2);
    TestReport c = rerandomize_test(run.history, 0.8, cfg, &trace);
    CHECK(a.samples == c.samples);

    cfg.base_seed = 78;
    TestReport d = rerandomize_test(run.history, 0.8, cfg);
    CHECK(a.samples != d.samples);
}

TEST_CASE("p-value is the exact exceedance fraction") {
    SmallRun run = make_history(0.5, 5, 6, 7);
    RerandomizationConfig cfg;
    cfg.k = 25;
    cfg.base_seed = 11;
    TestReport rep = rerandomize_test(run.history, 0.5, cfg);
    int below = 0;
    for (double s : rep.samples)
        if (s < rep.statistic) ++below;
    CHECK(rep.p_value == doctest::Approx(1.0 - below / 25.0).epsilon(1e-15));
    CHECK(rep.rejected == (rep.p_value < cfg.significance));
}

TEST_CASE("two-sided decision folds the one-sided p") {
    SmallRun run = make_history(0.5, 5, 6, 7);
    RerandomizationConfig cfg;
    cfg.k = 25;
    cfg.base_seed = 11;
    TestReport one = rerandomize_test(run.history, 0.5, cfg);
    cfg.two_sided = true;
    cfg.significance = 0.5;
    TestReport two = rerandomize_test(run.history, 0.5, cfg);
    CHECK(two.p_value == one.p_value);   // reported p stays one-sided
    double folded = 2.0 * std::min(one.p_value, 1.0 - one.p_value);
    CHECK(two.rejected == (folded < 0.5));
}

TEST_CASE("missing donor panel is a data error") {
    SmallRun run = make_history(0.5, 8, 9, 10);
    ExperimentResult broken = run.history;
    broken.panel.donor_obs = Eigen::MatrixXd(0, 0);
    RerandomizationConfig cfg;
    cfg.k = 5;
    CHECK_THROWS_AS(rerandomize_test(broken, 0.0, cfg), DataError);
}

TEST_CASE("null far below the truth is rejected, truth is retained") {
    // Strong positive effect: replaying under tau_null far below the realized
    // effect leaves the history statistic in the upper tail.
    SmallRun run = make_history(2.5, 20, 120, 220);
    RerandomizationConfig cfg;
    cfg.k = 60;
    cfg.base_seed = 5;
    TestReport at_truth = rerandomize_test(run.history, 2.5, cfg);
    TestReport far_below = rerandomize_test(run.history, -2.5, cfg);
    CHECK_FALSE(at_truth.rejected);
    CHECK(far_below.rejected);
    CHECK(far_below.p_value < at_truth.p_value);
}

TEST_CASE("p-values trend upward along the null grid") {
    SmallRun run = make_history(1.5, 31, 32, 33);
    RerandomizationConfig cfg;
    cfg.k = 40;
    cfg.base_seed = 6;
    double lo = rerandomize_test(run.history, 0.0, cfg).p_value;
    double mid = rerandomize_test(run.history, 1.5, cfg).p_value;
    double hi = rerandomize_test(run.history, 3.0, cfg).p_value;
    CHECK(lo <= mid + 0.15);
    CHECK(mid <= hi + 0.15);
    CHECK(lo < hi);
}

TEST_CASE("confidence interval inversion honors an explicit grid") {
    SmallRun run = make_history(1.0, 41, 42, 43);
    RerandomizationConfig cfg;
    cfg.k = 30;
    cfg.base_seed = 9;
    cfg.grid = GridSpec{-1.0, 3.0, 0.5};
    CiResult ci = invert_to_ci(run.history, cfg);
    CHECK(ci.grid.size() == 9);
    CHECK(ci.grid.front() == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(ci.grid.back() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(ci.p_values.size() == ci.grid.size());
    CHECK_FALSE(ci.empty);
    CHECK(ci.lo <= ci.hi);
    // Accepted points are exactly the grid points whose test kept the null.
    for (double tau : ci.accepted) {
        TestReport rep = rerandomize_test(run.history, tau, cfg);
        CHECK_FALSE(rep.rejected);
    }
}

TEST_CASE("default grid brackets the final fit") {
    SmallRun run = make_history(0.7, 51, 52, 53);
    RerandomizationConfig cfg;
    cfg.k = 20;
    cfg.base_seed = 4;
    CiResult ci = invert_to_ci(run.history, cfg);
    double center = run.history.final_fit.tau_hat;
    double width = 6.0 * run.history.final_fit.sigma_hat;
    CHECK(ci.grid.front() == doctest::Approx(center - width).epsilon(1e-9));
    CHECK(ci.grid.back() >= center + width - 1e-9);
    CHECK(ci.grid.size() == 49);
}

TEST_CASE("interval inversion covers the truth on an easy instance") {
    SmallRun run = make_history(1.2, 61, 62, 63, 16, 25, 30);
    RerandomizationConfig cfg;
    cfg.k = 40;
    cfg.base_seed = 13;
    cfg.grid = GridSpec{-2.0, 4.0, 0.25};
    CiResult ci = invert_to_ci(run.history, cfg);
    CHECK_FALSE(ci.empty);
    CHECK(ci.lo <= 1.2);
    CHECK(ci.hi >= 1.2);
}

TEST_CASE("replay sample rank is near-uniform under the sharp null") {
    // Exchangeability: at the true tau the history statistic is one more draw
    // from the replay distribution, so p is close to uniform on {1/k..1}.
    // Ties (identical replayed action paths) push p upward, never down.
    int k = 10;
    int count = 0;
    double sum = 0.0;
    int low = 0;
    for (int i = 0; i < 120; ++i) {
        SmallRun run = make_history(0.6, 100 + i, 200 + i, 300 + i, 8, 10, 12);
        RerandomizationConfig cfg;
        cfg.k = k;
        cfg.base_seed = 400 + i;
        TestReport rep = rerandomize_test(run.history, 0.6, cfg);
        sum += rep.p_value;
        if (rep.p_value <= 0.3 + 1e-12) ++low;
        ++count;
    }
    double mean = sum / count;
    // Uniform{0.1,...,1.0} has mean 0.55; allow tie-induced upward drift.
    CHECK(mean > 0.45);
    CHECK(mean < 0.75);
    // Without ties P(p <= 0.3) = 4/11; ties only shrink it.
    CHECK(low <= 0.5 * count);
    CHECK(low >= 1);
}

TEST_CASE("rejection threshold is strict even at significance one") {
    SmallRun run = make_history(0.9, 71, 72, 73);
    RerandomizationConfig cfg;
    cfg.k = 15;
    cfg.base_seed = 2;
    cfg.significance = 1.0;
    TestReport rep = rerandomize_test(run.history, 0.9, cfg);
    CHECK(rep.rejected == (rep.p_value < 1.0));
    // Replays vary on this instance, so some sample lands below the statistic.
    CHECK(rep.p_value < 1.0);
    CHECK(rep.p_value > 0.0);
}
