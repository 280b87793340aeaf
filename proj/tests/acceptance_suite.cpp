// End-to-end acceptance checks. Each criterion prints one pass/fail line;
// the process exits nonzero if any criterion fails.
#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "scts/bench.hpp"
#include "scts/errors.hpp"
#include "scts/estimation.hpp"
#include "scts/latent_recovery.hpp"
#include "scts/linalg.hpp"
#include "scts/panel_model.hpp"
#include "scts/policies.hpp"
#include "scts/randomization_inference.hpp"
#include "scts/ridge_eiv.hpp"
#include "scts/rng.hpp"

using namespace scts;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    std::string label;
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

Eigen::MatrixXd random_matrix(int rows, int cols, uint64_t seed) {
    RngStream rng(seed);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.next_normal();
    return m;
}

Eigen::MatrixXd random_rotation(int r, uint64_t seed) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(r, r, seed));
    return qr.householderQ() * Eigen::MatrixXd::Identity(r, r);
}

// Deterministic panel where treating is always wrong yet looks appealing:
// every donor shows 1, the unit shows 2 untreated and 1 treated.
FactorModelSpec adversarial_spec(int n, int horizon) {
    FactorModelSpec spec;
    spec.n = n;
    spec.r = 1;
    spec.T0 = 0;
    spec.T = horizon;
    spec.sigma = 0.0;
    spec.tau_star = -1.0;
    spec.loadings = Eigen::MatrixXd::Ones(n, 1);
    spec.factors = Eigen::MatrixXd::Ones(horizon, 1);
    spec.lambda_star = Eigen::VectorXd::Constant(1, 2.0);
    return spec;
}

BetaSchedule schedule_for(const FactorModelSpec& spec, BetaSchedule::Mode mode,
                          double scale) {
    BetaSchedule b;
    b.sigma = spec.sigma;
    b.B = factor_norm_bound_c2(spec.factors);
    b.r = spec.r;
    b.n = spec.n;
    b.T = spec.T;
    b.lambda_norm_plus_tau = spec.lambda_star.norm() + std::abs(spec.tau_star);
    b.mode = mode;
    b.scale = scale;
    return b;
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

const BenchRow* find_row(const BenchmarkReport& report, DesignKind design, double tau,
                         const std::string& estimator) {
    for (const BenchRow& row : report.rows)
        if (row.design == design && row.tau == tau && row.estimator == estimator)
            return &row;
    return nullptr;
}

Outcome criterion_ucb_failure() {
    auto start = std::chrono::steady_clock::now();
    int horizon = 500;
    FactorModelSpec spec = adversarial_spec(50, horizon);
    SyntheticInstance inst = generate_instance(spec, 1);
    DesignConfig cfg;
    cfg.kind = DesignKind::Ucb;
    cfg.rank = 1;
    cfg.rho = 1.0;
    cfg.beta = schedule_for(spec, BetaSchedule::Mode::Theoretical, 1.0);
    cfg.sampler_seed = 2;
    ExperimentResult res = run_experiment(cfg, *inst.generator, spec.tau_star);

    bool all_treated = static_cast<int>(res.treated_epochs.size()) == horizon;
    bool regret_exact = res.regret.total == 500.0 && res.regret.suboptimal_count == 500;
    double max_fit_err = 0.0;
    for (int k = 0; k < static_cast<int>(res.fits.size()); ++k) {
        double target = k / (1.0 + 2.0 * k);
        max_fit_err = std::max(max_fit_err, std::abs(res.fits[k].tau_hat - target));
    }
    double final_err = std::abs(res.final_fit.tau_hat - 500.0 / 1001.0);
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 1 (adversarial instance defeats UCB exactly)";
    out.pass = all_treated && regret_exact && max_fit_err <= 1e-9 && final_err <= 1e-9 &&
               elapsed < 5.0;
    out.detail = fmt("treated=%zu/500 regret=%.1f max_fit_err=%.2e final_err=%.2e %.1fs",
                     res.treated_epochs.size(), res.regret.total, max_fit_err, final_err,
                     elapsed);
    return out;
}

Outcome criterion_rotation_invariance() {
    auto start = std::chrono::steady_clock::now();
    double max_tau = 0.0, max_sigma = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        int t = 40, r = 5;
        RngStream rng(5000 + rep);
        Eigen::VectorXd y0(t), actions(t);
        for (int s = 0; s < t; ++s) {
            y0(s) = rng.next_normal();
            actions(s) = rng.next_coin() ? 1.0 : 0.0;
        }
        Eigen::MatrixXd z = random_matrix(t, r, 6000 + rep);
        Eigen::MatrixXd q = random_rotation(r, 7000 + rep);
        RidgeFit base = fit_ridge(y0, actions, z, 1.0);
        RidgeFit rotated = fit_ridge(y0, actions, z * q, 1.0);
        max_tau = std::max(max_tau, std::abs(base.tau_hat - rotated.tau_hat));
        max_sigma = std::max(max_sigma, std::abs(base.sigma_hat - rotated.sigma_hat));
    }
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 2 (ridge fit invariant to context rotation)";
    out.pass = max_tau <= 1e-9 && max_sigma <= 1e-9 && elapsed < 10.0;
    out.detail = fmt("100 pairs, max|dtau|=%.2e max|dsigma|=%.2e %.1fs", max_tau,
                     max_sigma, elapsed);
    return out;
}

Outcome criterion_recovery_bound() {
    auto start = std::chrono::steady_clock::now();
    int n = 200, t = 200, r = 10;
    int violations = 0;
    double worst_margin = 1e300;
    for (int rep = 0; rep < 50; ++rep) {
        Eigen::MatrixXd mean =
            random_matrix(n, r, 10000 + rep) * random_matrix(t, r, 20000 + rep).transpose();
        Eigen::MatrixXd noise = random_matrix(n, t, 30000 + rep);
        CanonicalDecomposition d = canonicalize_decomposition(mean, r);
        LatentEstimate est = estimate_factors(mean + noise, r);
        ProcrustesResult aligned = procrustes_align(d.factors, est.Z_hat);
        double rhs = 4.0 * spectral_norm(noise) / std::sqrt(static_cast<double>(n));
        if (aligned.residual > rhs) ++violations;
        worst_margin = std::min(worst_margin, rhs - aligned.residual);
    }
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 3 (factor recovery within the spectral bound)";
    out.pass = violations == 0 && elapsed < 30.0;
    out.detail = fmt("50 draws, violations=%d min_margin=%.3f %.1fs", violations,
                     worst_margin, elapsed);
    return out;
}

Outcome criterion_noise_concentration() {
    auto start = std::chrono::steady_clock::now();
    int n = 200, t = 200;
    int exceed = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::MatrixXd noise = random_matrix(n, t, 40000 + rep);
        if (spectral_norm(noise) > spectral_noise_bound(n, t, 1.0)) ++exceed;
    }
    double frac = exceed / 200.0;
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 4 (noise spectral norm concentrates)";
    out.pass = frac <= 0.01 && elapsed < 30.0;
    out.detail = fmt("200 draws, exceed_frac=%.3f %.1fs", frac, elapsed);
    return out;
}

Outcome criterion_elliptical(const BenchmarkReport& bench, const BenchmarkReport& proxy) {
    Outcome out;
    out.label = "criterion 5 (elliptical potential within its bound)";
    out.pass = bench.ell_violations == 0 && proxy.ell_violations == 0 &&
               bench.ell_max_ratio <= 1.0 && proxy.ell_max_ratio <= 1.0;
    out.detail = fmt("violations=%d+%d max_ratio=%.3f/%.3f", bench.ell_violations,
                     proxy.ell_violations, bench.ell_max_ratio, proxy.ell_max_ratio);
    return out;
}

Outcome criterion_regret_benchmark(const BenchmarkReport& report, double elapsed) {
    const BenchRow* scts_neg = find_row(report, DesignKind::Scts, -1.0, "sc_adaptive");
    const BenchRow* scts_pos = find_row(report, DesignKind::Scts, 1.0, "sc_adaptive");
    const BenchRow* fixed_neg = find_row(report, DesignKind::Fixed, -1.0, "sc");
    const BenchRow* fixed_pos = find_row(report, DesignKind::Fixed, 1.0, "sc");
    const BenchRow* swb_neg = find_row(report, DesignKind::Switchback, -1.0, "ridge_raw");
    const BenchRow* swb_pos = find_row(report, DesignKind::Switchback, 1.0, "ridge_raw");
    Outcome out;
    out.label = "criterion 6 (desk-scale regret pattern across designs)";
    if (!scts_neg || !scts_pos || !fixed_neg || !fixed_pos || !swb_neg || !swb_pos) {
        out.detail = "missing aggregate rows";
        return out;
    }
    bool scts_ok = scts_neg->normalized_regret <= 0.10 && scts_pos->normalized_regret <= 0.10;
    bool fixed_ok =
        fixed_neg->normalized_regret == 1.0 && fixed_pos->normalized_regret == 0.0;
    bool swb_ok = std::abs(swb_neg->normalized_regret - 0.5) <= 0.05 &&
                  std::abs(swb_pos->normalized_regret - 0.5) <= 0.05;
    // Whole-series shape: switchback stays flat at 1/2 once averages settle.
    double swb_flat = 0.0;
    for (const DesignSeries& s : report.series) {
        if (s.design != DesignKind::Switchback) continue;
        for (const SeriesPoint& pt : s.points)
            if (pt.t >= 26) swb_flat = std::max(swb_flat, std::abs(pt.regret_frac - 0.5));
    }
    bool flat_ok = swb_flat <= 0.05;
    out.pass = scts_ok && fixed_ok && swb_ok && flat_ok && elapsed < 600.0;
    out.detail = fmt("scts=%.3f/%.3f fixed=%.2f/%.2f switchback=%.3f/%.3f %.0fs",
                     scts_neg->normalized_regret, scts_pos->normalized_regret,
                     fixed_neg->normalized_regret, fixed_pos->normalized_regret,
                     swb_neg->normalized_regret, swb_pos->normalized_regret, elapsed);
    return out;
}

Outcome criterion_sign_identification(const BenchmarkReport& report) {
    const BenchRow* neg = find_row(report, DesignKind::Scts, -1.0, "sc_adaptive");
    const BenchRow* pos = find_row(report, DesignKind::Scts, 1.0, "sc_adaptive");
    Outcome out;
    out.label = "criterion 7 (effect sign identified on 95% of instances)";
    if (!neg || !pos) {
        out.detail = "missing aggregate rows";
        return out;
    }
    out.pass = neg->sign_accuracy >= 0.95 && pos->sign_accuracy >= 0.95;
    out.detail = fmt("sign_accuracy neg=%.3f pos=%.3f", neg->sign_accuracy,
                     pos->sign_accuracy);
    return out;
}

Outcome criterion_estimation_quality(const BenchmarkReport& report) {
    const BenchRow* adaptive = find_row(report, DesignKind::Scts, 1.0, "sc_adaptive");
    const BenchRow* baseline = find_row(report, DesignKind::Fixed, 1.0, "sc");
    Outcome out;
    out.label = "criterion 8 (adaptive estimator RMSE within 2x of static SC)";
    if (!adaptive || !baseline) {
        out.detail = "missing aggregate rows";
        return out;
    }
    out.pass = adaptive->rmse_relative <= 2.0 * baseline->rmse_relative;
    out.detail = fmt("rmse_rel adaptive=%.4f static=%.4f ratio=%.2f",
                     adaptive->rmse_relative, baseline->rmse_relative,
                     adaptive->rmse_relative / baseline->rmse_relative);
    return out;
}

double median_sc_error(int t0, int horizon, uint64_t seed_base, int reps) {
    std::vector<double> errors;
    errors.reserve(reps);
    std::vector<int> all_treated(horizon, 1);
    for (int rep = 0; rep < reps; ++rep) {
        FactorModelSpec spec =
            draw_factor_model(200, 3, t0, horizon, 1.0, 1.0, seed_base + 2 * rep);
        SyntheticInstance inst = generate_instance(spec, seed_base + 2 * rep + 1);
        PanelData panel = assemble_panel(*inst.generator, all_treated);
        Eigen::MatrixXd donor_pre = panel.donor_obs.leftCols(t0);
        Eigen::VectorXd unit_pre = panel.unit_obs.head(t0);
        ScWeights w = fit_sc_weights(donor_pre, unit_pre);
        errors.push_back(std::abs(estimate_sc(panel, w).value - 1.0));
    }
    size_t mid = errors.size() / 2;
    std::nth_element(errors.begin(), errors.begin() + mid, errors.end());
    return errors[mid];
}

Outcome criterion_rate_shape() {
    auto start = std::chrono::steady_clock::now();
    double med_small = median_sc_error(100, 100, 50000, 200);
    double med_large = median_sc_error(400, 400, 60000, 200);
    double ratio = med_small / med_large;
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 9 (SC error shrinks at the root-T rate)";
    out.pass = ratio >= 1.5 && ratio <= 2.5;
    out.detail = fmt("median_err (100,100)=%.4f (400,400)=%.4f ratio=%.2f %.0fs",
                     med_small, med_large, ratio, elapsed);
    return out;
}

Outcome criterion_inference(const InferenceReport& report, double elapsed) {
    const InferenceRow* low = nullptr;
    const InferenceRow* mid = nullptr;
    const InferenceRow* high = nullptr;
    for (const InferenceRow& row : report.rows) {
        if (row.snr == 0.01) low = &row;
        if (row.snr == 0.1) mid = &row;
        if (row.snr == 1.0) high = &row;
    }
    Outcome out;
    out.label = "criterion 10 (replay test coverage and power)";
    if (!low || !mid || !high) {
        out.detail = "missing inference rows";
        return out;
    }
    bool coverage_ok = std::abs(mid->coverage - 0.90) <= 0.06 &&
                       std::abs(high->coverage - 0.90) <= 0.06;
    bool power_ok = high->power >= 0.7 && low->power <= 0.2;
    out.pass = coverage_ok && power_ok && elapsed < 1800.0;
    out.detail = fmt("coverage snr0.1=%.2f snr1=%.2f, power snr1=%.2f snr0.01=%.2f %.0fs",
                     mid->coverage, high->coverage, high->power, low->power, elapsed);
    return out;
}

Outcome criterion_sampler_quartile() {
    auto start = std::chrono::steady_clock::now();
    FactorModelSpec spec = draw_factor_model(10, 2, 10, 20, 1.0, 0.5, 90001);
    SyntheticInstance inst = generate_instance(spec, 90002);
    std::vector<int> actions(20);
    for (int s = 0; s < 20; ++s) actions[s] = s % 2;
    PanelData panel = assemble_panel(*inst.generator, actions);

    PolicyState state;
    state.kind = DesignKind::Scts;
    state.rank = 2;
    state.rho = 1.0;
    state.beta = schedule_for(spec, BetaSchedule::Mode::Theoretical, 1.0);
    state.rng = RngStream(90008);

    int draws = 10000;
    int above = 0;
    double threshold = 0.0;
    for (int i = 0; i < draws; ++i) {
        scts_step(state, panel);
        if (i == 0)
            threshold = state.current_fit.tau_hat +
                        0.5 * state.last_beta * state.current_fit.sigma_hat;
        if (state.last_tau_tilde >= threshold) ++above;
    }
    double frac = static_cast<double>(above) / draws;
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 11 (posterior sample upper-quartile identity)";
    out.pass = std::abs(frac - 0.25) <= 0.01;
    out.detail = fmt("P(tau_tilde >= tau_hat + beta*sigma/2)=%.4f over 10^4 draws %.0fs",
                     frac, elapsed);
    return out;
}

Outcome criterion_determinism() {
    auto start = std::chrono::steady_clock::now();
    BenchmarkConfig cfg;
    cfg.n = 40;
    cfg.r = 3;
    cfg.T0 = 30;
    cfg.T = 30;
    cfg.instances = 5;
    cfg.base_seed = 7;
    cfg.beta_scale = 0.05;
    fs::path a = "acceptance_out/repro_a";
    fs::path b = "acceptance_out/repro_b";
    fs::remove_all(a);
    fs::remove_all(b);
    cfg.output_dir = a.string();
    run_benchmark(cfg);
    cfg.output_dir = b.string();
    run_benchmark(cfg);
    bool same = true;
    for (const char* name :
         {"benchmark_summary.csv", "instances.jsonl", "benchmark_meta.json"}) {
        std::string left = read_file(a / name);
        same = same && !left.empty() && left == read_file(b / name);
    }
    double elapsed = seconds_since(start);
    Outcome out;
    out.label = "criterion 12 (rerun reproduces outputs byte for byte)";
    out.pass = same;
    out.detail = fmt("summary/records/meta identical=%s %.0fs", same ? "yes" : "no",
                     elapsed);
    return out;
}

Outcome regret_trend_proxy(const BenchmarkReport& report) {
    Outcome out;
    out.label = "regret-trend proxy (suboptimal fraction vanishes with T)";
    const DesignSeries* neg = nullptr;
    const DesignSeries* pos = nullptr;
    for (const DesignSeries& s : report.series) {
        if (s.design != DesignKind::Scts) continue;
        if (s.tau == -1.0) neg = &s;
        if (s.tau == 1.0) pos = &s;
    }
    if (!neg || !pos || neg->points.size() < 500 || pos->points.size() < 500) {
        out.detail = "missing series";
        return out;
    }
    double neg_100 = neg->points[99].regret_frac;
    double neg_500 = neg->points[499].regret_frac;
    double pos_100 = pos->points[99].regret_frac;
    double pos_500 = pos->points[499].regret_frac;
    auto quartile_drop = [](const DesignSeries& s) {
        size_t q = s.points.size() / 4;
        double first = 0.0, last = 0.0;
        for (size_t i = 0; i < q; ++i) {
            first += s.points[i].regret_frac;
            last += s.points[s.points.size() - q + i].regret_frac;
        }
        return last < first;
    };
    out.pass = neg_500 < neg_100 && pos_500 < pos_100 && quartile_drop(*neg) &&
               quartile_drop(*pos);
    out.detail = fmt("regret_frac t=100 -> t=500: neg %.4f -> %.4f, pos %.4f -> %.4f",
                     neg_100, neg_500, pos_100, pos_500);
    return out;
}

}  // namespace

int main() {
    std::vector<Outcome> results(13);
    auto note = [](const char* msg) { std::fprintf(stderr, "... %s\n", msg); };

    note("criteria 1-4: closed-form and concentration checks");
    results[0] = criterion_ucb_failure();
    results[1] = criterion_rotation_invariance();
    results[2] = criterion_recovery_bound();
    results[3] = criterion_noise_concentration();

    note("criterion 9: rate-shape Monte Carlo");
    results[8] = criterion_rate_shape();

    note("criterion 11: sampler quartile");
    results[10] = criterion_sampler_quartile();

    note("criterion 12: determinism rerun");
    results[11] = criterion_determinism();

    note("criterion 6: desk-scale benchmark (minutes)");
    auto bench_start = std::chrono::steady_clock::now();
    BenchmarkConfig bench_cfg;
    bench_cfg.output_dir = "acceptance_out/bench";
    fs::remove_all(bench_cfg.output_dir);
    BenchmarkReport bench = run_benchmark(bench_cfg);
    double bench_elapsed = seconds_since(bench_start);
    results[5] = criterion_regret_benchmark(bench, bench_elapsed);
    results[6] = criterion_sign_identification(bench);
    results[7] = criterion_estimation_quality(bench);

    note("regret-trend proxy: long-horizon run (minutes)");
    BenchmarkConfig proxy_cfg;
    proxy_cfg.T = 500;
    proxy_cfg.designs = {DesignKind::Scts};
    proxy_cfg.instances = 8;
    proxy_cfg.output_dir = "acceptance_out/proxy";
    fs::remove_all(proxy_cfg.output_dir);
    BenchmarkReport proxy = run_benchmark(proxy_cfg);
    results[12] = regret_trend_proxy(proxy);
    results[4] = criterion_elliptical(bench, proxy);

    note("criterion 10: inference benchmark (minutes)");
    auto infer_start = std::chrono::steady_clock::now();
    BenchmarkConfig infer_cfg;
    infer_cfg.instances = 100;
    infer_cfg.beta_scale = 0.3;
    infer_cfg.output_dir = "acceptance_out/infer";
    fs::remove_all(infer_cfg.output_dir);
    RerandomizationConfig rerand;
    rerand.k = 100;
    rerand.significance = 0.1;
    InferenceReport infer = run_inference_benchmark(infer_cfg, rerand, {0.01, 0.1, 1.0});
    results[9] = criterion_inference(infer, seconds_since(infer_start));

    int failures = 0;
    for (const Outcome& out : results) {
        std::printf("[%s] %s: %s\n", out.pass ? "PASS" : "FAIL", out.label.c_str(),
                    out.detail.c_str());
        if (!out.pass) ++failures;
    }
    std::printf("%d/13 checks passed\n", 13 - failures);
    return failures == 0 ? 0 : 1;
}
