#pragma once

#include <map>
#include <string>
#include <vector>

#include "scts/policies.hpp"
#include "scts/randomization_inference.hpp"

namespace scts {

enum class Scenario { Synthetic, SemiSynthetic };

// Full description of a benchmark run. For the semi-synthetic scenario,
// tau_values are multiples of the panel's rank-r residual noise scale (the
// effect is placed in noise units); for the synthetic scenario they are
// absolute effects against the configured sigma.
struct BenchmarkConfig {
    Scenario scenario = Scenario::Synthetic;
    int n = 200;
    int r = 10;
    int T0 = 200;
    int T = 200;
    double sigma = 1.0;
    std::vector<double> tau_values = {-1.0, 1.0};
    std::string data_path;     // semi-synthetic CSV panel
    std::string layout_path;   // semi-synthetic layout config
    std::vector<DesignKind> designs = {DesignKind::Scts, DesignKind::Fixed,
                                       DesignKind::Switchback};
    int instances = 30;
    uint64_t base_seed = 1;
    BetaSchedule::Mode beta_mode = BetaSchedule::Mode::Scaled;
    double beta_scale = 0.03;
    double rho = 1.0;
    int refresh_every = 1;
    std::string output_dir = "bench_out";
    // Inference benchmark knobs.
    std::vector<double> snr_list = {0.01, 0.1, 1.0};
    int k = 100;
    double alpha = 0.1;

    void validate() const;
};

BenchmarkConfig benchmark_config_from_pairs(const std::map<std::string, std::string>& kv);
// File form; the SCTS_OUTPUT_DIR environment variable overrides output_dir.
BenchmarkConfig parse_benchmark_config(const std::string& path);
uint64_t benchmark_config_hash(const BenchmarkConfig& config);

// One experiment's footprint: everything the aggregate tables and series are
// built from (and all that is: aggregation never sees the runs themselves).
struct InstanceRecord {
    DesignKind design = DesignKind::Scts;
    double tau = 0.0;                  // realized tau_star
    int instance_index = 0;
    uint64_t noise_seed = 0;
    uint64_t sampler_seed = 0;
    std::vector<int> actions;          // treatment epochs
    std::vector<double> tau_hats;      // per decision, SCTS/UCB only
    std::map<std::string, double> estimates;
    int M_size = 0;
    int suboptimal_count = 0;
    double ell_sum = 0.0;
    double ell_B = 0.0;
    double ell_bound = 0.0;
};

struct BenchRow {
    DesignKind design = DesignKind::Scts;
    double tau = 0.0;
    std::string estimator;
    int instances = 0;
    double normalized_regret = 0.0;
    double rmse_relative = 0.0;
    double sign_accuracy = 0.0;   // NaN when tau = 0
};

struct SeriesPoint {
    int t = 0;
    double regret_frac = 0.0;
    double rmse_rel = 0.0;   // NaN for designs without per-epoch fits
};

struct DesignSeries {
    DesignKind design = DesignKind::Scts;
    double tau = 0.0;
    std::vector<SeriesPoint> points;
};

struct BenchmarkReport {
    std::vector<InstanceRecord> records;
    std::vector<BenchRow> rows;
    std::vector<DesignSeries> series;
    int ell_violations = 0;
    double ell_max_ratio = 0.0;
    uint64_t config_hash = 0;
    uint64_t base_seed = 0;
};

// Runs the experiment matrix, writes benchmark_summary.csv, instances.jsonl
// and benchmark_meta.json into output_dir, and returns the report.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

// One design on one generated instance of the configured scenario, with the
// same seed derivations run_benchmark would use. tau_entry is in the
// scenario's tau units (absolute effect, or noise multiples when
// semi-synthetic).
ExperimentResult run_single(const BenchmarkConfig& config, DesignKind design,
                            double tau_entry, int instance_index);

// Re-aggregation path used both inside run_benchmark and by emit-plots.
BenchmarkReport aggregate_records(std::vector<InstanceRecord> records);
std::vector<InstanceRecord> load_instance_records(const std::string& path);

// Writes one plot-ready CSV per (design, tau) series; returns the paths.
std::vector<std::string> emit_series(const BenchmarkReport& report,
                                     const std::string& out_dir);

struct InferenceRow {
    double snr = 0.0;
    int instances = 0;
    int k = 0;
    double alpha = 0.0;
    double coverage = 0.0;   // test at the true effect accepted
    double power = 0.0;      // test at zero rejected
};

struct InferenceReport {
    std::vector<InferenceRow> rows;
    uint64_t config_hash = 0;
};

// Coverage/power of the re-randomization test per signal-to-noise ratio;
// writes inference_summary.csv and inference_instances.jsonl.
InferenceReport run_inference_benchmark(const BenchmarkConfig& config,
                                        const RerandomizationConfig& rerand,
                                        const std::vector<double>& snr_list);

}  // namespace scts
