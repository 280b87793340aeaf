#pragma once

#include <optional>
#include <vector>

#include "scts/policies.hpp"

namespace scts {

struct GridSpec {
    double lo = 0.0;
    double hi = 0.0;
    double step = 0.0;
    void validate() const;
};

struct RerandomizationConfig {
    int k = 100;                     // resample count
    double significance = 0.1;       // alpha of the test (not the recovery radius)
    std::optional<GridSpec> grid;    // CI inversion grid; defaulted from the fit when absent
    uint64_t base_seed = 0;          // replay i uses sampler seed hash(base_seed, i)
    bool two_sided = false;          // off: the literal one-sided rule
    void validate() const;
};

// Sharp-null replay test. Replays the SCTS policy k times on counterfactually
// adjusted outcomes y_hist + tau_null*(a - a_hist), donors verbatim, each with
// a fresh sampler seed; the statistic is the history's final ridge tau_hat and
// samples are the replays' final tau_hat. p = 1 - #{samples < statistic}/k.
// With two_sided unset, rejected <=> p < significance.
struct TestReport {
    double tau_null = 0.0;
    double statistic = 0.0;
    std::vector<double> samples;
    double p_value = 0.0;
    bool rejected = false;
};

TestReport rerandomize_test(const ExperimentResult& history, double tau_null,
                            const RerandomizationConfig& config,
                            const DonorTrace* trace = nullptr);

// Accepted grid points of the test swept over tau, plus their hull.
struct CiResult {
    std::vector<double> grid;
    std::vector<double> p_values;    // one-sided, aligned with grid
    std::vector<double> accepted;
    double lo = 0.0;
    double hi = 0.0;
    bool empty = false;
};

CiResult invert_to_ci(const ExperimentResult& history, const RerandomizationConfig& config,
                      const DonorTrace* trace = nullptr);

}  // namespace scts
