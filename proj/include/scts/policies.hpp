#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "scts/latent_recovery.hpp"
#include "scts/panel_model.hpp"
#include "scts/ridge_eiv.hpp"
#include "scts/rng.hpp"

namespace scts {

enum class DesignKind { Scts, Ucb, Fixed, Switchback };

std::string design_kind_name(DesignKind kind);
DesignKind parse_design_kind(const std::string& name);

// Per-epoch factor decompositions of a growing donor matrix, shared across
// every run that sees the same donor observations (designs and replays alike;
// donors never depend on actions). Entry t holds the top-rank eigenpairs of
// Y_t Y_t^T where Y_t is the first t donor columns, recomputed from the exact
// Gram at every epoch.
class DonorTrace {
public:
    DonorTrace(const PanelGenerator& gen, int rank);

    int rank() const { return rank_; }
    int donors() const { return static_cast<int>(donor_mat_.rows()); }
    int epochs() const { return static_cast<int>(donor_mat_.cols()); }
    int first_epoch() const { return first_; }

    // Factors of Y_t; t counts observed columns, first_epoch() <= t <= epochs().
    const Eigen::MatrixXd& u(int t) const;
    const Eigen::VectorXd& sv(int t) const;

    const Eigen::MatrixXd& donor_matrix() const { return donor_mat_; }

    // Materializes the t x rank context estimate at epoch count t, zero-padded
    // past the effective rank; any t in [1, epochs()] (decomposed on demand if
    // below first_epoch()).
    LatentEstimate latent_at(int t) const;

private:
    void decompose(int t, Eigen::MatrixXd& u_out, Eigen::VectorXd& sv_out,
                   const Eigen::MatrixXd& gram) const;

    int rank_;
    int first_;
    Eigen::MatrixXd donor_mat_;
    std::vector<Eigen::MatrixXd> u_;    // indexed t - first_
    std::vector<Eigen::VectorXd> sv_;
};

// Mutable state for the single-step policy interface.
struct PolicyState {
    DesignKind kind = DesignKind::Scts;
    int rank = 1;
    double rho = 1.0;
    BetaSchedule beta;
    RngStream rng{0};
    RidgeFit current_fit;
    LatentEstimate latent;
    double last_tau_tilde = 0.0;
    double last_beta = 0.0;
};

// One decision given everything observed so far. Recomputes the factor
// estimate and ridge fit on the panel, then samples (SCTS) or thresholds
// (UCB). Returns the action for the next epoch and updates the state trace.
int scts_step(PolicyState& state, const PanelData& panel);
int ucb_step(PolicyState& state, const PanelData& panel);

struct RegretTrace {
    std::vector<double> per_epoch;
    double total = 0.0;
    int suboptimal_count = 0;
};

// R_t = |tau_star| when the action disagrees with the sign-optimal one.
RegretTrace compute_regret(double tau_star, const std::vector<int>& treatment_actions);

struct DesignConfig {
    DesignKind kind = DesignKind::Scts;
    int rank = 1;
    double rho = 1.0;
    BetaSchedule beta;
    uint64_t sampler_seed = 0;
    int refresh_every = 1;   // recompute factors+fit every k-th decision
};

struct EpochFit {
    double tau_hat = 0.0;
    double sigma_hat = 0.0;
    double tau_tilde = 0.0;   // NaN for designs that do not sample
    double beta = 0.0;
};

struct ExperimentResult {
    DesignConfig config;
    PanelData panel;
    RegretTrace regret;
    std::vector<int> treated_epochs;   // 1-based treatment epochs with a_t = 1
    std::vector<EpochFit> fits;        // one per decision, SCTS/UCB only
    RidgeFit final_fit;                // fit on the complete panel
    double tau_star = 0.0;             // NaN when unknown
    uint64_t noise_seed = 0;
    // Elliptical potential audit: sum of |x_t| in the Omega-bar norm over
    // treatment epochs against frozen design rows, and the largest row norm.
    double ell_sum = 0.0;
    double ell_B = 0.0;

    int treatment_epochs() const { return panel.treatment_epochs(); }
};

// Plays a = 0 through pre-treatment, then runs the design over the treatment
// epochs; every action depends only on strictly prior observations. tau_star
// is used for regret accounting only (pass NaN when unknown). A shared trace
// may be passed when many runs see the same donor stream; it must match the
// generator's donor columns.
ExperimentResult run_experiment(const DesignConfig& config, const PanelGenerator& gen,
                                double tau_star, const DonorTrace* trace = nullptr);

std::string to_json_string(const ExperimentResult& result);
ExperimentResult experiment_result_from_json(const std::string& text);

}  // namespace scts
