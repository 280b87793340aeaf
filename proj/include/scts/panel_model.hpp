#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scts/errors.hpp"

namespace scts {

// Ground-truth generator parameters for a synthetic instance.
// Row i of `loadings` is donor i's factor loading; row t of `factors` is
// the shared latent state at epoch t (pre-treatment epochs first).
struct FactorModelSpec {
    int n = 0;       // donor units
    int r = 0;       // latent rank
    int T0 = 0;      // pre-treatment epochs
    int T = 0;       // treatment epochs
    double sigma = 0.0;
    double tau_star = 0.0;
    Eigen::MatrixXd loadings;      // n x r
    Eigen::MatrixXd factors;       // (T0+T) x r
    Eigen::VectorXd lambda_star;   // r

    int epochs() const { return T0 + T; }

    // Throws ConfigError on inconsistent dimensions or invalid scalars.
    void validate() const;
};

// Observation panel plus the action history that produced it. Column s of
// donor_obs and entry s of unit_obs/actions belong to the same epoch;
// the first `pre_treatment` epochs have actions forced to 0.
struct PanelData {
    Eigen::MatrixXd donor_obs;   // n x epochs
    Eigen::VectorXd unit_obs;    // epochs
    std::vector<int> actions;    // epochs, each 0 or 1
    int pre_treatment = 0;

    int epochs() const { return static_cast<int>(actions.size()); }
    int treatment_epochs() const { return epochs() - pre_treatment; }

    // Throws ConfigError if lengths disagree, actions are non-binary, or a
    // pre-treatment action is nonzero.
    void validate() const;
};

// One freshly observed epoch.
struct EpochObservation {
    Eigen::VectorXd donor_row;   // n values
    double unit_value = 0.0;
};

// Source of panel observations. Donor outcomes never depend on actions, so
// they are randomly accessible; the experimental unit's outcome needs the
// action taken that epoch. Implementations are deterministic: the same
// generator state answers every query identically regardless of order.
class PanelGenerator {
public:
    virtual ~PanelGenerator() = default;

    virtual int donors() const = 0;
    virtual int epochs() const = 0;
    virtual int pre_treatment() const = 0;

    virtual Eigen::VectorXd donor_column(int t) const = 0;
    virtual double unit_value(int t, int action) const = 0;

    // Streaming interface: emits epoch `cursor` under `action` and advances.
    EpochObservation next(int action);
    int cursor() const { return cursor_; }
    void reset() { cursor_ = 0; }

private:
    int cursor_ = 0;
};

// Builds the full panel produced by playing a_t = 0 through pre-treatment
// and then the given treatment actions.
PanelData assemble_panel(const PanelGenerator& gen, const std::vector<int>& treatment_actions);

struct SyntheticInstance {
    std::unique_ptr<PanelGenerator> generator;
    FactorModelSpec spec;
};

// Draws loadings, factors and lambda_star i.i.d. N(0,1) for the given shape.
FactorModelSpec draw_factor_model(int n, int r, int T0, int T, double sigma,
                                  double tau_star, uint64_t seed);

// Panel stream for a fully specified factor model. Noise is one stream per
// instance, drawing the unit's epsilon first and then donors 1..n each epoch;
// draws are consumed even when sigma = 0 so that instances with different
// sigma share standardized noise under the same seed.
SyntheticInstance generate_instance(const FactorModelSpec& spec, uint64_t seed);

// Canonical rank-r decomposition of a panel mean matrix: loadings = sqrt(n)*U,
// factors = V*S/sqrt(n) from the truncated SVD, signs fixed per
// fix_factor_signs. Throws RankError when s_r/s_1 <= 1e-10.
struct CanonicalDecomposition {
    Eigen::MatrixXd loadings;   // n x r
    Eigen::MatrixXd factors;    // epochs x r
};
CanonicalDecomposition canonicalize_decomposition(const Eigen::MatrixXd& y_bar, int r);

// CSV panel layout. Default: rows are units, columns are epochs, comma
// delimited, no header.
struct PanelLayout {
    enum class Orientation { UnitsByEpochs, EpochsByUnits };
    Orientation orientation = Orientation::UnitsByEpochs;
    char delimiter = ',';
    bool has_header = false;
    int T0 = -1;   // pre-treatment epochs; -1 = unspecified
};
PanelLayout parse_panel_layout(const std::string& path);
PanelLayout panel_layout_from_pairs(const std::map<std::string, std::string>& kv);

struct IngestedPanel {
    Eigen::MatrixXd obs;                  // units x epochs
    std::vector<std::string> unit_ids;    // header names when available, else indices
};

// Strict numeric ingestion: ragged rows, empty files and non-finite cells are
// DataErrors naming the offending row/column. No imputation.
IngestedPanel ingest_panel_csv(const std::string& path, const PanelLayout& layout);

// Treats row `unit_index` of O as the experimental unit with an additive
// effect tau_star per treated epoch; all other rows become donors verbatim.
std::unique_ptr<PanelGenerator> make_semi_synthetic(const Eigen::MatrixXd& obs,
                                                    int unit_index, double tau_star,
                                                    int T0);

// Root mean squared residual of O against its best rank-r approximation;
// the semi-synthetic benchmarks use this as the noise scale.
double residual_noise_scale(const Eigen::MatrixXd& obs, int r);

}  // namespace scts
