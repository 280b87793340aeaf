#include "scts/panel_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "scts/keyvalue.hpp"
#include "scts/linalg.hpp"
#include "scts/rng.hpp"

namespace scts {

void FactorModelSpec::validate() const {
    if (r < 1) throw ConfigError("rank r must be >= 1");
    if (n < r) throw ConfigError("donor count n must be >= rank r");
    if (T0 < 0) throw ConfigError("pre-treatment epoch count T0 must be >= 0");
    if (T < 1) throw ConfigError("treatment epoch count T must be >= 1");
    if (sigma < 0.0) throw ConfigError("noise scale sigma must be >= 0");
    if (loadings.rows() != n || loadings.cols() != r)
        throw ConfigError("loadings must be n x r");
    if (factors.rows() != epochs() || factors.cols() != r)
        throw ConfigError("factors must be (T0+T) x r");
    if (lambda_star.size() != r) throw ConfigError("lambda_star must have length r");
}

void PanelData::validate() const {
    int e = epochs();
    if (donor_obs.cols() != e || unit_obs.size() != e)
        throw ConfigError("panel epoch counts disagree");
    if (pre_treatment < 0 || pre_treatment > e)
        throw ConfigError("pre_treatment out of range");
    for (int t = 0; t < e; ++t) {
        if (actions[t] != 0 && actions[t] != 1)
            throw ConfigError("actions must be 0 or 1");
        if (t < pre_treatment && actions[t] != 0)
            throw ConfigError("pre-treatment actions must be 0");
    }
}

EpochObservation PanelGenerator::next(int action) {
    if (cursor_ >= epochs()) throw ConfigError("generator exhausted");
    if (action != 0 && action != 1) throw ConfigError("action must be 0 or 1");
    if (cursor_ < pre_treatment() && action != 0)
        throw ConfigError("pre-treatment actions must be 0");
    EpochObservation obs;
    obs.donor_row = donor_column(cursor_);
    obs.unit_value = unit_value(cursor_, action);
    ++cursor_;
    return obs;
}

PanelData assemble_panel(const PanelGenerator& gen, const std::vector<int>& treatment_actions) {
    int e = gen.epochs();
    int t0 = gen.pre_treatment();
    if (static_cast<int>(treatment_actions.size()) != e - t0)
        throw ConfigError("treatment action count must equal treatment epochs");
    PanelData panel;
    panel.pre_treatment = t0;
    panel.donor_obs.resize(gen.donors(), e);
    panel.unit_obs.resize(e);
    panel.actions.assign(e, 0);
    for (int t = t0; t < e; ++t) panel.actions[t] = treatment_actions[t - t0];
    for (int t = 0; t < e; ++t) {
        panel.donor_obs.col(t) = gen.donor_column(t);
        panel.unit_obs(t) = gen.unit_value(t, panel.actions[t]);
    }
    panel.validate();
    return panel;
}

FactorModelSpec draw_factor_model(int n, int r, int T0, int T, double sigma,
                                  double tau_star, uint64_t seed) {
    FactorModelSpec spec;
    spec.n = n;
    spec.r = r;
    spec.T0 = T0;
    spec.T = T;
    spec.sigma = sigma;
    spec.tau_star = tau_star;
    spec.loadings.resize(n, r);
    spec.factors.resize(T0 + T, r);
    spec.lambda_star.resize(r);
    RngStream rng(stable_hash(seed, std::string_view("factor-model")));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < r; ++j) spec.loadings(i, j) = rng.next_normal();
    for (int t = 0; t < T0 + T; ++t)
        for (int j = 0; j < r; ++j) spec.factors(t, j) = rng.next_normal();
    for (int j = 0; j < r; ++j) spec.lambda_star(j) = rng.next_normal();
    spec.validate();
    return spec;
}

namespace {

class SyntheticGenerator final : public PanelGenerator {
public:
    SyntheticGenerator(const FactorModelSpec& spec, uint64_t seed) : spec_(spec) {
        spec_.validate();
        int e = spec_.epochs();
        // One noise stream per instance: epoch by epoch, the unit's draw
        // first, then donors 1..n. Draws happen even at sigma = 0 so seeds
        // align across sigma sweeps.
        RngStream rng(stable_hash(seed, std::string_view("panel-noise")));
        Eigen::MatrixXd eps(spec_.n + 1, e);
        for (int t = 0; t < e; ++t)
            for (int i = 0; i <= spec_.n; ++i) eps(i, t) = rng.next_normal();
        donor_mat_ = spec_.loadings * spec_.factors.transpose() +
                     spec_.sigma * eps.bottomRows(spec_.n);
        unit_base_ = spec_.factors * spec_.lambda_star +
                     spec_.sigma * eps.row(0).transpose();
    }

    int donors() const override { return spec_.n; }
    int epochs() const override { return spec_.epochs(); }
    int pre_treatment() const override { return spec_.T0; }

    Eigen::VectorXd donor_column(int t) const override {
        check_epoch(t);
        return donor_mat_.col(t);
    }
    double unit_value(int t, int action) const override {
        check_epoch(t);
        return unit_base_(t) + spec_.tau_star * action;
    }

private:
    void check_epoch(int t) const {
        if (t < 0 || t >= spec_.epochs()) throw ConfigError("epoch index out of range");
    }

    FactorModelSpec spec_;
    Eigen::MatrixXd donor_mat_;
    Eigen::VectorXd unit_base_;
};

class SemiSyntheticGenerator final : public PanelGenerator {
public:
    SemiSyntheticGenerator(const Eigen::MatrixXd& obs, int unit_index, double tau_star, int T0)
        : tau_star_(tau_star), T0_(T0) {
        int rows = static_cast<int>(obs.rows());
        int cols = static_cast<int>(obs.cols());
        if (unit_index < 0 || unit_index >= rows)
            throw ConfigError("unit index out of range");
        if (rows < 2) throw ConfigError("need at least one donor besides the unit");
        if (T0 < 0 || T0 > cols) throw ConfigError("T0 out of range for panel width");
        donors_.resize(rows - 1, cols);
        int k = 0;
        for (int i = 0; i < rows; ++i) {
            if (i == unit_index) continue;
            donors_.row(k++) = obs.row(i);
        }
        unit_row_ = obs.row(unit_index).transpose();
    }

    int donors() const override { return static_cast<int>(donors_.rows()); }
    int epochs() const override { return static_cast<int>(donors_.cols()); }
    int pre_treatment() const override { return T0_; }

    Eigen::VectorXd donor_column(int t) const override {
        check_epoch(t);
        return donors_.col(t);
    }
    double unit_value(int t, int action) const override {
        check_epoch(t);
        return unit_row_(t) + tau_star_ * action;
    }

private:
    void check_epoch(int t) const {
        if (t < 0 || t >= epochs()) throw ConfigError("epoch index out of range");
    }

    Eigen::MatrixXd donors_;
    Eigen::VectorXd unit_row_;
    double tau_star_;
    int T0_;
};

}  // namespace

SyntheticInstance generate_instance(const FactorModelSpec& spec, uint64_t seed) {
    SyntheticInstance inst;
    inst.generator = std::make_unique<SyntheticGenerator>(spec, seed);
    inst.spec = spec;
    return inst;
}

std::unique_ptr<PanelGenerator> make_semi_synthetic(const Eigen::MatrixXd& obs,
                                                    int unit_index, double tau_star,
                                                    int T0) {
    return std::make_unique<SemiSyntheticGenerator>(obs, unit_index, tau_star, T0);
}

CanonicalDecomposition canonicalize_decomposition(const Eigen::MatrixXd& y_bar, int r) {
    int n = static_cast<int>(y_bar.rows());
    int e = static_cast<int>(y_bar.cols());
    if (r < 1) throw ConfigError("rank r must be >= 1");
    if (r > std::min(n, e)) throw RankError("rank r exceeds matrix dimensions");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(y_bar, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    if (sv(0) <= 0.0 || sv(r - 1) / sv(0) <= 1e-10)
        throw RankError("matrix is rank deficient below requested rank");
    Eigen::MatrixXd u = svd.matrixU().leftCols(r);
    Eigen::MatrixXd v = svd.matrixV().leftCols(r);
    fix_factor_signs(u, v);
    CanonicalDecomposition d;
    double root_n = std::sqrt(static_cast<double>(n));
    d.loadings = root_n * u;
    d.factors = v * sv.head(r).asDiagonal() / root_n;
    return d;
}

namespace {

bool parse_bool(const std::string& value, const std::string& key) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw ConfigError("invalid boolean for " + key + ": '" + value + "'");
}

std::vector<std::string> split_cells(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

std::string trim_ws(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

PanelLayout panel_layout_from_pairs(const std::map<std::string, std::string>& kv) {
    PanelLayout layout;
    for (const auto& [key, value] : kv) {
        if (key == "orientation") {
            if (value == "units-by-epochs")
                layout.orientation = PanelLayout::Orientation::UnitsByEpochs;
            else if (value == "epochs-by-units")
                layout.orientation = PanelLayout::Orientation::EpochsByUnits;
            else
                throw ConfigError("invalid orientation: '" + value + "'");
        } else if (key == "delimiter") {
            if (value == "tab" || value == "\\t") layout.delimiter = '\t';
            else if (value.size() == 1) layout.delimiter = value[0];
            else throw ConfigError("delimiter must be one character or 'tab'");
        } else if (key == "has_header") {
            layout.has_header = parse_bool(value, key);
        } else if (key == "T0") {
            int t0 = 0;
            auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), t0);
            if (ec != std::errc() || p != value.data() + value.size() || t0 < 0)
                throw ConfigError("invalid T0: '" + value + "'");
            layout.T0 = t0;
        } else {
            throw ConfigError("unknown layout key: '" + key + "'");
        }
    }
    return layout;
}

PanelLayout parse_panel_layout(const std::string& path) {
    return panel_layout_from_pairs(parse_key_value_file(path));
}

IngestedPanel ingest_panel_csv(const std::string& path, const PanelLayout& layout) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open panel file: " + path);
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::string line;
    size_t width = 0;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (lineno == 1 && layout.has_header) {
            for (const std::string& cell : split_cells(line, layout.delimiter))
                header.push_back(trim_ws(cell));
            width = header.size();
            continue;
        }
        if (trim_ws(line).empty() && rows.empty() && header.empty()) continue;
        std::vector<std::string> cells = split_cells(line, layout.delimiter);
        if (width == 0) width = cells.size();
        if (cells.size() != width)
            throw DataError("line " + std::to_string(lineno) + ": has " +
                            std::to_string(cells.size()) + " cells, expected " +
                            std::to_string(width));
        std::vector<double> parsed(width);
        for (size_t c = 0; c < width; ++c) {
            std::string cell = trim_ws(cells[c]);
            if (cell.empty())
                throw DataError("line " + std::to_string(lineno) + ", column " +
                                std::to_string(c + 1) + ": missing value");
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size())
                throw DataError("line " + std::to_string(lineno) + ", column " +
                                std::to_string(c + 1) + ": non-numeric cell '" + cell + "'");
            if (!std::isfinite(v))
                throw DataError("line " + std::to_string(lineno) + ", column " +
                                std::to_string(c + 1) + ": non-finite cell '" + cell + "'");
            parsed[c] = v;
        }
        rows.push_back(std::move(parsed));
    }
    if (rows.empty()) throw DataError("panel file has no data rows: " + path);

    Eigen::MatrixXd m(rows.size(), width);
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t c = 0; c < width; ++c) m(i, c) = rows[i][c];

    IngestedPanel out;
    if (layout.orientation == PanelLayout::Orientation::EpochsByUnits) {
        out.obs = m.transpose();
        if (!header.empty()) out.unit_ids = header;
    } else {
        out.obs = std::move(m);
    }
    if (out.unit_ids.empty())
        for (int i = 0; i < out.obs.rows(); ++i) out.unit_ids.push_back(std::to_string(i));
    if (static_cast<int>(out.unit_ids.size()) != out.obs.rows())
        throw DataError("header width does not match unit count");
    return out;
}

double residual_noise_scale(const Eigen::MatrixXd& obs, int r) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(obs);
    const Eigen::VectorXd& sv = svd.singularValues();
    double ssq = 0.0;
    for (int i = r; i < sv.size(); ++i) ssq += sv(i) * sv(i);
    return std::sqrt(ssq / (static_cast<double>(obs.rows()) * static_cast<double>(obs.cols())));
}

}  // namespace scts
