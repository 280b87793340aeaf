#include "scts/bench.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "scts/errors.hpp"
#include "scts/estimation.hpp"
#include "scts/keyvalue.hpp"

namespace scts {

namespace {

constexpr int kSchemaVersion = 1;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using nlohmann::json;

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string hex64(uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// File-name-safe tau label: -1.5 -> m1p5, 2 -> 2.
std::string tau_label(double tau) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", tau);
    std::string s(buf);
    for (char& c : s) {
        if (c == '-') c = 'm';
        else if (c == '.') c = 'p';
    }
    return s;
}

double parse_double_strict(const std::string& value, const std::string& key) {
    try {
        size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + value + "'");
    }
}

int parse_int_strict(const std::string& value, const std::string& key) {
    int v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw ConfigError("invalid integer for " + key + ": '" + value + "'");
    return v;
}

uint64_t parse_u64_strict(const std::string& value, const std::string& key) {
    uint64_t v = 0;
    auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
        throw ConfigError("invalid seed for " + key + ": '" + value + "'");
    return v;
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : value) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else if (!isspace(static_cast<unsigned char>(c))) {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write output file: " + path.string());
    return f;
}

}  // namespace

void BenchmarkConfig::validate() const {
    if (instances < 1) throw ConfigError("instances must be >= 1");
    if (designs.empty()) throw ConfigError("designs must be non-empty");
    if (tau_values.empty()) throw ConfigError("tau_values must be non-empty");
    if (r < 1) throw ConfigError("rank r must be >= 1");
    if (rho <= 0.0) throw ConfigError("rho must be > 0");
    if (refresh_every < 1) throw ConfigError("refresh_every must be >= 1");
    if (beta_mode == BetaSchedule::Mode::Scaled && beta_scale <= 0.0)
        throw ConfigError("beta_scale must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in (0,1]");
    if (k < 1) throw ConfigError("k must be >= 1");
    if (scenario == Scenario::Synthetic) {
        if (n < r) throw ConfigError("n must be >= r");
        if (T0 < 1) throw ConfigError("T0 must be >= 1 (weights need pre-treatment data)");
        if (T < 1) throw ConfigError("T must be >= 1");
        if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
    } else {
        if (data_path.empty()) throw ConfigError("semi_synthetic scenario needs data_path");
    }
}

BenchmarkConfig benchmark_config_from_pairs(const std::map<std::string, std::string>& kv) {
    BenchmarkConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "scenario") {
            if (value == "synthetic") cfg.scenario = Scenario::Synthetic;
            else if (value == "semi_synthetic") cfg.scenario = Scenario::SemiSynthetic;
            else throw ConfigError("unknown scenario: '" + value + "'");
        } else if (key == "n") cfg.n = parse_int_strict(value, key);
        else if (key == "r") cfg.r = parse_int_strict(value, key);
        else if (key == "T0") cfg.T0 = parse_int_strict(value, key);
        else if (key == "T") cfg.T = parse_int_strict(value, key);
        else if (key == "sigma") cfg.sigma = parse_double_strict(value, key);
        else if (key == "tau_values") {
            cfg.tau_values.clear();
            for (const std::string& part : split_list(value))
                cfg.tau_values.push_back(parse_double_strict(part, key));
        } else if (key == "designs") {
            cfg.designs.clear();
            for (const std::string& part : split_list(value))
                cfg.designs.push_back(parse_design_kind(part));
        } else if (key == "instances") cfg.instances = parse_int_strict(value, key);
        else if (key == "base_seed") cfg.base_seed = parse_u64_strict(value, key);
        else if (key == "beta_mode") {
            if (value == "theoretical") cfg.beta_mode = BetaSchedule::Mode::Theoretical;
            else if (value == "scaled") cfg.beta_mode = BetaSchedule::Mode::Scaled;
            else throw ConfigError("beta_mode must be theoretical or scaled");
        } else if (key == "beta_scale") cfg.beta_scale = parse_double_strict(value, key);
        else if (key == "rho") cfg.rho = parse_double_strict(value, key);
        else if (key == "refresh_every") cfg.refresh_every = parse_int_strict(value, key);
        else if (key == "output_dir") cfg.output_dir = value;
        else if (key == "data_path") cfg.data_path = value;
        else if (key == "layout_path") cfg.layout_path = value;
        else if (key == "snr_list") {
            cfg.snr_list.clear();
            for (const std::string& part : split_list(value))
                cfg.snr_list.push_back(parse_double_strict(part, key));
        } else if (key == "k") cfg.k = parse_int_strict(value, key);
        else if (key == "alpha") cfg.alpha = parse_double_strict(value, key);
        else throw ConfigError("unknown benchmark config key: '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

BenchmarkConfig parse_benchmark_config(const std::string& path) {
    BenchmarkConfig cfg = benchmark_config_from_pairs(parse_key_value_file(path));
    if (const char* env = std::getenv("SCTS_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    return cfg;
}

uint64_t benchmark_config_hash(const BenchmarkConfig& c) {
    // output_dir is deliberately excluded: it locates results, it is not part
    // of the run recipe.
    SeedHasher h(0xbe9cbe9cULL);
    h.mix(static_cast<int>(c.scenario)).mix(c.n).mix(c.r).mix(c.T0).mix(c.T).mix(c.sigma);
    h.mix(static_cast<uint64_t>(c.tau_values.size()));
    for (double tau : c.tau_values) h.mix(tau);
    h.mix(std::string_view(c.data_path)).mix(std::string_view(c.layout_path));
    h.mix(static_cast<uint64_t>(c.designs.size()));
    for (DesignKind d : c.designs) h.mix(static_cast<int>(d));
    h.mix(c.instances).mix(c.base_seed).mix(static_cast<int>(c.beta_mode));
    h.mix(c.beta_scale).mix(c.rho).mix(c.refresh_every);
    h.mix(static_cast<uint64_t>(c.snr_list.size()));
    for (double s : c.snr_list) h.mix(s);
    h.mix(c.k).mix(c.alpha);
    return h.digest();
}

namespace {

struct BuiltInstance {
    std::unique_ptr<PanelGenerator> gen;
    double tau_star = 0.0;
    BetaSchedule beta;
    uint64_t noise_seed = 0;
};

struct SemiSource {
    IngestedPanel panel;
    PanelLayout layout;
    double resid_sigma = 0.0;
};

SemiSource load_semi_source(const BenchmarkConfig& cfg) {
    SemiSource src;
    src.layout = cfg.layout_path.empty() ? PanelLayout{} : parse_panel_layout(cfg.layout_path);
    src.panel = ingest_panel_csv(cfg.data_path, src.layout);
    if (src.layout.T0 < 0)
        throw ConfigError("semi_synthetic scenario needs T0 in the layout config");
    if (src.layout.T0 < 1 || src.layout.T0 >= src.panel.obs.cols())
        throw ConfigError("layout T0 must leave both pre-treatment and treatment epochs");
    src.resid_sigma = residual_noise_scale(src.panel.obs, cfg.r);
    return src;
}

// tau_entry is an absolute effect for synthetic instances and a multiple of
// the panel's residual noise scale for semi-synthetic ones.
BuiltInstance build_instance(const BenchmarkConfig& cfg, std::string_view group,
                             double tau_entry, int inst, const SemiSource* semi) {
    BuiltInstance built;
    if (cfg.scenario == Scenario::Synthetic) {
        uint64_t model_seed = stable_hash(cfg.base_seed, group, tau_entry, inst,
                                          std::string_view("model"));
        built.noise_seed = stable_hash(cfg.base_seed, group, tau_entry, inst,
                                       std::string_view("noise"));
        FactorModelSpec spec = draw_factor_model(cfg.n, cfg.r, cfg.T0, cfg.T, cfg.sigma,
                                                 tau_entry, model_seed);
        built.tau_star = tau_entry;
        built.beta.sigma = cfg.sigma;
        built.beta.B = factor_norm_bound_c2(spec.factors);
        built.beta.r = cfg.r;
        built.beta.n = cfg.n;
        built.beta.T = cfg.T;
        built.beta.lambda_norm_plus_tau = spec.lambda_star.norm() + std::abs(tau_entry);
        built.gen = generate_instance(spec, built.noise_seed).generator;
    } else {
        int rows = static_cast<int>(semi->panel.obs.rows());
        int cols = static_cast<int>(semi->panel.obs.cols());
        uint64_t unit_seed =
            stable_hash(cfg.base_seed, group, tau_entry, inst, std::string_view("unit"));
        int unit = static_cast<int>(unit_seed % static_cast<uint64_t>(rows));
        built.noise_seed = unit_seed;
        built.tau_star = tau_entry * semi->resid_sigma;
        built.gen = make_semi_synthetic(semi->panel.obs, unit, built.tau_star,
                                        semi->layout.T0);
        // Observable surrogates: noise scale from the rank-r residual, context
        // bound from the pre-treatment PCA factors, loading bound sqrt(r)+1.
        Eigen::MatrixXd donor_pre(rows - 1, semi->layout.T0);
        for (int t = 0; t < semi->layout.T0; ++t)
            donor_pre.col(t) = built.gen->donor_column(t);
        LatentEstimate pre = estimate_factors(donor_pre, cfg.r);
        built.beta.sigma = semi->resid_sigma;
        built.beta.B = factor_norm_bound_c2(pre.Z_hat);
        built.beta.r = cfg.r;
        built.beta.n = rows - 1;
        built.beta.T = cols - semi->layout.T0;
        built.beta.lambda_norm_plus_tau = std::sqrt(static_cast<double>(cfg.r)) + 1.0;
    }
    built.beta.mode = cfg.beta_mode;
    built.beta.scale = cfg.beta_scale;
    return built;
}

ScWeights pre_treatment_weights(const PanelGenerator& gen) {
    int t0 = gen.pre_treatment();
    Eigen::MatrixXd donor_pre(gen.donors(), t0);
    Eigen::VectorXd unit_pre(t0);
    for (int t = 0; t < t0; ++t) {
        donor_pre.col(t) = gen.donor_column(t);
        unit_pre(t) = gen.unit_value(t, 0);
    }
    return fit_sc_weights(donor_pre, unit_pre);
}

double thresholded_ridge(const ExperimentResult& res) {
    int T = res.treatment_epochs();
    int m = static_cast<int>(res.treated_epochs.size());
    return 2 * m >= T ? res.final_fit.tau_hat : 0.0;
}

std::map<std::string, double> compute_estimates(const ExperimentResult& res,
                                                const ScWeights& w) {
    std::map<std::string, double> est;
    int T = res.treatment_epochs();
    switch (res.config.kind) {
        case DesignKind::Scts:
        case DesignKind::Ucb:
            est["ridge_thresholded"] = thresholded_ridge(res);
            est["sc_adaptive"] = estimate_scts(res.panel, w, T).value;
            break;
        case DesignKind::Fixed:
            est["sc"] = estimate_sc(res.panel, w).value;
            est["ridge_thresholded"] = thresholded_ridge(res);
            break;
        case DesignKind::Switchback:
            est["ridge_raw"] = res.final_fit.tau_hat;
            try {
                est["diff_in_means"] = estimate_diff_in_means(res.panel).value;
            } catch (const ConfigError&) {
                est["diff_in_means"] = kNaN;   // single-valued action draw
            }
            break;
    }
    return est;
}

InstanceRecord record_from_result(const ExperimentResult& res, double tau, int inst,
                                  const ScWeights& w) {
    InstanceRecord rec;
    rec.design = res.config.kind;
    rec.tau = tau;
    rec.instance_index = inst;
    rec.noise_seed = res.noise_seed;
    rec.sampler_seed = res.config.sampler_seed;
    rec.actions.assign(res.panel.actions.begin() + res.panel.pre_treatment,
                       res.panel.actions.end());
    for (const EpochFit& f : res.fits) rec.tau_hats.push_back(f.tau_hat);
    rec.estimates = compute_estimates(res, w);
    rec.M_size = static_cast<int>(res.treated_epochs.size());
    rec.suboptimal_count = res.regret.suboptimal_count;
    rec.ell_sum = res.ell_sum;
    rec.ell_B = res.ell_B;
    rec.ell_bound = elliptical_potential_bound(res.ell_B, res.config.rho,
                                               res.config.rank + 1,
                                               res.treatment_epochs());
    return rec;
}

json record_to_json(const InstanceRecord& rec) {
    return json{{"design", design_kind_name(rec.design)},
                {"tau", rec.tau},
                {"instance", rec.instance_index},
                {"seeds", {{"noise", rec.noise_seed}, {"sampler", rec.sampler_seed}}},
                {"actions", rec.actions},
                {"tau_hats", rec.tau_hats},
                {"estimates", rec.estimates},
                {"M", rec.M_size},
                {"suboptimal", rec.suboptimal_count},
                {"ell", {{"sum", rec.ell_sum}, {"B", rec.ell_B}, {"bound", rec.ell_bound}}}};
}

InstanceRecord record_from_json(const json& j) {
    InstanceRecord rec;
    rec.design = parse_design_kind(j.at("design").get<std::string>());
    rec.tau = j.at("tau").get<double>();
    rec.instance_index = j.at("instance").get<int>();
    rec.noise_seed = j.at("seeds").at("noise").get<uint64_t>();
    rec.sampler_seed = j.at("seeds").at("sampler").get<uint64_t>();
    rec.actions = j.at("actions").get<std::vector<int>>();
    rec.tau_hats = j.at("tau_hats").get<std::vector<double>>();
    for (const auto& [key, value] : j.at("estimates").items())
        rec.estimates[key] = value.is_null() ? kNaN : value.get<double>();
    rec.M_size = j.at("M").get<int>();
    rec.suboptimal_count = j.at("suboptimal").get<int>();
    rec.ell_sum = j.at("ell").at("sum").get<double>();
    rec.ell_B = j.at("ell").at("B").get<double>();
    rec.ell_bound = j.at("ell").at("bound").get<double>();
    return rec;
}

void write_provenance_line(std::ofstream& f, uint64_t config_hash, uint64_t base_seed,
                           const std::string& extra = "") {
    f << "# schema_version=" << kSchemaVersion << " config_hash=" << hex64(config_hash)
      << " base_seed=" << base_seed;
    if (!extra.empty()) f << " " << extra;
    f << "\n";
}

}  // namespace

std::vector<InstanceRecord> load_instance_records(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot open records file: " + path);
    std::vector<InstanceRecord> records;
    std::string line;
    try {
        while (std::getline(f, line)) {
            if (line.empty()) continue;
            records.push_back(record_from_json(json::parse(line)));
        }
    } catch (const json::exception& e) {
        throw DataError(std::string("bad instance record: ") + e.what());
    }
    return records;
}

BenchmarkReport aggregate_records(std::vector<InstanceRecord> records) {
    BenchmarkReport report;
    report.records = std::move(records);

    // Group by (design, tau) in first-seen order.
    std::vector<std::pair<DesignKind, double>> keys;
    std::vector<std::vector<const InstanceRecord*>> groups;
    for (const InstanceRecord& rec : report.records) {
        size_t g = 0;
        for (; g < keys.size(); ++g)
            if (keys[g].first == rec.design && keys[g].second == rec.tau) break;
        if (g == keys.size()) {
            keys.emplace_back(rec.design, rec.tau);
            groups.emplace_back();
        }
        groups[g].push_back(&rec);
        if (rec.ell_B > 0.0 && rec.ell_bound > 0.0) {
            double ratio = rec.ell_sum / rec.ell_bound;
            report.ell_max_ratio = std::max(report.ell_max_ratio, ratio);
            if (rec.ell_sum > rec.ell_bound * (1.0 + 1e-12) + 1e-9) ++report.ell_violations;
        }
    }

    for (size_t g = 0; g < keys.size(); ++g) {
        auto [design, tau] = keys[g];
        const auto& members = groups[g];
        int count = static_cast<int>(members.size());
        int horizon = members.empty() ? 0 : static_cast<int>(members[0]->actions.size());

        double regret_sum = 0.0;
        for (const InstanceRecord* rec : members)
            regret_sum += horizon > 0 ? static_cast<double>(rec->suboptimal_count) / horizon
                                      : 0.0;
        double normalized_regret = tau == 0.0 ? kNaN : regret_sum / count;

        for (const auto& [name, unused] : members[0]->estimates) {
            (void)unused;
            double sq = 0.0;
            int present = 0;
            int sign_correct = 0, sign_total = 0;
            for (const InstanceRecord* rec : members) {
                double v = rec->estimates.at(name);
                if (!std::isfinite(v)) continue;
                double err = v - tau;
                sq += err * err;
                ++present;
                if (tau != 0.0 && (name == "ridge_thresholded" || name == "sc_adaptive")) {
                    bool says_effect = v != 0.0;
                    bool correct = tau > 0.0 ? says_effect : !says_effect;
                    sign_correct += correct ? 1 : 0;
                    ++sign_total;
                }
            }
            BenchRow row;
            row.design = design;
            row.tau = tau;
            row.estimator = name;
            row.instances = count;
            row.normalized_regret = normalized_regret;
            double rmse = present > 0 ? std::sqrt(sq / present) : kNaN;
            row.rmse_relative = tau != 0.0 ? rmse / std::abs(tau) : rmse;
            row.sign_accuracy =
                sign_total > 0 ? static_cast<double>(sign_correct) / sign_total : kNaN;
            report.rows.push_back(std::move(row));
        }

        DesignSeries series;
        series.design = design;
        series.tau = tau;
        bool have_fits = true;
        for (const InstanceRecord* rec : members)
            have_fits = have_fits && static_cast<int>(rec->tau_hats.size()) == horizon;
        int optimal = tau >= 0.0 ? 1 : 0;
        std::vector<int> cum(members.size(), 0);
        for (int t = 1; t <= horizon; ++t) {
            SeriesPoint pt;
            pt.t = t;
            double frac = 0.0, sq = 0.0;
            for (size_t i = 0; i < members.size(); ++i) {
                if (members[i]->actions[t - 1] != optimal) ++cum[i];
                frac += static_cast<double>(cum[i]) / t;
                if (have_fits) {
                    double err = members[i]->tau_hats[t - 1] - tau;
                    sq += err * err;
                }
            }
            pt.regret_frac = frac / count;
            pt.rmse_rel = have_fits && tau != 0.0 ? std::sqrt(sq / count) / std::abs(tau)
                                                  : kNaN;
            series.points.push_back(pt);
        }
        report.series.push_back(std::move(series));
    }
    return report;
}

ExperimentResult run_single(const BenchmarkConfig& config, DesignKind design,
                            double tau_entry, int instance_index) {
    config.validate();
    SemiSource semi;
    const SemiSource* semi_p = nullptr;
    if (config.scenario == Scenario::SemiSynthetic) {
        semi = load_semi_source(config);
        semi_p = &semi;
    }
    std::string_view group =
        config.scenario == Scenario::Synthetic ? "synthetic" : "semi_synthetic";
    BuiltInstance built = build_instance(config, group, tau_entry, instance_index, semi_p);
    DesignConfig dc;
    dc.kind = design;
    dc.rank = config.r;
    dc.rho = config.rho;
    dc.beta = built.beta;
    dc.refresh_every = config.refresh_every;
    dc.sampler_seed = stable_hash(config.base_seed, group, design_kind_name(design),
                                  tau_entry, instance_index, std::string_view("sampler"));
    ExperimentResult res = run_experiment(dc, *built.gen, built.tau_star);
    res.noise_seed = built.noise_seed;
    return res;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    config.validate();
    SemiSource semi;
    const SemiSource* semi_p = nullptr;
    if (config.scenario == Scenario::SemiSynthetic) {
        semi = load_semi_source(config);
        semi_p = &semi;
    }
    std::string_view group =
        config.scenario == Scenario::Synthetic ? "synthetic" : "semi_synthetic";

    std::vector<InstanceRecord> records;
    for (double tau_entry : config.tau_values) {
        for (int inst = 0; inst < config.instances; ++inst) {
            BuiltInstance built = build_instance(config, group, tau_entry, inst, semi_p);
            DonorTrace trace(*built.gen, config.r);
            ScWeights w = pre_treatment_weights(*built.gen);
            for (DesignKind design : config.designs) {
                DesignConfig dc;
                dc.kind = design;
                dc.rank = config.r;
                dc.rho = config.rho;
                dc.beta = built.beta;
                dc.refresh_every = config.refresh_every;
                dc.sampler_seed =
                    stable_hash(config.base_seed, group, design_kind_name(design),
                                tau_entry, inst, std::string_view("sampler"));
                ExperimentResult res =
                    run_experiment(dc, *built.gen, built.tau_star, &trace);
                res.noise_seed = built.noise_seed;
                records.push_back(record_from_result(res, built.tau_star, inst, w));
            }
        }
    }

    BenchmarkReport report = aggregate_records(std::move(records));
    report.config_hash = benchmark_config_hash(config);
    report.base_seed = config.base_seed;

    std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);

    {
        std::ofstream f = open_output(dir / "instances.jsonl");
        for (const InstanceRecord& rec : report.records) f << record_to_json(rec).dump() << "\n";
    }
    {
        std::ofstream f = open_output(dir / "benchmark_summary.csv");
        write_provenance_line(f, report.config_hash, report.base_seed);
        f << "design,tau,estimator,instances,normalized_regret,rmse_relative,sign_accuracy\n";
        for (const BenchRow& row : report.rows) {
            f << design_kind_name(row.design) << "," << format_double(row.tau) << ","
              << row.estimator << "," << row.instances << ","
              << format_double(row.normalized_regret) << ","
              << format_double(row.rmse_relative) << ","
              << format_double(row.sign_accuracy) << "\n";
        }
    }
    {
        json meta{{"schema_version", kSchemaVersion},
                  {"config_hash", hex64(report.config_hash)},
                  {"base_seed", report.base_seed},
                  {"ell_violations", report.ell_violations},
                  {"ell_max_ratio", report.ell_max_ratio}};
        std::ofstream f = open_output(dir / "benchmark_meta.json");
        f << meta.dump(2) << "\n";
    }
    return report;
}

std::vector<std::string> emit_series(const BenchmarkReport& report,
                                     const std::string& out_dir) {
    std::filesystem::path dir(out_dir);
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    for (const DesignSeries& series : report.series) {
        std::string name = "series_" + design_kind_name(series.design) + "_tau_" +
                           tau_label(series.tau) + ".csv";
        std::ofstream f = open_output(dir / name);
        write_provenance_line(f, report.config_hash, report.base_seed,
                              "design=" + design_kind_name(series.design) +
                                  " tau=" + format_double(series.tau));
        f << "t,regret_frac,rmse_rel\n";
        for (const SeriesPoint& pt : series.points)
            f << pt.t << "," << format_double(pt.regret_frac) << ","
              << format_double(pt.rmse_rel) << "\n";
        paths.push_back((dir / name).string());
    }
    return paths;
}

InferenceReport run_inference_benchmark(const BenchmarkConfig& config,
                                        const RerandomizationConfig& rerand,
                                        const std::vector<double>& snr_list) {
    config.validate();
    rerand.validate();
    if (snr_list.empty()) throw ConfigError("snr_list must be non-empty");
    SemiSource semi;
    const SemiSource* semi_p = nullptr;
    if (config.scenario == Scenario::SemiSynthetic) {
        semi = load_semi_source(config);
        semi_p = &semi;
    }

    InferenceReport report;
    report.config_hash = benchmark_config_hash(config);
    std::filesystem::path dir(config.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream records = open_output(dir / "inference_instances.jsonl");

    for (double snr : snr_list) {
        double tau_entry = config.scenario == Scenario::Synthetic ? snr * config.sigma : snr;
        int covered = 0, powered = 0;
        for (int inst = 0; inst < config.instances; ++inst) {
            BuiltInstance built = build_instance(config, "infer", tau_entry, inst, semi_p);
            DonorTrace trace(*built.gen, config.r);
            DesignConfig dc;
            dc.kind = DesignKind::Scts;
            dc.rank = config.r;
            dc.rho = config.rho;
            dc.beta = built.beta;
            dc.refresh_every = config.refresh_every;
            dc.sampler_seed = stable_hash(config.base_seed, std::string_view("infer"), snr,
                                          inst, std::string_view("sampler"));
            ExperimentResult history =
                run_experiment(dc, *built.gen, built.tau_star, &trace);
            history.noise_seed = built.noise_seed;

            RerandomizationConfig rc = rerand;
            rc.base_seed = stable_hash(config.base_seed, std::string_view("infer"), snr,
                                       inst, std::string_view("replays"));
            TestReport at_truth = rerandomize_test(history, built.tau_star, rc, &trace);
            TestReport at_zero = rerandomize_test(history, 0.0, rc, &trace);
            if (!at_truth.rejected) ++covered;
            if (at_zero.rejected) ++powered;

            records << json{{"snr", snr},
                            {"instance", inst},
                            {"tau_star", built.tau_star},
                            {"seeds",
                             {{"noise", built.noise_seed},
                              {"sampler", dc.sampler_seed},
                              {"replays", rc.base_seed}}},
                            {"covered", !at_truth.rejected},
                            {"powered", at_zero.rejected},
                            {"p_at_truth", at_truth.p_value},
                            {"p_at_zero", at_zero.p_value},
                            {"M", history.treated_epochs.size()}}
                            .dump()
                    << "\n";
        }
        InferenceRow row;
        row.snr = snr;
        row.instances = config.instances;
        row.k = rerand.k;
        row.alpha = rerand.significance;
        row.coverage = static_cast<double>(covered) / config.instances;
        row.power = static_cast<double>(powered) / config.instances;
        report.rows.push_back(row);
    }

    {
        std::ofstream f = open_output(dir / "inference_summary.csv");
        write_provenance_line(f, report.config_hash, config.base_seed);
        f << "snr,instances,k,alpha,coverage,power\n";
        for (const InferenceRow& row : report.rows)
            f << format_double(row.snr) << "," << row.instances << "," << row.k << ","
              << format_double(row.alpha) << "," << format_double(row.coverage) << ","
              << format_double(row.power) << "\n";
    }
    return report;
}

}  // namespace scts
