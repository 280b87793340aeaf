#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scts/bench.hpp"
#include "scts/errors.hpp"
#include "scts/policies.hpp"
#include "scts/randomization_inference.hpp"

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw scts::DataError("cannot open file: " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path);
    if (!f) throw scts::DataError("cannot write file: " + path);
    f << text;
}

scts::ExperimentResult load_history(const std::string& path) {
    return scts::experiment_result_from_json(read_file(path));
}

void print_test_report(const scts::TestReport& report) {
    json j{{"tau_null", report.tau_null},
           {"statistic", report.statistic},
           {"p_value", report.p_value},
           {"rejected", report.rejected},
           {"k", report.samples.size()},
           {"samples", report.samples}};
    std::cout << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Synthetically controlled Thompson sampling: simulation, benchmarks "
                 "and randomization inference"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path = "experiment.json";
    std::string history_path;
    std::string records_path;
    std::string out_dir = "plots";
    std::string design_name = "scts";
    double tau_override = 0.0;
    int instance = 0;
    scts::RerandomizationConfig rerand;
    double grid_lo = 0.0, grid_hi = 0.0, grid_step = 0.0;

    CLI::App* sim = app.add_subcommand(
        "simulate", "Run one experiment from a config and write its JSON trace");
    sim->add_option("--config", config_path, "key = value run configuration")->required();
    sim->add_option("--design", design_name, "scts | ucb | fixed | switchback");
    CLI::Option* sim_tau = sim->add_option(
        "--tau", tau_override, "effect override (default: first configured value)");
    sim->add_option("--instance", instance, "instance index for seed derivation");
    sim->add_option("--out", out_path, "output JSON path");

    CLI::App* bench = app.add_subcommand(
        "bench", "Run the benchmark matrix and write summary CSV + per-instance JSONL");
    bench->add_option("--config", config_path, "key = value run configuration")->required();

    CLI::App* infer = app.add_subcommand(
        "infer", "Coverage/power of the re-randomization test per SNR");
    infer->add_option("--config", config_path, "key = value run configuration")->required();

    CLI::App* test = app.add_subcommand(
        "test", "Re-randomization test of a sharp null on a stored experiment");
    test->add_option("--history", history_path, "ExperimentResult JSON path")->required();
    double tau_null = 0.0;
    test->add_option("--tau", tau_null, "null effect to test")->required();
    test->add_option("--k", rerand.k, "replay count");
    test->add_option("--alpha", rerand.significance, "test level");
    test->add_option("--seed", rerand.base_seed, "replay seed base");
    test->add_flag("--two-sided", rerand.two_sided, "fold the one-sided p-value");

    CLI::App* ci = app.add_subcommand(
        "ci", "Invert the re-randomization test into a confidence interval");
    ci->add_option("--history", history_path, "ExperimentResult JSON path")->required();
    ci->add_option("--k", rerand.k, "replay count");
    ci->add_option("--alpha", rerand.significance, "test level");
    ci->add_option("--seed", rerand.base_seed, "replay seed base");
    ci->add_flag("--two-sided", rerand.two_sided, "fold the one-sided p-value");
    CLI::Option* ci_lo = ci->add_option("--lo", grid_lo, "grid lower edge");
    CLI::Option* ci_hi = ci->add_option("--hi", grid_hi, "grid upper edge");
    CLI::Option* ci_step = ci->add_option("--step", grid_step, "grid step");

    CLI::App* plots = app.add_subcommand(
        "emit-plots", "Re-aggregate stored instance records into plot-ready series CSVs");
    plots->add_option("--records", records_path, "instances.jsonl path")->required();
    plots->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) {
            scts::BenchmarkConfig cfg = scts::parse_benchmark_config(config_path);
            scts::DesignKind kind = scts::parse_design_kind(design_name);
            double tau = sim_tau->count() > 0 ? tau_override : cfg.tau_values.front();
            scts::ExperimentResult res = scts::run_single(cfg, kind, tau, instance);
            write_file(out_path, scts::to_json_string(res) + "\n");
            std::cout << "wrote " << out_path << "\n";
        } else if (bench->parsed()) {
            scts::BenchmarkConfig cfg = scts::parse_benchmark_config(config_path);
            scts::BenchmarkReport report = scts::run_benchmark(cfg);
            std::printf("%-12s %8s %-18s %10s %10s %10s\n", "design", "tau", "estimator",
                        "regret", "rmse_rel", "sign_acc");
            for (const scts::BenchRow& row : report.rows)
                std::printf("%-12s %8.3g %-18s %10.4f %10.4f %10.4f\n",
                            scts::design_kind_name(row.design).c_str(), row.tau,
                            row.estimator.c_str(), row.normalized_regret,
                            row.rmse_relative, row.sign_accuracy);
            std::cout << "wrote " << cfg.output_dir << "\n";
        } else if (infer->parsed()) {
            scts::BenchmarkConfig cfg = scts::parse_benchmark_config(config_path);
            scts::RerandomizationConfig rc;
            rc.k = cfg.k;
            rc.significance = cfg.alpha;
            scts::InferenceReport report =
                scts::run_inference_benchmark(cfg, rc, cfg.snr_list);
            std::printf("%8s %10s %10s\n", "snr", "coverage", "power");
            for (const scts::InferenceRow& row : report.rows)
                std::printf("%8.3g %10.4f %10.4f\n", row.snr, row.coverage, row.power);
            std::cout << "wrote " << cfg.output_dir << "\n";
        } else if (test->parsed()) {
            scts::ExperimentResult history = load_history(history_path);
            rerand.validate();
            print_test_report(scts::rerandomize_test(history, tau_null, rerand));
        } else if (ci->parsed()) {
            int grid_opts = (ci_lo->count() ? 1 : 0) + (ci_hi->count() ? 1 : 0) +
                            (ci_step->count() ? 1 : 0);
            if (grid_opts != 0 && grid_opts != 3)
                throw scts::ConfigError("--lo, --hi and --step must be given together");
            if (grid_opts == 3) rerand.grid = scts::GridSpec{grid_lo, grid_hi, grid_step};
            rerand.validate();
            scts::ExperimentResult history = load_history(history_path);
            scts::CiResult res = scts::invert_to_ci(history, rerand);
            json j{{"lo", res.lo},       {"hi", res.hi},
                   {"empty", res.empty}, {"grid", res.grid},
                   {"p_values", res.p_values}, {"accepted", res.accepted}};
            std::cout << j.dump(2) << "\n";
        } else if (plots->parsed()) {
            scts::BenchmarkReport report =
                scts::aggregate_records(scts::load_instance_records(records_path));
            // Provenance travels with the records' sibling meta file when present.
            std::filesystem::path meta_path =
                std::filesystem::path(records_path).parent_path() / "benchmark_meta.json";
            if (std::ifstream meta_in(meta_path); meta_in) {
                json meta = json::parse(meta_in, nullptr, false);
                if (!meta.is_discarded()) {
                    if (meta.contains("config_hash"))
                        report.config_hash = std::stoull(
                            meta["config_hash"].get<std::string>(), nullptr, 16);
                    if (meta.contains("base_seed"))
                        report.base_seed = meta["base_seed"].get<uint64_t>();
                }
            }
            for (const std::string& path : scts::emit_series(report, out_dir))
                std::cout << "wrote " << path << "\n";
        }
    } catch (const scts::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const scts::RankError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const scts::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
