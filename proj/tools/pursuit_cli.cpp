#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pursuit/harness.hpp"
#include "pursuit/kernels.hpp"
#include "pursuit/stats.hpp"

namespace {

namespace fs = std::filesystem;
using pursuit::harness::ExperimentConfig;

struct CommonOpts {
    std::string config_path;
    std::string profile = "desk";
    std::string out_dir = "out";
    std::string kernels = "auto";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file (overlays the profile)");
    cmd->add_option("--profile", opts.profile, "Built-in profile: desk or paper")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Master seed override")->each([&](const std::string&) {
        opts.seed_set = true;
    });
    cmd->add_option("--kernels", opts.kernels, "Kernel backend: auto or scalar")
        ->check(CLI::IsMember({"auto", "scalar"}));
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
    ExperimentConfig cfg = pursuit::harness::profile_by_name(opts.profile);
    if (!opts.config_path.empty())
        cfg = pursuit::harness::load_config_file(opts.config_path, cfg);
    if (opts.seed_set) cfg.seed = opts.seed;
    cfg.validate();
    return cfg;
}

void apply_kernels(const std::string& mode) {
    if (mode == "scalar") pursuit::kernels::force_backend(pursuit::kernels::Backend::Scalar);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Insurance portfolio-pursuit simulator and experiment harness"};
    app.require_subcommand(1);

    // run
    CommonOpts run_opts;
    std::vector<std::string> run_methods;
    bool sequential = false;
    CLI::App* run_cmd = app.add_subcommand("run", "Run the full paired-trial experiment");
    add_common(run_cmd, run_opts);
    run_cmd->add_option("--method", run_methods,
                        "Restrict to these methods (pipeline, baseline, rl)");
    run_cmd->add_flag("--sequential", sequential, "Fully serial reference execution");

    // trial
    CommonOpts trial_opts;
    int trial_index = 0;
    std::string trial_method = "rl";
    CLI::App* trial_cmd = app.add_subcommand("trial", "Run a single trial of one method");
    add_common(trial_cmd, trial_opts);
    trial_cmd->add_option("--trial", trial_index, "Trial index (0-based)");
    trial_cmd->add_option("--method", trial_method, "Method: pipeline, baseline, or rl")
        ->check(CLI::IsMember({"pipeline", "baseline", "rl"}));

    // stats
    std::string file_a, col_a, file_b, col_b, alt = "two-sided";
    CLI::App* stats_cmd = app.add_subcommand("stats", "Compare two CSV columns");
    stats_cmd->add_option("--file-a", file_a, "First CSV file")->required();
    stats_cmd->add_option("--col-a", col_a, "Column in the first file")->required();
    stats_cmd->add_option("--file-b", file_b, "Second CSV file")->required();
    stats_cmd->add_option("--col-b", col_b, "Column in the second file")->required();
    stats_cmd->add_option("--alt", alt, "Alternative: greater, less, or two-sided")
        ->check(CLI::IsMember({"greater", "less", "two-sided"}));

    // report
    std::string report_in, report_out;
    CLI::App* report_cmd =
        app.add_subcommand("report", "Regenerate aggregate, report, and plot data");
    report_cmd->add_option("--in", report_in, "Summary directory with steps.csv/trials.csv")
        ->required();
    report_cmd->add_option("--out", report_out, "Output directory (default: same as --in)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) {
            apply_kernels(run_opts.kernels);
            ExperimentConfig cfg = resolve_config(run_opts);
            if (!run_methods.empty()) cfg.methods = run_methods;
            cfg.validate();
            const auto result = pursuit::harness::run_experiment(cfg, sequential);
            pursuit::harness::write_experiment_outputs(cfg, result, run_opts.out_dir);
            std::cout << "wrote " << run_opts.out_dir << " (" << result.trials.size()
                      << " trial runs, " << result.failures << " failures)\n";
            return result.failures > 0 ? 3 : 0;
        }
        if (*trial_cmd) {
            apply_kernels(trial_opts.kernels);
            ExperimentConfig cfg = resolve_config(trial_opts);
            cfg.dump_value_dataset = true;
            const auto tr = pursuit::harness::run_trial(cfg, trial_index, trial_method);
            fs::create_directories(trial_opts.out_dir);
            const std::string stem =
                trial_opts.out_dir + "/trial" + std::to_string(trial_index) + "_" + trial_method;
            {
                std::ofstream out(stem + "_manifest.json");
                out << tr.manifest;
            }
            {
                std::ofstream out(stem + "_burnin.csv");
                out << tr.burnin_csv;
            }
            {
                std::ofstream out(stem + "_models.pzoo");
                out << tr.models_blob;
            }
            if (!tr.value_blob.empty()) {
                std::ofstream out(stem + "_value.pzoo");
                out << tr.value_blob;
            }
            if (!tr.value_dataset.rows.empty()) {
                std::ofstream out(stem + "_values.csv");
                tr.value_dataset.to_csv(out);
            }
            std::ofstream steps(stem + "_steps.csv");
            steps << "epoch,t,profit,loss,reward\n";
            for (const auto& ep : tr.epochs) {
                for (std::size_t t = 0; t < ep.profit.size(); ++t) {
                    steps << ep.epoch << ',' << (t + 1) << ',' << ep.profit[t] << ','
                          << ep.loss[t] << ',' << ep.reward[t] << "\n";
                }
            }
            std::cout << "wrote " << stem << "_*\n";
            return 0;
        }
        if (*stats_cmd) {
            const auto a = pursuit::harness::read_csv_column(file_a, col_a);
            const auto b = pursuit::harness::read_csv_column(file_b, col_b);
            pursuit::stats::Alternative alternative = pursuit::stats::Alternative::TwoSided;
            if (alt == "greater") alternative = pursuit::stats::Alternative::Greater;
            if (alt == "less") alternative = pursuit::stats::Alternative::Less;
            const auto mw = pursuit::stats::mann_whitney_u(a, b, alternative);
            std::cout << "n_a=" << a.size() << " n_b=" << b.size() << "\n";
            std::cout << "mann_whitney U=" << mw.u << " p=" << mw.p << " ("
                      << (mw.exact ? "exact" : "normal approx") << ", " << alt << ")\n";
            if (a.size() >= 2 && b.size() >= 2)
                std::cout << "cohens_d=" << pursuit::stats::cohens_d(a, b) << "\n";
            std::cout << "cles=" << pursuit::stats::cles(a, b) << "\n";
            return 0;
        }
        if (*report_cmd) {
            if (report_out.empty()) report_out = report_in;
            pursuit::harness::write_report_from_dir(report_in, report_out);
            std::cout << "wrote " << report_out << "/{aggregate.csv,report.txt,fig1_data.csv}\n";
            return 0;
        }
    } catch (const pursuit::harness::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
