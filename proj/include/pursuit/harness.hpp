#ifndef PURSUIT_HARNESS_HPP
#define PURSUIT_HARNESS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "pursuit/baseline.hpp"
#include "pursuit/market.hpp"
#include "pursuit/pipeline.hpp"
#include "pursuit/portfolio.hpp"
#include "pursuit/rl.hpp"

namespace pursuit::harness {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Experiment parameters. Config files are JSON with these field names in
/// snake_case (T -> "t", I -> "i", N -> "n", J -> "j", J+ -> "j_plus").
struct ExperimentConfig {
    int T = 1000;
    int burnin_epochs = 6;
    int test_epochs = 8;
    int trials = 24;
    double lambda = 2000.0;
    int indicators = 5; // I
    int competitors = 5;
    double exploration_rate = 0.12;
    int training_window_epochs = 4;
    double sigma = 0.9;
    int N = 500;
    int J = 24;
    int J_plus = 120;
    std::uint64_t seed = 20250501;
    double lapse_q = 0.0;
    std::vector<std::string> methods{"pipeline", "baseline", "rl"};
    std::string profile = "paper";
    market::EnvParams env;

    // Value-function fit sizes (fixed by design; exposed for tests).
    int v_hidden = 32;
    double v_learning_rate = 0.01;
    int v_epochs = 300;
    int v_batch = 64;

    /// Keep the per-trial value-estimate dataset in the result (the `trial`
    /// subcommand sets this; full runs drop it to bound memory).
    bool dump_value_dataset = false;

    void validate() const; // throws ConfigError
};

ExperimentConfig desk_profile();
ExperimentConfig paper_profile();
ExperimentConfig profile_by_name(const std::string& name);
/// Overlay a JSON config file onto a base profile.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base);
std::string config_json(const ExperimentConfig& cfg);

struct EpochSeries {
    int epoch = 1; // testing epoch index, 1-based
    std::vector<double> profit; // cumulative
    std::vector<double> loss;   // lambda * L(rho_t, target)
    std::vector<double> reward; // profit - loss
    double final_profit = 0.0, final_loss = 0.0, final_reward = 0.0;
};

struct TrialResult {
    int trial = 0;
    std::string method;
    bool failed = false;
    std::string error;
    std::vector<EpochSeries> epochs;
    std::string burnin_csv; // interaction log of all burn-in epochs
    std::string manifest;   // JSON
    std::string models_blob;
    std::string value_blob;                 // rl only
    rl::ValueEstimateDataset value_dataset; // rl only
    baseline::BaselineParams chosen_baseline;
    portfolio::TargetPortfolio target;
};

/// One method on one paired trial. Everything up to the end of burn-in is a
/// function of (config, trial) only, so methods sharing a trial share burn-in
/// byte for byte.
TrialResult run_trial(const ExperimentConfig& cfg, int trial_index, const std::string& method);

struct ExperimentResult {
    std::vector<TrialResult> trials;
    int failures = 0;
};

/// All trials x methods. Trials run in parallel unless `sequential`; outputs
/// are ordered canonically either way.
ExperimentResult run_experiment(const ExperimentConfig& cfg, bool sequential);

/// steps.csv, trials.csv, per-trial manifests/blobs/burn-in logs, config.json,
/// then the derived aggregate.csv / report.txt / fig1_data.csv.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::string& out_dir);

/// Rebuild aggregate.csv, report.txt, and fig1_data.csv from steps.csv and
/// trials.csv found in `summary_dir`. Errors name any missing column.
void write_report_from_dir(const std::string& summary_dir, const std::string& out_dir);

/// CSV helper shared with the stats subcommand; errors name the column.
std::vector<double> read_csv_column(const std::string& path, const std::string& column);

} // namespace pursuit::harness

#endif
