#include "pursuit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "pursuit/serialize.hpp"
#include "pursuit/stats.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace pursuit::harness {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

const std::vector<std::string>& canonical_methods() {
    static const std::vector<std::string> order{"pipeline", "baseline", "rl"};
    return order;
}

int method_rank(const std::string& m) {
    const auto& order = canonical_methods();
    for (std::size_t i = 0; i < order.size(); ++i)
        if (order[i] == m) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> normalize_methods(std::vector<std::string> methods) {
    std::vector<std::string> out;
    for (const auto& m : canonical_methods()) {
        if (std::find(methods.begin(), methods.end(), m) != methods.end()) out.push_back(m);
    }
    return out;
}

} // namespace

// ---------------------------------------------------------------------------
// Config

void ExperimentConfig::validate() const {
    const auto fail = [](const std::string& msg) { throw ConfigError("config: " + msg); };
    if (T < 1) fail("t must be >= 1");
    if (burnin_epochs < 2) fail("burnin_epochs must be >= 2 (epoch 1 is untrained)");
    if (test_epochs < 1) fail("test_epochs must be >= 1");
    if (trials < 1) fail("trials must be >= 1");
    if (lambda < 0.0) fail("lambda must be >= 0");
    if (indicators < 1 || indicators > 7) fail("i must be in [1, 7]");
    if (competitors < 1) fail("competitors must be >= 1");
    if (exploration_rate < 0.0 || exploration_rate > 1.0) fail("exploration_rate in [0, 1]");
    if (training_window_epochs < 1) fail("training_window_epochs must be >= 1");
    if (sigma < 0.0 || sigma > 1.0) fail("sigma must be in [0, 1]");
    if (N < 1) fail("n must be >= 1");
    if (J < 1) fail("j must be >= 1");
    if (J_plus < 0) fail("j_plus must be >= 0");
    if (lapse_q < 0.0 || lapse_q >= 1.0) fail("lapse_q must be in [0, 1)");
    if (methods.empty()) fail("methods must be nonempty");
    for (const auto& m : methods)
        if (method_rank(m) < 0) fail("unknown method '" + m + "'");
}

ExperimentConfig paper_profile() {
    ExperimentConfig cfg;
    cfg.profile = "paper";
    return cfg;
}

ExperimentConfig desk_profile() {
    ExperimentConfig cfg;
    cfg.profile = "desk";
    cfg.T = 200;
    cfg.competitors = 3;
    cfg.trials = 8;
    cfg.lambda = 400.0;
    cfg.N = 200;
    cfg.J_plus = 60;
    return cfg;
}

ExperimentConfig profile_by_name(const std::string& name) {
    if (name == "desk") return desk_profile();
    if (name == "paper") return paper_profile();
    throw ConfigError("config: unknown profile '" + name + "' (expected desk or paper)");
}

namespace {

void apply_env_json(market::EnvParams& env, const ordered_json& j) {
    for (const auto& [key, value] : j.items()) {
        if (key == "walkaway_ratio") env.walkaway_ratio = value.get<double>();
        else if (key == "cost_base") env.cost_base = value.get<double>();
        else if (key == "cost_min") env.cost_min = value.get<double>();
        else if (key == "cost_max") env.cost_max = value.get<double>();
        else if (key == "sensitivity_meanlog") env.sensitivity_meanlog = value.get<double>();
        else if (key == "sensitivity_sdlog") env.sensitivity_sdlog = value.get<double>();
        else if (key == "competitor_noise_scale") env.competitor_noise_scale = value.get<double>();
        else if (key == "competitor_adaptation_rate")
            env.competitor_adaptation_rate = value.get<double>();
        else if (key == "competitor_markup_lo") env.competitor_markup_lo = value.get<double>();
        else if (key == "competitor_markup_hi") env.competitor_markup_hi = value.get<double>();
        else throw ConfigError("config: unknown env key '" + key + "'");
    }
}

} // namespace

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config: parse error in '" + path + "': " + e.what());
    }
    ExperimentConfig cfg = std::move(base);
    cfg.profile = "custom";
    for (const auto& [key, value] : j.items()) {
        if (key == "t") cfg.T = value.get<int>();
        else if (key == "burnin_epochs") cfg.burnin_epochs = value.get<int>();
        else if (key == "test_epochs") cfg.test_epochs = value.get<int>();
        else if (key == "trials") cfg.trials = value.get<int>();
        else if (key == "lambda") cfg.lambda = value.get<double>();
        else if (key == "i") cfg.indicators = value.get<int>();
        else if (key == "competitors") cfg.competitors = value.get<int>();
        else if (key == "exploration_rate") cfg.exploration_rate = value.get<double>();
        else if (key == "training_window_epochs") cfg.training_window_epochs = value.get<int>();
        else if (key == "sigma") cfg.sigma = value.get<double>();
        else if (key == "n") cfg.N = value.get<int>();
        else if (key == "j") cfg.J = value.get<int>();
        else if (key == "j_plus") cfg.J_plus = value.get<int>();
        else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
        else if (key == "lapse_q") cfg.lapse_q = value.get<double>();
        else if (key == "methods") cfg.methods = value.get<std::vector<std::string>>();
        else if (key == "profile") cfg.profile = value.get<std::string>();
        else if (key == "env") apply_env_json(cfg.env, value);
        else throw ConfigError("config: unknown key '" + key + "'");
    }
    cfg.validate();
    return cfg;
}

std::string config_json(const ExperimentConfig& cfg) {
    ordered_json j;
    j["t"] = cfg.T;
    j["burnin_epochs"] = cfg.burnin_epochs;
    j["test_epochs"] = cfg.test_epochs;
    j["trials"] = cfg.trials;
    j["lambda"] = cfg.lambda;
    j["i"] = cfg.indicators;
    j["competitors"] = cfg.competitors;
    j["exploration_rate"] = cfg.exploration_rate;
    j["training_window_epochs"] = cfg.training_window_epochs;
    j["sigma"] = cfg.sigma;
    j["n"] = cfg.N;
    j["j"] = cfg.J;
    j["j_plus"] = cfg.J_plus;
    j["seed"] = cfg.seed;
    j["lapse_q"] = cfg.lapse_q;
    j["methods"] = normalize_methods(cfg.methods);
    j["profile"] = cfg.profile;
    j["env"] = {
        {"walkaway_ratio", cfg.env.walkaway_ratio},
        {"cost_base", cfg.env.cost_base},
        {"cost_min", cfg.env.cost_min},
        {"cost_max", cfg.env.cost_max},
        {"sensitivity_meanlog", cfg.env.sensitivity_meanlog},
        {"sensitivity_sdlog", cfg.env.sensitivity_sdlog},
        {"competitor_noise_scale", cfg.env.competitor_noise_scale},
        {"competitor_adaptation_rate", cfg.env.competitor_adaptation_rate},
        {"competitor_markup_lo", cfg.env.competitor_markup_lo},
        {"competitor_markup_hi", cfg.env.competitor_markup_hi},
    };
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Trial execution

namespace {

ordered_json indicator_json(const portfolio::IndicatorSet& s) {
    ordered_json j;
    j["feature"] = s.feature;
    if (s.kind == portfolio::IndicatorSet::Kind::Interval) {
        j["kind"] = "interval";
        j["lo"] = s.lo;
        j["hi"] = s.hi;
    } else {
        j["kind"] = "value_set";
        j["values"] = s.values;
    }
    return j;
}

std::string build_manifest(const ExperimentConfig& cfg, int trial, const std::string& method,
                           const std::vector<portfolio::IndicatorSet>& sets,
                           const portfolio::TargetPortfolio& target,
                           const baseline::BaselineParams& chosen) {
    ordered_json j;
    j["trial"] = trial;
    j["method"] = method;
    j["master_seed"] = cfg.seed;
    j["config"] = ordered_json::parse(config_json(cfg));
    j["target"] = target.target;
    ordered_json inds = ordered_json::array();
    for (const auto& s : sets) inds.push_back(indicator_json(s));
    j["indicators"] = inds;
    j["baseline_params"] = {{"n", chosen.n}, {"beta", chosen.beta}};
    j["model_hyperparameters"] = {
        {"market_forest", {{"trees", 50}, {"max_depth", 10}, {"min_leaf", 5}}},
        {"conversion_mlp", {{"hidden", 16}, {"epochs", 300}, {"batch", 32}}},
        {"action_gp", {{"kernel", "matern52"}, {"lengthscale", 0.3}, {"noise", 1e-4}}},
        {"value_mlp",
         {{"hidden", cfg.v_hidden},
          {"learning_rate", cfg.v_learning_rate},
          {"epochs", cfg.v_epochs},
          {"batch", cfg.v_batch}}},
    };
    return j.dump(2) + "\n";
}

} // namespace

TrialResult run_trial(const ExperimentConfig& cfg, int trial_index, const std::string& method) {
    cfg.validate();
    if (method_rank(method) < 0) throw ConfigError("run_trial: unknown method '" + method + "'");

    TrialResult result;
    result.trial = trial_index;
    result.method = method;

    Rng master(cfg.seed);
    Rng trial_rng = master.stream(static_cast<std::uint64_t>(trial_index));
    // Method-independent streams; method choice never touches market
    // randomness, which is what makes trials paired.
    market::MarketStreams streams{trial_rng.stream(1), trial_rng.stream(2), trial_rng.stream(3)};
    Rng burnin_stream = trial_rng.stream(4);
    Rng explore_stream = trial_rng.stream(5);
    Rng fit_root = trial_rng.stream(6);
    Rng indicator_root = trial_rng.stream(7);
    Rng target_stream = trial_rng.stream(8);
    Rng grid_stream = trial_rng.stream(9);
    Rng rl_root = trial_rng.stream(10);

    // Indicator sets from a reference sample drawn on a dedicated stream.
    std::vector<CustomerFeatures> reference;
    {
        Rng ref_rng = indicator_root.stream(0);
        reference.reserve(2000);
        for (int i = 0; i < 2000; ++i)
            reference.push_back(market::sample_customer(cfg.env, ref_rng, -1 - i).features);
    }
    Rng indicator_rng = indicator_root.stream(1);
    const std::vector<portfolio::IndicatorSet> sets =
        portfolio::make_indicator_sets(reference, cfg.indicators, indicator_rng);

    std::vector<market::CompetitorState> competitors =
        market::make_competitors(cfg.env, cfg.competitors, streams.competitor);

    std::vector<InteractionRecord> history;
    std::vector<portfolio::FreqVec> burnin_freqs;
    std::int64_t customer_counter = 0;
    pipeline::PipelineModels burnin_models;

    for (int epoch = 1; epoch <= cfg.burnin_epochs; ++epoch) {
        market::InsurerPolicy policy;
        if (epoch == 1) {
            policy = [&](const CustomerFeatures&, double cost, int, const portfolio::FreqVec&) {
                const auto q = pipeline::random_policy_quote(cost, burnin_stream);
                return market::QuoteDecision{q.action, q.price};
            };
        } else {
            Rng fit_rng = fit_root.stream(static_cast<std::uint64_t>(epoch));
            burnin_models =
                pipeline::train_pipeline(history, cfg.training_window_epochs, false, fit_rng);
            policy = [&](const CustomerFeatures& c, double cost, int, const portfolio::FreqVec&) {
                const auto q = pipeline::quote_price(burnin_models, c, cost, explore_stream,
                                                     true, cfg.exploration_rate);
                return market::QuoteDecision{q.action, q.price};
            };
        }
        market::EpochResult res = market::run_epoch(cfg.env, policy, competitors, sets, cfg.T,
                                                    epoch, customer_counter, streams);
        history.insert(history.end(), res.records.begin(), res.records.end());
        burnin_freqs.push_back(res.freq);
        market::adapt_competitors(cfg.env, competitors, res.summary, streams.competitor);
    }

    {
        std::ostringstream burnin;
        write_records_csv(burnin, history);
        result.burnin_csv = burnin.str();
    }

    // Derived from burn-in only; identical across paired methods.
    const baseline::HistoricRates rates = baseline::historic_frequency(burnin_freqs);
    result.target = portfolio::generate_target(rates.f_bar, target_stream);

    Rng final_fit_rng = fit_root.stream(static_cast<std::uint64_t>(cfg.burnin_epochs + 1));
    pipeline::PipelineModels frozen =
        pipeline::train_pipeline(history, cfg.training_window_epochs, false, final_fit_rng);
    const rl::CustomerReplayBuffer buffer =
        rl::build_replay_buffer(history, sets, &frozen.conversion);

    const auto grid_result =
        baseline::grid_search_params(baseline::default_grid(), frozen, buffer, rates,
                                     result.target, cfg.lambda, cfg.T, grid_stream);
    result.chosen_baseline = grid_result.chosen;
    result.manifest =
        build_manifest(cfg, trial_index, method, sets, result.target, result.chosen_baseline);

    // Method-specific preparation.
    pipeline::PipelineModels rl_models;
    rl::ValueFn value_fn;
    if (method == "rl") {
        std::vector<market::MarketVariables> window_markets;
        int max_epoch = 0;
        for (const auto& r : history) max_epoch = std::max(max_epoch, r.epoch);
        for (const auto& r : history)
            if (r.epoch > max_epoch - cfg.training_window_epochs)
                window_markets.push_back(r.market_vars);

        Rng k_fit_rng = rl_root.stream(0);
        rl_models.market = frozen.market;
        rl_models.conversion = frozen.conversion;
        rl_models.action =
            models::fit_action_model_k(frozen.conversion, window_markets, k_fit_rng);

        std::vector<double> p_bar(rates.f_bar.size()), p_star(rates.f_bar.size());
        for (std::size_t i = 0; i < rates.f_bar.size(); ++i) {
            p_bar[i] = rates.f_bar[i] / cfg.T;
            p_star[i] = static_cast<double>(result.target.target[i]) / cfg.T;
        }

        rl::ValueTrainConfig vt;
        vt.N = cfg.N;
        vt.J = cfg.J;
        vt.J_plus = cfg.J_plus;
        vt.lambda = cfg.lambda;
        vt.T = cfg.T;
        vt.sampler = rl::SamplerConfig::make(cfg.sigma, cfg.T, p_bar, p_star);
        vt.lapse.q = cfg.lapse_q;
        vt.v_hidden = cfg.v_hidden;
        vt.v_learning_rate = cfg.v_learning_rate;
        vt.v_epochs = cfg.v_epochs;
        vt.v_batch = cfg.v_batch;

        Rng value_rng = rl_root.stream(1);
        rl::TrainResult trained = rl::train_value_function(
            rl::policy_from_model(rl_models.action), rl::conversion_from_grid(), buffer,
            result.target, vt, value_rng);
        value_fn = std::move(trained.value);
        if (cfg.dump_value_dataset) result.value_dataset = std::move(trained.dataset);

        std::ostringstream blob;
        serialize::save_value_fn(blob, value_fn);
        result.value_blob = blob.str();
    }

    {
        std::ostringstream blob;
        serialize::save_pipeline(blob, method == "rl" ? rl_models : frozen);
        result.models_blob = blob.str();
    }

    // Testing epochs: frozen models, no exploration, no retraining.
    for (int te = 1; te <= cfg.test_epochs; ++te) {
        market::InsurerPolicy policy;
        if (method == "pipeline") {
            policy = [&](const CustomerFeatures& c, double cost, int, const portfolio::FreqVec&) {
                const auto q =
                    pipeline::quote_price(frozen, c, cost, explore_stream, false);
                return market::QuoteDecision{q.action, q.price};
            };
        } else if (method == "baseline") {
            policy = [&](const CustomerFeatures& c, double cost, int, const portfolio::FreqVec&) {
                const auto q =
                    pipeline::quote_price(frozen, c, cost, explore_stream, false);
                const double factor = baseline::modulation_factor(
                    portfolio::membership(sets, c), rates, result.target,
                    result.chosen_baseline);
                const double action = std::clamp(q.action * factor, 0.9, 2.2);
                return market::QuoteDecision{action, cost * action};
            };
        } else {
            policy = [&](const CustomerFeatures& c, double cost, int t,
                         const portfolio::FreqVec& freq) {
                const auto mask = portfolio::membership(sets, c);
                const auto q =
                    rl::quote_price_rl(rl_models, value_fn, freq, mask, t, c, cost);
                return market::QuoteDecision{q.action, q.price};
            };
        }

        market::EpochResult res =
            market::run_epoch(cfg.env, policy, competitors, sets, cfg.T,
                              cfg.burnin_epochs + te, customer_counter, streams);
        market::adapt_competitors(cfg.env, competitors, res.summary, streams.competitor);

        EpochSeries series;
        series.epoch = te;
        series.profit.reserve(cfg.T);
        series.loss.reserve(cfg.T);
        series.reward.reserve(cfg.T);
        double cum = 0.0;
        for (int t = 0; t < cfg.T; ++t) {
            const auto& rec = res.records[t];
            if (rec.accepted) cum += rec.cost * (rec.action - 1.0);
            const double loss_t = cfg.lambda * portfolio::loss(res.freq_by_step[t], result.target);
            series.profit.push_back(cum);
            series.loss.push_back(loss_t);
            series.reward.push_back(cum - loss_t);
        }
        series.final_profit = series.profit.back();
        series.final_loss = series.loss.back();
        series.final_reward = series.reward.back();
        result.epochs.push_back(std::move(series));
    }

    return result;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool sequential) {
    cfg.validate();
    const std::vector<std::string> methods = normalize_methods(cfg.methods);

    std::vector<std::pair<int, std::string>> tasks;
    for (int trial = 0; trial < cfg.trials; ++trial)
        for (const auto& m : methods) tasks.emplace_back(trial, m);

    ExperimentResult result;
    result.trials.resize(tasks.size());

    const auto run_task = [&](std::size_t i) {
        const auto& [trial, m] = tasks[i];
        try {
            result.trials[i] = run_trial(cfg, trial, m);
        } catch (const std::exception& e) {
            result.trials[i].trial = trial;
            result.trials[i].method = m;
            result.trials[i].failed = true;
            result.trials[i].error = e.what();
        }
    };

    unsigned workers = sequential ? 1u : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, tasks.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= tasks.size()) return;
                    run_task(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    for (const auto& t : result.trials)
        if (t.failed) ++result.failures;
    return result;
}

// ---------------------------------------------------------------------------
// Output files

namespace {

struct FinalsRow {
    int trial = 0;
    std::string method;
    int epoch = 0;
    double profit = 0.0, loss = 0.0, reward = 0.0;
};

struct StepsKey {
    std::string method;
    int t = 0;
};

struct Moments {
    double mean = 0.0, sd = 0.0;
    std::size_t n = 0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    m.n = v.size();
    if (v.empty()) return m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double acc = 0.0;
        for (double x : v) acc += (x - m.mean) * (x - m.mean);
        m.sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
    }
    return m;
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name, const std::string& file) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return static_cast<int>(i);
        throw std::runtime_error(file + ": missing column '" + name + "'");
    }
};

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto pos = line.find(',', start);
            if (pos == std::string::npos) {
                cells.push_back(line.substr(start));
                break;
            }
            cells.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (first) {
            table.header = std::move(cells);
            first = false;
        } else {
            table.rows.push_back(std::move(cells));
        }
    }
    return table;
}

std::string stats_block(const std::string& label, const std::vector<double>& a_profit,
                        const std::vector<double>& b_profit, const std::vector<double>& a_loss,
                        const std::vector<double>& b_loss, const std::vector<double>& a_reward,
                        const std::vector<double>& b_reward) {
    std::ostringstream out;
    if (a_profit.size() < 2 || b_profit.size() < 2) {
        out << label << ": not enough samples for statistics\n";
        return out.str();
    }
    const auto line = [&](const char* metric, const std::vector<double>& a,
                          const std::vector<double>& b, stats::Alternative alt) {
        const auto mw = stats::mann_whitney_u(a, b, alt);
        const double d = stats::cohens_d(a, b);
        const double c = stats::cles(a, b);
        out << "  " << metric << ": MW U=" << fmt(mw.u) << " p=" << fmt(mw.p)
            << (alt == stats::Alternative::TwoSided ? " (two-sided)" : " (one-sided greater)")
            << (mw.exact ? " [exact]" : " [normal approx]") << ", CLES=" << fmt(c)
            << ", Cohen's d=" << fmt(d) << "\n";
    };
    out << label << " (n=" << a_profit.size() << " vs " << b_profit.size() << "):\n";
    line("profit", a_profit, b_profit, stats::Alternative::Greater);
    line("reward", a_reward, b_reward, stats::Alternative::Greater);
    line("loss  ", a_loss, b_loss, stats::Alternative::TwoSided);
    return out.str();
}

void write_summary_files(const std::string& out_dir, const CsvTable& steps,
                         const CsvTable& trials, const std::string& profile) {
    // trials.csv -> finals per (trial, method, epoch)
    std::vector<FinalsRow> finals;
    {
        const int c_trial = trials.column("trial", "trials.csv");
        const int c_method = trials.column("method", "trials.csv");
        const int c_epoch = trials.column("epoch", "trials.csv");
        const int c_profit = trials.column("final_profit", "trials.csv");
        const int c_loss = trials.column("final_loss", "trials.csv");
        const int c_reward = trials.column("final_reward", "trials.csv");
        for (const auto& row : trials.rows) {
            FinalsRow r;
            r.trial = std::stoi(row[c_trial]);
            r.method = row[c_method];
            r.epoch = std::stoi(row[c_epoch]);
            r.profit = std::stod(row[c_profit]);
            r.loss = std::stod(row[c_loss]);
            r.reward = std::stod(row[c_reward]);
            finals.push_back(std::move(r));
        }
    }

    std::vector<std::string> methods;
    for (const auto& m : canonical_methods()) {
        for (const auto& r : finals) {
            if (r.method == m) {
                methods.push_back(m);
                break;
            }
        }
    }

    const auto collect = [&](const std::string& method, auto getter) {
        std::vector<double> v;
        for (const auto& r : finals)
            if (r.method == method) v.push_back(getter(r));
        return v;
    };
    const auto collect_trial_means = [&](const std::string& method, auto getter) {
        std::map<int, std::pair<double, int>> acc;
        for (const auto& r : finals) {
            if (r.method != method) continue;
            auto& [sum, count] = acc[r.trial];
            sum += getter(r);
            count += 1;
        }
        std::vector<double> v;
        for (const auto& [trial, sc] : acc) v.push_back(sc.first / sc.second);
        return v;
    };
    const auto get_profit = [](const FinalsRow& r) { return r.profit; };
    const auto get_loss = [](const FinalsRow& r) { return r.loss; };
    const auto get_reward = [](const FinalsRow& r) { return r.reward; };

    // aggregate.csv
    {
        std::ofstream out(out_dir + "/aggregate.csv");
        out << "method,n,mean_profit,sd_profit,mean_loss,sd_loss,mean_reward,sd_reward\n";
        std::map<std::string, std::array<double, 3>> means;
        for (const auto& m : methods) {
            const auto p = moments(collect(m, get_profit));
            const auto l = moments(collect(m, get_loss));
            const auto r = moments(collect(m, get_reward));
            means[m] = {p.mean, l.mean, r.mean};
            out << m << ',' << p.n << ',' << fmt(p.mean) << ',' << fmt(p.sd) << ','
                << fmt(l.mean) << ',' << fmt(l.sd) << ',' << fmt(r.mean) << ',' << fmt(r.sd)
                << "\n";
        }
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const auto& hi = means[methods[i]];
                const auto& lo = means[methods[j]];
                out << methods[i] << "_minus_" << methods[j] << ",," << fmt(hi[0] - lo[0])
                    << ",," << fmt(hi[1] - lo[1]) << ",," << fmt(hi[2] - lo[2]) << ",\n";
            }
        }
    }

    // fig1_data.csv: per-step mean/sd over trial-epochs per method
    {
        const int c_method = steps.column("method", "steps.csv");
        const int c_t = steps.column("t", "steps.csv");
        const int c_profit = steps.column("profit", "steps.csv");
        const int c_loss = steps.column("loss", "steps.csv");
        const int c_reward = steps.column("reward", "steps.csv");

        std::map<std::string, std::map<int, std::array<std::vector<double>, 3>>> series;
        for (const auto& row : steps.rows) {
            auto& slot = series[row[c_method]][std::stoi(row[c_t])];
            slot[0].push_back(std::stod(row[c_profit]));
            slot[1].push_back(std::stod(row[c_loss]));
            slot[2].push_back(std::stod(row[c_reward]));
        }
        std::ofstream out(out_dir + "/fig1_data.csv");
        out << "method,t,profit_mean,profit_sd,loss_mean,loss_sd,reward_mean,reward_sd\n";
        for (const auto& m : methods) {
            const auto it = series.find(m);
            if (it == series.end()) continue;
            for (const auto& [t, slot] : it->second) {
                const auto p = moments(slot[0]);
                const auto l = moments(slot[1]);
                const auto r = moments(slot[2]);
                out << m << ',' << t << ',' << fmt(p.mean) << ',' << fmt(p.sd) << ','
                    << fmt(l.mean) << ',' << fmt(l.sd) << ',' << fmt(r.mean) << ','
                    << fmt(r.sd) << "\n";
            }
        }
    }

    // report.txt
    {
        std::ofstream out(out_dir + "/report.txt");
        out << "Portfolio pursuit experiment report\n";
        out << "===================================\n\n";
        out << "Final metrics over trial-epochs (mean, sd):\n";
        char buf[160];
        for (const auto& m : methods) {
            const auto p = moments(collect(m, get_profit));
            const auto l = moments(collect(m, get_loss));
            const auto r = moments(collect(m, get_reward));
            std::snprintf(buf, sizeof(buf),
                          "  %-9s n=%-4zu profit %10.2f (%8.2f)  loss %10.2f (%8.2f)  reward "
                          "%10.2f (%8.2f)\n",
                          m.c_str(), p.n, p.mean, p.sd, l.mean, l.sd, r.mean, r.sd);
            out << buf;
        }
        out << "\nTerminal means (dashed-line values):\n";
        for (const auto& m : methods) {
            const auto p = moments(collect(m, get_profit));
            const auto l = moments(collect(m, get_loss));
            const auto r = moments(collect(m, get_reward));
            std::snprintf(buf, sizeof(buf), "  %-9s profit %.2f loss %.2f reward %.2f\n",
                          m.c_str(), p.mean, l.mean, r.mean);
            out << buf;
        }
        out << "\nDifferences (row minus column, mean finals):\n";
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                const double dp = moments(collect(methods[i], get_profit)).mean -
                                  moments(collect(methods[j], get_profit)).mean;
                const double dl = moments(collect(methods[i], get_loss)).mean -
                                  moments(collect(methods[j], get_loss)).mean;
                const double dr = moments(collect(methods[i], get_reward)).mean -
                                  moments(collect(methods[j], get_reward)).mean;
                std::snprintf(buf, sizeof(buf),
                              "  %s - %s: profit %.2f loss %.2f reward %.2f\n",
                              methods[i].c_str(), methods[j].c_str(), dp, dl, dr);
                out << buf;
            }
        }
        out << "\nStatistical comparisons, sampling unit = trial-epoch:\n";
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                out << stats_block(
                    "  " + methods[i] + " vs " + methods[j],
                    collect(methods[i], get_profit), collect(methods[j], get_profit),
                    collect(methods[i], get_loss), collect(methods[j], get_loss),
                    collect(methods[i], get_reward), collect(methods[j], get_reward));
            }
        }
        out << "\nStatistical comparisons, sampling unit = trial mean:\n";
        for (std::size_t i = 0; i < methods.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                out << stats_block(
                    "  " + methods[i] + " vs " + methods[j],
                    collect_trial_means(methods[i], get_profit),
                    collect_trial_means(methods[j], get_profit),
                    collect_trial_means(methods[i], get_loss),
                    collect_trial_means(methods[j], get_loss),
                    collect_trial_means(methods[i], get_reward),
                    collect_trial_means(methods[j], get_reward));
            }
        }
        if (profile == "paper") {
            out << "\nReference values from the original evaluation (reference-only, "
                   "environment differs):\n";
            out << "  rl        profit 6916 loss 856 reward 6060\n";
            out << "  baseline  profit 6444 loss 834 reward 5610\n";
            out << "  rl - baseline: profit 472 loss 22 reward 450\n";
        }
    }
}

} // namespace

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::string& out_dir) {
    fs::create_directories(out_dir);
    fs::create_directories(out_dir + "/manifests");
    fs::create_directories(out_dir + "/interactions");
    fs::create_directories(out_dir + "/models");

    {
        std::ofstream out(out_dir + "/config.json");
        out << config_json(cfg);
    }

    {
        std::ofstream steps(out_dir + "/steps.csv");
        steps << "trial,method,epoch,t,profit,loss,reward\n";
        std::ofstream trials(out_dir + "/trials.csv");
        trials << "trial,method,epoch,final_profit,final_loss,final_reward\n";
        for (const auto& tr : result.trials) {
            if (tr.failed) continue;
            for (const auto& ep : tr.epochs) {
                for (std::size_t t = 0; t < ep.profit.size(); ++t) {
                    steps << tr.trial << ',' << tr.method << ',' << ep.epoch << ',' << (t + 1)
                          << ',' << fmt(ep.profit[t]) << ',' << fmt(ep.loss[t]) << ','
                          << fmt(ep.reward[t]) << "\n";
                }
                trials << tr.trial << ',' << tr.method << ',' << ep.epoch << ','
                       << fmt(ep.final_profit) << ',' << fmt(ep.final_loss) << ','
                       << fmt(ep.final_reward) << "\n";
            }
        }
    }

    char name[128];
    for (const auto& tr : result.trials) {
        if (tr.failed) continue;
        std::snprintf(name, sizeof(name), "trial%03d_%s", tr.trial, tr.method.c_str());
        {
            std::ofstream out(out_dir + "/manifests/" + name + ".json");
            out << tr.manifest;
        }
        {
            std::ofstream out(out_dir + "/interactions/" + name + "_burnin.csv");
            out << tr.burnin_csv;
        }
        {
            std::ofstream out(out_dir + "/models/" + name + ".pzoo");
            out << tr.models_blob;
        }
        if (!tr.value_blob.empty()) {
            std::ofstream out(out_dir + "/models/" + name + "_value.pzoo");
            out << tr.value_blob;
        }
    }

    if (result.failures > 0) {
        std::ofstream out(out_dir + "/failures.txt");
        for (const auto& tr : result.trials) {
            if (tr.failed)
                out << "trial " << tr.trial << " method " << tr.method << ": " << tr.error
                    << "\n";
        }
    }

    write_report_from_dir(out_dir, out_dir);
}

void write_report_from_dir(const std::string& summary_dir, const std::string& out_dir) {
    const CsvTable steps = read_csv(summary_dir + "/steps.csv");
    const CsvTable trials = read_csv(summary_dir + "/trials.csv");
    std::string profile = "custom";
    {
        std::ifstream in(summary_dir + "/config.json");
        if (in) {
            try {
                ordered_json j;
                in >> j;
                if (j.contains("profile")) profile = j["profile"].get<std::string>();
            } catch (...) {
                // config.json is optional for report generation
            }
        }
    }
    fs::create_directories(out_dir);
    write_summary_files(out_dir, steps, trials, profile);
}

std::vector<double> read_csv_column(const std::string& path, const std::string& column) {
    const CsvTable table = read_csv(path);
    const int c = table.column(column, path);
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const auto& row : table.rows) out.push_back(std::stod(row[c]));
    return out;
}

} // namespace pursuit::harness
