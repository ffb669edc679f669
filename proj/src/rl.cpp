#include "pursuit/rl.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pursuit/kernels.hpp"

namespace pursuit::rl {

// ---------------------------------------------------------------------------
// Replay buffer

CustomerReplayBuffer build_replay_buffer(const std::vector<InteractionRecord>& records,
                                         const std::vector<portfolio::IndicatorSet>& sets,
                                         const models::ConversionModel* conversion) {
    CustomerReplayBuffer buffer;
    buffer.entries.reserve(records.size());
    for (const auto& r : records) {
        BufferEntry e;
        e.features = r.customer;
        e.market_vars = r.market_vars;
        e.cost = r.cost;
        e.membership = portfolio::membership(sets, r.customer);
        if (conversion) e.conversion_grid = conversion->grid_values(r.market_vars);
        buffer.entries.push_back(std::move(e));
    }
    return buffer;
}

// ---------------------------------------------------------------------------
// Next-step value function

NextStepValueFn NextStepValueFn::boundary(double lambda, portfolio::TargetPortfolio target) {
    NextStepValueFn u;
    u.mode_ = Mode::Boundary;
    u.lambda_ = lambda;
    u.target_ = std::move(target);
    return u;
}

NextStepValueFn NextStepValueFn::linear(std::vector<double> weights, double bias) {
    NextStepValueFn u;
    u.mode_ = Mode::Linear;
    u.weights_ = std::move(weights);
    u.bias_ = bias;
    return u;
}

NextStepValueFn NextStepValueFn::table_fn(std::vector<double> table) {
    if (table.empty()) throw std::invalid_argument("NextStepValueFn: empty table");
    NextStepValueFn u;
    u.mode_ = Mode::Table;
    u.table_ = std::move(table);
    return u;
}

double NextStepValueFn::operator()(const portfolio::FreqVec& f) const {
    switch (mode_) {
        case Mode::Boundary:
            return -lambda_ * portfolio::loss(f, target_);
        case Mode::Table: {
            if (f.size() != 1)
                throw std::invalid_argument("NextStepValueFn: table mode needs one indicator");
            const auto idx = static_cast<std::size_t>(
                std::clamp(f[0], 0, static_cast<int>(table_.size()) - 1));
            return table_[idx];
        }
        case Mode::Linear:
            break;
    }
    if (f.size() != weights_.size())
        throw std::invalid_argument("NextStepValueFn: size mismatch");
    double acc = bias_;
    for (std::size_t i = 0; i < weights_.size(); ++i) acc += weights_[i] * f[i];
    return acc;
}

NextStepValueFn refit_next_step(const std::vector<portfolio::FreqVec>& portfolios,
                                const std::vector<double>& values, double ridge) {
    if (portfolios.empty() || portfolios.size() != values.size())
        throw std::invalid_argument("refit_next_step: bad inputs");
    const std::size_t n = portfolios.size();
    const std::size_t d = portfolios[0].size() + 1; // + bias column

    Eigen::MatrixXd x(n, d);
    Eigen::VectorXd y(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c + 1 < d; ++c) x(r, c) = portfolios[r][c];
        x(r, d - 1) = 1.0;
        y(r) = values[r];
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    gram.diagonal().array() += ridge;
    Eigen::VectorXd beta = gram.ldlt().solve(x.transpose() * y);

    std::vector<double> w(beta.data(), beta.data() + d - 1);
    return NextStepValueFn::linear(std::move(w), beta(d - 1));
}

// ---------------------------------------------------------------------------
// Value function V_phi

double ValueFn::operator()(const portfolio::FreqVec& f, int t) const {
    std::vector<double> x;
    x.reserve(f.size() + 1);
    const double inv_t = 1.0 / static_cast<double>(horizon);
    for (std::size_t i = 0; i < f.size(); ++i) x.push_back(f[i] * inv_t);
    x.push_back(t * inv_t);
    return net.predict(x);
}

ValueQuery as_query(const ValueFn& v) {
    return [&v](const portfolio::FreqVec& f, int t) { return v(f, t); };
}

// ---------------------------------------------------------------------------
// k-values

double k_value(const NextStepValueFn& u, const portfolio::FreqVec& f,
               const portfolio::MemberMask& member, double cost) {
    if (!(cost > 0.0)) throw std::invalid_argument("k_value: cost must be > 0");
    double delta;
    if (u.is_linear()) {
        // Exact for a linear model and cheaper than two evaluations.
        delta = 0.0;
        for (std::size_t i = 0; i < member.size(); ++i)
            if (member[i]) delta += u.weights()[i];
    } else {
        delta = u(portfolio::with_customer(f, member)) - u(f);
    }
    return 1.0 - delta / cost;
}

double k_value_inference(const ValueQuery& v, const portfolio::FreqVec& f,
                         const portfolio::MemberMask& member, double cost, int t) {
    if (!(cost > 0.0)) throw std::invalid_argument("k_value_inference: cost must be > 0");
    const double with = v(portfolio::with_customer(f, member), t + 1);
    const double without = v(f, t + 1);
    return 1.0 - (with - without) / cost;
}

double k_value_leaving(const ValueQuery& v, const portfolio::FreqVec& f,
                       const portfolio::MemberMask& member, double cost, int t,
                       const LapseModel& lapse, int n_mc, Rng& rng) {
    if (!(cost > 0.0)) throw std::invalid_argument("k_value_leaving: cost must be > 0");
    if (lapse.q < 0.0 || lapse.q >= 1.0)
        throw std::invalid_argument("k_value_leaving: q must be in [0, 1)");
    if (lapse.q == 0.0) return k_value_inference(v, f, member, cost, t);
    if (n_mc < 1) throw std::invalid_argument("k_value_leaving: n_mc must be >= 1");

    const double keep = 1.0 - lapse.q;
    double diff_sum = 0.0;
    portfolio::FreqVec with(f.size()), without(f.size());
    for (int rep = 0; rep < n_mc; ++rep) {
        // Common random numbers: survivors of the base portfolio are shared
        // between both expectations; the joining customer thins separately.
        for (std::size_t i = 0; i < f.size(); ++i) {
            int base = 0;
            for (int j = 0; j < f[i]; ++j) base += rng.bernoulli(keep) ? 1 : 0;
            int extra = 0;
            if (member[i]) extra = rng.bernoulli(keep) ? 1 : 0;
            without[i] = base;
            with[i] = base + extra;
        }
        diff_sum += v(with, t + 1) - v(without, t + 1);
    }
    return 1.0 - (diff_sum / n_mc) / cost;
}

// ---------------------------------------------------------------------------
// Samplers

SamplerConfig SamplerConfig::make(double sigma, int T, std::vector<double> p_bar,
                                  std::vector<double> p_star) {
    if (p_bar.size() != p_star.size())
        throw std::invalid_argument("SamplerConfig: rate size mismatch");
    SamplerConfig cfg;
    cfg.sigma = sigma;
    cfg.T = T;
    cfg.p_bar = std::move(p_bar);
    cfg.p_star = std::move(p_star);
    cfg.p_max.resize(cfg.p_bar.size());
    cfg.p_min.resize(cfg.p_bar.size());
    for (std::size_t i = 0; i < cfg.p_bar.size(); ++i) {
        cfg.p_max[i] = (1.0 + sigma) * std::max(cfg.p_star[i], cfg.p_bar[i]);
        cfg.p_min[i] = (1.0 - sigma) * std::min(cfg.p_star[i], cfg.p_bar[i]);
    }
    return cfg;
}

portfolio::FreqVec sample_previously_on_policy(const std::vector<double>& p_bar, int t, int T,
                                               Rng& rng) {
    if (t < 1 || t > T) throw std::invalid_argument("sample_previously_on_policy: bad t");
    portfolio::FreqVec f(p_bar.size());
    for (std::size_t i = 0; i < p_bar.size(); ++i) {
        const double p = std::min(1.0, p_bar[i] + 1.0 / T);
        f[i] = rng.binomial(t, p);
    }
    return f;
}

portfolio::FreqVec sample_target_on_policy(const std::vector<double>& p_star, int t, Rng& rng) {
    if (t < 1) throw std::invalid_argument("sample_target_on_policy: bad t");
    portfolio::FreqVec f(p_star.size());
    for (std::size_t i = 0; i < p_star.size(); ++i) {
        f[i] = rng.binomial(t, std::min(1.0, p_star[i]));
    }
    return f;
}

std::vector<portfolio::FreqVec> sample_high_coverage(const SamplerConfig& cfg, int t, int count,
                                                     Rng& rng) {
    if (count < 1) throw std::invalid_argument("sample_high_coverage: count must be >= 1");
    std::vector<portfolio::FreqVec> out;
    out.reserve(count);
    for (int j = 0; j < count; ++j) {
        const double omega = (count == 1) ? 0.5 : static_cast<double>(j) / (count - 1);
        portfolio::FreqVec f(cfg.p_min.size());
        for (std::size_t i = 0; i < cfg.p_min.size(); ++i) {
            const double rate =
                std::clamp(omega * cfg.p_max[i] + (1.0 - omega) * cfg.p_min[i], 0.0, 1.0);
            const double mu = t * rate;
            const double base = std::floor(mu);
            const double frac = mu - base;
            f[i] = static_cast<int>(base) + (rng.bernoulli(frac) ? 1 : 0);
        }
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<portfolio::FreqVec> sample_portfolios(const SamplerConfig& cfg, int t, int J,
                                                  Rng& rng) {
    if (J < 1) throw std::invalid_argument("sample_portfolios: J must be >= 1");
    const int n_prev = static_cast<int>(std::lround(J * 0.25));
    const int n_target = static_cast<int>(std::lround(J * 0.25));
    const int n_high = J - n_prev - n_target;

    std::vector<portfolio::FreqVec> out;
    out.reserve(J);
    for (int i = 0; i < n_prev; ++i)
        out.push_back(sample_previously_on_policy(cfg.p_bar, t, cfg.T, rng));
    for (int i = 0; i < n_target; ++i)
        out.push_back(sample_target_on_policy(cfg.p_star, t, rng));
    auto high = sample_high_coverage(cfg, t, n_high, rng);
    for (auto& f : high) out.push_back(std::move(f));
    return out;
}

// ---------------------------------------------------------------------------
// Training

PolicyFn policy_from_model(const models::ActionModel& action, double k_lo, double k_hi) {
    return [&action, k_lo, k_hi](const market::MarketVariables& m, double k) {
        return action.predict(m, std::clamp(k, k_lo, k_hi));
    };
}

ConversionFn conversion_from_grid() {
    return [](const BufferEntry& entry, double a) {
        return models::ConversionModel::interpolate_grid(entry.conversion_grid, a);
    };
}

namespace {

// k under the lapse transition with U as the next-step value; thinning
// Monte Carlo with common random numbers, mirroring k_value_leaving.
double k_value_leaving_u(const NextStepValueFn& u, const portfolio::FreqVec& f,
                         const portfolio::MemberMask& member, double cost,
                         const LapseModel& lapse, int n_mc, Rng& rng) {
    if (lapse.q == 0.0) return k_value(u, f, member, cost);
    const double keep = 1.0 - lapse.q;
    double diff_sum = 0.0;
    portfolio::FreqVec with(f.size()), without(f.size());
    for (int rep = 0; rep < n_mc; ++rep) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            int base = 0;
            for (int j = 0; j < f[i]; ++j) base += rng.bernoulli(keep) ? 1 : 0;
            int extra = 0;
            if (member[i]) extra = rng.bernoulli(keep) ? 1 : 0;
            without[i] = base;
            with[i] = base + extra;
        }
        diff_sum += u(with) - u(without);
    }
    return 1.0 - (diff_sum / n_mc) / cost;
}

double expected_next_value(const NextStepValueFn& u, const portfolio::FreqVec& f,
                           const LapseModel& lapse, int n_mc, Rng& rng) {
    if (lapse.q == 0.0) return u(f);
    const double keep = 1.0 - lapse.q;
    double acc = 0.0;
    portfolio::FreqVec thinned(f.size());
    for (int rep = 0; rep < n_mc; ++rep) {
        for (std::size_t i = 0; i < f.size(); ++i) {
            int surv = 0;
            for (int j = 0; j < f[i]; ++j) surv += rng.bernoulli(keep) ? 1 : 0;
            thinned[i] = surv;
        }
        acc += u(thinned);
    }
    return acc / n_mc;
}

} // namespace

std::vector<double> value_estimates_for_portfolios(
    const NextStepValueFn& u, const PolicyFn& policy, const ConversionFn& conversion,
    const CustomerReplayBuffer& buffer, const std::vector<portfolio::FreqVec>& portfolios,
    const ValueTrainConfig& cfg, Rng& rng) {
    if (buffer.empty()) throw std::invalid_argument("value estimates: empty buffer");

    std::vector<double> values;
    values.reserve(portfolios.size());
    for (const auto& f : portfolios) {
        const double base = expected_next_value(u, f, cfg.lapse, cfg.lapse_n_mc, rng);
        double profit_term = 0.0;
        const std::size_t draws = cfg.exact_expectation ? buffer.size()
                                                        : static_cast<std::size_t>(cfg.N);
        for (std::size_t i = 0; i < draws; ++i) {
            const BufferEntry& entry =
                cfg.exact_expectation ? buffer.entries[i]
                                      : buffer.entries[rng.uniform_int(buffer.size())];
            const double k =
                (cfg.lapse.q == 0.0)
                    ? k_value(u, f, entry.membership, entry.cost)
                    : k_value_leaving_u(u, f, entry.membership, entry.cost, cfg.lapse,
                                        cfg.lapse_n_mc, rng);
            const double a = policy(entry.market_vars, k);
            const double p = conversion(entry, a);
            profit_term += entry.cost * p * (a - k);
        }
        values.push_back(base + profit_term / static_cast<double>(draws));
    }
    return values;
}

std::vector<std::pair<portfolio::FreqVec, double>> value_recursion_leaving(
    const NextStepValueFn& u, const PolicyFn& policy, const ConversionFn& conversion,
    const CustomerReplayBuffer& buffer, const LapseModel& lapse, int t,
    const ValueTrainConfig& cfg, Rng& rng) {
    ValueTrainConfig local = cfg;
    local.lapse = lapse;
    const auto portfolios = sample_portfolios(local.sampler, t, local.J, rng);
    const auto values =
        value_estimates_for_portfolios(u, policy, conversion, buffer, portfolios, local, rng);
    std::vector<std::pair<portfolio::FreqVec, double>> out;
    out.reserve(portfolios.size());
    for (std::size_t i = 0; i < portfolios.size(); ++i) out.emplace_back(portfolios[i], values[i]);
    return out;
}

void ValueEstimateDataset::to_csv(std::ostream& out) const {
    out << "t";
    for (int i = 1; i <= indicators; ++i) out << ",f_" << i;
    out << ",v_raw,v_centred\n";
    char buf[64];
    for (const auto& row : rows) {
        out << row.t;
        for (std::size_t i = 0; i < row.f.size(); ++i) out << ',' << row.f[i];
        std::snprintf(buf, sizeof(buf), ",%.12g,%.12g\n", row.v_raw, row.v_centred);
        out << buf;
    }
}

namespace {

// Exact tabular refit over an enumerated single-indicator portfolio set.
NextStepValueFn tabular_refit(const std::vector<portfolio::FreqVec>& portfolios,
                              const std::vector<double>& values) {
    int max_count = 0;
    for (const auto& f : portfolios) {
        if (f.size() != 1)
            throw std::invalid_argument("tabular U refit requires a single indicator");
        max_count = std::max(max_count, f[0]);
    }
    std::vector<double> table(max_count + 1, 0.0);
    std::vector<char> seen(max_count + 1, 0);
    for (std::size_t i = 0; i < portfolios.size(); ++i) {
        table[portfolios[i][0]] = values[i];
        seen[portfolios[i][0]] = 1;
    }
    for (char s : seen)
        if (!s) throw std::invalid_argument("tabular U refit: enumeration has gaps");
    return NextStepValueFn::table_fn(std::move(table));
}

} // namespace

TrainResult train_value_function(const PolicyFn& policy, const ConversionFn& conversion,
                                 const CustomerReplayBuffer& buffer,
                                 const portfolio::TargetPortfolio& target,
                                 const ValueTrainConfig& cfg, Rng& rng) {
    if (buffer.empty()) throw std::invalid_argument("train_value_function: empty buffer");
    if (cfg.T < 1) throw std::invalid_argument("train_value_function: T must be >= 1");

    NextStepValueFn u = NextStepValueFn::boundary(cfg.lambda, target);
    TrainResult result;
    result.dataset.indicators = static_cast<int>(target.target.size());

    for (int t = cfg.T; t >= 1; --t) {
        const std::vector<portfolio::FreqVec> portfolios =
            cfg.enumerate_portfolios ? *cfg.enumerate_portfolios
                                     : sample_portfolios(cfg.sampler, t, cfg.J, rng);
        const std::vector<double> values =
            value_estimates_for_portfolios(u, policy, conversion, buffer, portfolios, cfg, rng);

        u = cfg.tabular_u ? tabular_refit(portfolios, values)
                          : refit_next_step(portfolios, values);
        if (cfg.tabular_u) result.tabular_values.push_back(values);

        std::vector<portfolio::FreqVec> augmenting;
        if (!cfg.enumerate_portfolios && cfg.J_plus > 0)
            augmenting = sample_portfolios(cfg.sampler, t, cfg.J_plus, rng);

        const std::size_t start = result.dataset.rows.size();
        for (std::size_t j = 0; j < portfolios.size(); ++j)
            result.dataset.rows.push_back({portfolios[j], t, values[j], 0.0});
        for (const auto& f : augmenting) result.dataset.rows.push_back({f, t, u(f), 0.0});

        double mean = 0.0;
        for (std::size_t i = start; i < result.dataset.rows.size(); ++i)
            mean += result.dataset.rows[i].v_raw;
        mean /= static_cast<double>(result.dataset.rows.size() - start);
        for (std::size_t i = start; i < result.dataset.rows.size(); ++i)
            result.dataset.rows[i].v_centred = result.dataset.rows[i].v_raw - mean;
    }

    // Fit V_phi to the centred estimates.
    const int indicators = result.dataset.indicators;
    models::Dataset fit_data;
    const double inv_t = 1.0 / static_cast<double>(cfg.T);
    for (const auto& row : result.dataset.rows) {
        std::vector<double> x;
        x.reserve(indicators + 1);
        for (int i = 0; i < indicators; ++i) x.push_back(row.f[i] * inv_t);
        x.push_back(row.t * inv_t);
        fit_data.add(std::move(x), {row.v_centred});
    }
    models::MlpParams params;
    params.hidden1 = cfg.v_hidden;
    params.hidden2 = cfg.v_hidden;
    params.learning_rate = cfg.v_learning_rate;
    params.epochs = cfg.v_epochs;
    params.batch = cfg.v_batch;
    params.logistic_output = false;

    result.value.horizon = cfg.T;
    result.value.indicators = indicators;
    Rng init_rng = rng.stream(9001);
    Rng fit_rng = rng.stream(9002);
    result.value.net.init(fit_data.x_dim(), params, init_rng);
    result.value.net.fit(fit_data, fit_rng);
    return result;
}

// ---------------------------------------------------------------------------
// Inference

RlQuote quote_price_rl(const pipeline::PipelineModels& models, const ValueFn& value,
                       const portfolio::FreqVec& f, const portfolio::MemberMask& member,
                       int t, const CustomerFeatures& c, double cost, double k_lo,
                       double k_hi) {
    RlQuote out;
    const double raw_k = k_value_inference(as_query(value), f, member, cost, t);
    out.k = std::clamp(raw_k, k_lo, k_hi);
    const market::MarketVariables m = models.market.predict(c);
    out.action = std::clamp(models.action.predict(m, out.k), 1.0, 2.0);
    out.price = cost * out.action;
    return out;
}

} // namespace pursuit::rl
