#include "pursuit/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace pursuit {

void write_records_csv(std::ostream& out, const std::vector<InteractionRecord>& records) {
    out << "epoch,t,customer_id,age,region,occupation,vehicle_value,years_licensed,"
           "income,risk_score,cost,our_action,our_price,m1,m3,m5,accepted\n";
    char buf[512];
    for (const auto& r : records) {
        const auto& c = r.customer;
        std::snprintf(buf, sizeof(buf),
                      "%d,%d,%lld,%.12g,%d,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,"
                      "%.12g,%.12g,%.12g,%d\n",
                      r.epoch, r.t, static_cast<long long>(c.customer_id), c.age, c.region,
                      c.occupation, c.vehicle_value, c.years_licensed, c.income, c.risk_score,
                      r.cost, r.action, r.price, r.market_vars.m1, r.market_vars.m3,
                      r.market_vars.m5, r.accepted ? 1 : 0);
        out << buf;
    }
}

} // namespace pursuit

namespace pursuit::market {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

} // namespace

SampledCustomer sample_customer(const EnvParams& env, Rng& rng, std::int64_t customer_id) {
    SampledCustomer out;
    CustomerFeatures& c = out.features;
    c.customer_id = customer_id;

    c.region = rng.categorical({env.region_probs.begin(), env.region_probs.end()});
    const auto& occ_probs =
        (c.region < 4) ? env.occupation_probs_metro : env.occupation_probs_other;
    c.occupation = rng.categorical({occ_probs.begin(), occ_probs.end()});

    c.age = rng.truncated_normal(env.age_mean, env.age_sd, env.age_lo, env.age_hi);
    const double frac = rng.uniform(env.licensed_frac_lo, env.licensed_frac_hi);
    c.years_licensed = frac * (c.age - 18.0); // stays <= age - 17 by construction

    c.vehicle_value = std::clamp(rng.lognormal(env.vehicle_meanlog, env.vehicle_sdlog),
                                 env.vehicle_lo, env.vehicle_hi);

    c.income = env.region_base_income[c.region] * env.occupation_mult[c.occupation] *
               (1.0 + 0.01 * (c.age - 18.0)) * rng.lognormal(0.0, env.income_noise_sdlog);

    const double z_age = (c.age - env.age_mean) / env.age_sd;
    const double z_lic = (c.years_licensed - 14.3) / 9.0;
    const double z_veh = (std::log(c.vehicle_value) - env.vehicle_meanlog) / env.vehicle_sdlog;
    c.risk_score = logistic(env.risk_intercept + env.risk_age * z_age +
                            env.risk_licence * z_lic + env.risk_vehicle * z_veh);

    out.price_sensitivity = rng.lognormal(env.sensitivity_meanlog, env.sensitivity_sdlog);
    return out;
}

double true_cost(const EnvParams& env, const CustomerFeatures& c) {
    const double raw = env.cost_base * (0.5 + c.risk_score) *
                       std::pow(c.vehicle_value / env.cost_vehicle_ref, env.cost_exponent);
    return std::clamp(raw, env.cost_min, env.cost_max);
}

std::vector<CompetitorState> make_competitors(const EnvParams& env, int count, Rng& rng) {
    if (count < 1) throw std::invalid_argument("make_competitors: count must be >= 1");
    std::vector<CompetitorState> states;
    states.reserve(count);
    for (int i = 0; i < count; ++i) {
        CompetitorState s;
        s.insurer_id = i + 1; // id 0 is ours
        s.base_markup = rng.uniform(env.competitor_markup_lo, env.competitor_markup_hi);
        s.noise_scale = env.competitor_noise_scale;
        s.adaptation_rate = env.competitor_adaptation_rate;
        states.push_back(s);
    }
    return states;
}

std::vector<Offer> competitor_offers(const EnvParams& env, const CustomerFeatures& c,
                                     const std::vector<CompetitorState>& states, Rng& rng) {
    if (states.empty()) throw std::invalid_argument("competitor_offers: no competitors");
    const double cost = true_cost(env, c);
    std::vector<Offer> offers;
    offers.reserve(states.size());
    for (const auto& s : states) {
        const double markup = s.base_markup + rng.normal() * s.noise_scale;
        offers.push_back({s.insurer_id, std::max(markup, 0.8) * cost});
    }
    return offers;
}

void adapt_competitors(const EnvParams& env, std::vector<CompetitorState>& states,
                       const EpochSummary& summary, Rng& rng) {
    if (states.empty()) return;
    if (summary.competitor_wins.size() != states.size())
        throw std::invalid_argument("adapt_competitors: summary size mismatch");
    // Winner = most acceptances, first index on ties.
    std::size_t winner = 0;
    for (std::size_t i = 1; i < states.size(); ++i) {
        if (summary.competitor_wins[i] > summary.competitor_wins[winner]) winner = i;
    }
    const double target = states[winner].base_markup;
    for (auto& s : states) {
        const double noise = rng.normal() * env.competitor_adaptation_noise;
        const double moved = s.base_markup + s.adaptation_rate * (target - s.base_markup) + noise;
        s.base_markup = std::clamp(moved, env.markup_band_lo, env.markup_band_hi);
    }
}

namespace {

MarketVariables variables_impl(const std::vector<Offer>& offers, double cost) {
    std::vector<double> prices;
    prices.reserve(offers.size());
    for (const auto& o : offers) prices.push_back(o.price);
    std::sort(prices.begin(), prices.end());
    const auto mean_lowest = [&](std::size_t k) {
        k = std::min(k, prices.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < k; ++i) acc += prices[i];
        return acc / static_cast<double>(k) / cost;
    };
    return {mean_lowest(1), mean_lowest(3), mean_lowest(5)};
}

} // namespace

MarketVariables market_variables(const std::vector<Offer>& offers, double cost) {
    if (offers.size() < 5)
        throw std::invalid_argument("market_variables: need at least 5 offers");
    if (!(cost > 0.0)) throw std::invalid_argument("market_variables: cost must be > 0");
    return variables_impl(offers, cost);
}

MarketVariables market_variables_capped(const std::vector<Offer>& offers, double cost) {
    if (offers.empty())
        throw std::invalid_argument("market_variables_capped: need at least 1 offer");
    if (!(cost > 0.0)) throw std::invalid_argument("market_variables_capped: cost must be > 0");
    return variables_impl(offers, cost);
}

ChoiceOutcome customer_choice(const Offer& ours, const std::vector<Offer>& others,
                              const SampledCustomer& customer, const EnvParams& env,
                              Rng& rng) {
    const double cost = true_cost(env, customer.features);
    const double sens = customer.price_sensitivity;

    // Utilities: index 0 walk-away, 1 ours, 2.. competitors.
    std::vector<double> util;
    util.reserve(others.size() + 2);
    util.push_back(-sens * env.walkaway_ratio);
    util.push_back(-sens * ours.price / cost);
    for (const auto& o : others) util.push_back(-sens * o.price / cost);

    const double max_u = *std::max_element(util.begin(), util.end());
    std::vector<double> weights;
    weights.reserve(util.size());
    for (double u : util) weights.push_back(std::exp(u - max_u));

    const int pick = rng.categorical(weights);
    if (pick == 0) return {std::nullopt};
    if (pick == 1) return {ours.insurer_id};
    return {others[static_cast<std::size_t>(pick - 2)].insurer_id};
}

EpochResult run_epoch(const EnvParams& env, const InsurerPolicy& policy,
                      const std::vector<CompetitorState>& competitors,
                      const std::vector<portfolio::IndicatorSet>& sets, int T,
                      int epoch_index, std::int64_t& customer_id_counter,
                      MarketStreams& streams) {
    if (T < 1) throw std::invalid_argument("run_epoch: T must be >= 1");
    EpochResult out;
    out.freq = portfolio::FreqVec(sets.size());
    out.summary.competitor_wins.assign(competitors.size(), 0);
    out.records.reserve(T);
    out.freq_by_step.reserve(T);

    for (int t = 1; t <= T; ++t) {
        const SampledCustomer customer =
            sample_customer(env, streams.customer, customer_id_counter++);
        const double cost = true_cost(env, customer.features);
        const std::vector<Offer> offers =
            competitor_offers(env, customer.features, competitors, streams.competitor);

        const QuoteDecision quote = policy(customer.features, cost, t, out.freq);
        const Offer our_offer{0, quote.price};
        const ChoiceOutcome outcome =
            customer_choice(our_offer, offers, customer, env, streams.choice);

        InteractionRecord rec;
        rec.customer = customer.features;
        rec.cost = cost;
        rec.action = quote.action;
        rec.price = quote.price;
        rec.competitor_offers = offers;
        rec.market_vars = market_variables_capped(offers, cost);
        rec.epoch = epoch_index;
        rec.t = t;

        if (outcome.chosen_insurer.has_value()) {
            const int winner = *outcome.chosen_insurer;
            if (winner == 0) {
                rec.accepted = true;
                out.summary.our_wins += 1;
                out.profit += cost * (quote.action - 1.0);
                portfolio::add_customer(out.freq, portfolio::membership(sets, customer.features));
            } else {
                for (std::size_t i = 0; i < competitors.size(); ++i) {
                    if (competitors[i].insurer_id == winner) {
                        out.summary.competitor_wins[i] += 1;
                        break;
                    }
                }
            }
        } else {
            out.summary.walkaways += 1;
        }

        out.records.push_back(std::move(rec));
        out.freq_by_step.push_back(out.freq);
    }
    return out;
}

} // namespace pursuit::market
