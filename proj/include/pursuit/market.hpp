#ifndef PURSUIT_MARKET_HPP
#define PURSUIT_MARKET_HPP

#include <array>
#include <functional>
#include <optional>
#include <vector>

#include "pursuit/customer.hpp"
#include "pursuit/portfolio.hpp"
#include "pursuit/record.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::market {

/// Generative and behavioural parameters of the synthetic market. The
/// customer model is hierarchical: region drives occupation and base income;
/// income additionally scales with age; risk score is a logistic of a linear
/// score in age, licence tenure, and (log) vehicle value.
struct EnvParams {
    std::array<double, kRegionCount> region_probs{
        0.16, 0.14, 0.14, 0.12, 0.12, 0.12, 0.10, 0.10};
    std::array<double, kRegionCount> region_base_income{
        34000, 31000, 29500, 27000, 26000, 24500, 23000, 21500};
    // Two occupation mixes: metropolitan regions (0..3) and the rest.
    std::array<double, kOccupationCount> occupation_probs_metro{
        0.25, 0.20, 0.20, 0.15, 0.12, 0.08};
    std::array<double, kOccupationCount> occupation_probs_other{
        0.10, 0.15, 0.20, 0.20, 0.20, 0.15};
    std::array<double, kOccupationCount> occupation_mult{
        1.45, 1.25, 1.10, 1.00, 0.90, 0.80};

    double age_mean = 40.0, age_sd = 13.0, age_lo = 18.0, age_hi = 90.0;
    double licensed_frac_lo = 0.3, licensed_frac_hi = 1.0;
    double vehicle_meanlog = 9.6, vehicle_sdlog = 0.5;
    double vehicle_lo = 1000.0, vehicle_hi = 200000.0;
    double income_noise_sdlog = 0.25;
    double risk_intercept = 0.0, risk_age = 0.55, risk_licence = -0.45, risk_vehicle = 0.40;

    double cost_base = 260.0;       // c0
    double cost_vehicle_ref = 15000.0; // v0
    double cost_exponent = 0.3;
    double cost_min = 60.0, cost_max = 1500.0;

    double sensitivity_meanlog = 2.0794415416798357; // log(8)
    double sensitivity_sdlog = 0.3;
    double walkaway_ratio = 1.3; // w: walk-away utility reference price / cost

    double competitor_markup_lo = 1.05, competitor_markup_hi = 1.35;
    double markup_band_lo = 1.02, markup_band_hi = 1.40;
    double competitor_noise_scale = 0.04;
    double competitor_adaptation_rate = 0.2;
    double competitor_adaptation_noise = 0.01;
};

/// A generated customer: public features plus attributes hidden from all
/// insurers. Only `features` may be logged or fed to models.
struct SampledCustomer {
    CustomerFeatures features;
    double price_sensitivity = 1.0;
};

struct CompetitorState {
    int insurer_id = 0;
    double base_markup = 1.1;
    double noise_scale = 0.04;
    double adaptation_rate = 0.2;
};

/// Walk-away is represented by an empty optional.
struct ChoiceOutcome {
    std::optional<int> chosen_insurer;
};

/// Acceptance counts by insurer over one epoch; drives competitor adaptation.
struct EpochSummary {
    std::vector<int> competitor_wins; // index aligned with competitor list
    int our_wins = 0;
    int walkaways = 0;
};

SampledCustomer sample_customer(const EnvParams& env, Rng& rng, std::int64_t customer_id);

/// Deterministic expected cost C(s) > 0.
double true_cost(const EnvParams& env, const CustomerFeatures& c);

std::vector<CompetitorState> make_competitors(const EnvParams& env, int count, Rng& rng);

/// One offer per competitor at C(s) * (markup + noise), floored at 0.8 C(s).
std::vector<Offer> competitor_offers(const EnvParams& env, const CustomerFeatures& c,
                                     const std::vector<CompetitorState>& states, Rng& rng);

/// Markups drift toward the epoch's highest-market-share competitor.
void adapt_competitors(const EnvParams& env, std::vector<CompetitorState>& states,
                       const EpochSummary& summary, Rng& rng);

/// m_k = mean of the k lowest offer prices / cost. Requires at least five
/// offers; use market_variables_capped when the market is configured smaller.
MarketVariables market_variables(const std::vector<Offer>& offers, double cost);
/// Same, with k capped at the number of offers (m5 falls back to the mean of
/// all offers when fewer than five exist). Identical to market_variables for
/// five or more offers.
MarketVariables market_variables_capped(const std::vector<Offer>& offers, double cost);

/// Multinomial logit over {walk away, our offer, competitor offers} with
/// utility -sensitivity * price / C(s) per offer and -sensitivity * w for
/// walking away. Consumes exactly one uniform draw per call.
ChoiceOutcome customer_choice(const Offer& ours, const std::vector<Offer>& others,
                              const SampledCustomer& customer, const EnvParams& env,
                              Rng& rng);

/// Our quote for one customer.
struct QuoteDecision {
    double action = 1.0; // price / C(s)
    double price = 0.0;
};

using InsurerPolicy = std::function<QuoteDecision(
    const CustomerFeatures& customer, double cost, int t, const portfolio::FreqVec& freq)>;

/// Independent streams for one trial's market randomness. Draw counts per
/// interaction are fixed, so runs that differ only in our own pricing see
/// identical customers, competitor noise, and choice draws.
struct MarketStreams {
    Rng customer;
    Rng competitor;
    Rng choice;
};

struct EpochResult {
    std::vector<InteractionRecord> records;
    portfolio::FreqVec freq;
    double profit = 0.0;
    EpochSummary summary;
    std::vector<portfolio::FreqVec> freq_by_step; // portfolio after each step
};

/// T customer interactions. The frequency vector starts empty; accepted
/// customers accumulate into it. Deterministic given the streams.
EpochResult run_epoch(const EnvParams& env, const InsurerPolicy& policy,
                      const std::vector<CompetitorState>& competitors,
                      const std::vector<portfolio::IndicatorSet>& sets, int T,
                      int epoch_index, std::int64_t& customer_id_counter,
                      MarketStreams& streams);

} // namespace pursuit::market

#endif
