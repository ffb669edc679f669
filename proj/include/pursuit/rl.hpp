#ifndef PURSUIT_RL_HPP
#define PURSUIT_RL_HPP

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pursuit/models.hpp"
#include "pursuit/pipeline.hpp"
#include "pursuit/portfolio.hpp"
#include "pursuit/record.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::rl {

// ---------------------------------------------------------------------------
// Customer replay buffer

/// One historic customer with everything the backward pass needs: realised
/// market variables, expected cost, indicator membership, and the corrected
/// acceptance-probability grid (cached so the inner loop never re-runs the
/// conversion network).
struct BufferEntry {
    CustomerFeatures features;
    market::MarketVariables market_vars;
    double cost = 0.0;
    portfolio::MemberMask membership;
    std::vector<double> conversion_grid;
};

struct CustomerReplayBuffer {
    std::vector<BufferEntry> entries;
    bool empty() const { return entries.empty(); }
    std::size_t size() const { return entries.size(); }
};

CustomerReplayBuffer build_replay_buffer(const std::vector<InteractionRecord>& records,
                                         const std::vector<portfolio::IndicatorSet>& sets,
                                         const models::ConversionModel* conversion);

// ---------------------------------------------------------------------------
// Value functions

/// Next-step value function U. Starts as the exact boundary value
/// -lambda * loss(f, f*) and becomes a linear model after the first refit.
/// A tabular mode (single indicator, counts as indices) backs the exact
/// backward-induction oracle.
class NextStepValueFn {
public:
    static NextStepValueFn boundary(double lambda, portfolio::TargetPortfolio target);
    static NextStepValueFn linear(std::vector<double> weights, double bias);
    static NextStepValueFn table_fn(std::vector<double> table);

    double operator()(const portfolio::FreqVec& f) const;
    bool is_linear() const { return mode_ == Mode::Linear; }
    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }

private:
    enum class Mode { Boundary, Linear, Table };
    Mode mode_ = Mode::Boundary;
    double lambda_ = 0.0;
    portfolio::TargetPortfolio target_;
    std::vector<double> weights_;
    double bias_ = 0.0;
    std::vector<double> table_;
};

/// Ridge-regularised least squares of values on frequency counts.
NextStepValueFn refit_next_step(const std::vector<portfolio::FreqVec>& portfolios,
                                const std::vector<double>& values, double ridge = 1e-6);

/// Inference value function V_phi: an MLP over (f / T, t / T).
class ValueFn {
public:
    double operator()(const portfolio::FreqVec& f, int t) const;

    models::Mlp net;
    int horizon = 1;  // T
    int indicators = 0;
};

/// Generic value query used by the k-value operations so tests can plug in
/// hand-built functions.
using ValueQuery = std::function<double(const portfolio::FreqVec& f, int t)>;

ValueQuery as_query(const ValueFn& v);

// ---------------------------------------------------------------------------
// k-values

/// k = 1 - (U(f + member) - U(f)) / cost.
double k_value(const NextStepValueFn& u, const portfolio::FreqVec& f,
               const portfolio::MemberMask& member, double cost);

/// k = 1 - (V(f + member, t + 1) - V(f, t + 1)) / cost.
double k_value_inference(const ValueQuery& v, const portfolio::FreqVec& f,
                         const portfolio::MemberMask& member, double cost, int t);

/// Independent per-customer lapse: each frequency count thins as
/// Binomial(f_i, 1 - q) between steps. q = 0 recovers the base model.
struct LapseModel {
    double q = 0.0;
};

/// Appendix-style k with expectations over the lapse transition, both
/// approximated by n_mc Monte-Carlo thinnings with common random numbers.
double k_value_leaving(const ValueQuery& v, const portfolio::FreqVec& f,
                       const portfolio::MemberMask& member, double cost, int t,
                       const LapseModel& lapse, int n_mc, Rng& rng);

// ---------------------------------------------------------------------------
// Portfolio samplers

struct SamplerConfig {
    double sigma = 0.9;
    int T = 1;
    std::vector<double> p_bar;  // historic per-step acquisition rates
    std::vector<double> p_star; // target rates f* / T
    std::vector<double> p_max;  // derived: (1 + sigma) max(p*, p_bar)
    std::vector<double> p_min;  // derived: (1 - sigma) min(p*, p_bar)

    static SamplerConfig make(double sigma, int T, std::vector<double> p_bar,
                              std::vector<double> p_star);
};

/// Component i ~ Binomial(t, min(1, p_bar_i + 1/T)).
portfolio::FreqVec sample_previously_on_policy(const std::vector<double>& p_bar, int t, int T,
                                               Rng& rng);
/// Component i ~ Binomial(t, min(1, p_star_i)); no +1/T, target rates are
/// already strictly positive.
portfolio::FreqVec sample_target_on_policy(const std::vector<double>& p_star, int t, Rng& rng);
/// Evenly spaced interpolants between t * p_min and t * p_max, fractional
/// parts resolved by a Bernoulli draw per component.
std::vector<portfolio::FreqVec> sample_high_coverage(const SamplerConfig& cfg, int t, int count,
                                                     Rng& rng);
/// 1:1:2 mixture of the three samplers (previously : target : high-coverage).
std::vector<portfolio::FreqVec> sample_portfolios(const SamplerConfig& cfg, int t, int J,
                                                  Rng& rng);

// ---------------------------------------------------------------------------
// Value-function training

/// Policy and conversion hooks; production adapters wrap the fitted models,
/// oracle tests wrap exact tabular functions.
using PolicyFn = std::function<double(const market::MarketVariables& m, double k)>;
using ConversionFn = std::function<double(const BufferEntry& entry, double action)>;

PolicyFn policy_from_model(const models::ActionModel& action, double k_lo = 0.5,
                           double k_hi = 1.5);
ConversionFn conversion_from_grid();

struct ValueEstimateRow {
    portfolio::FreqVec f;
    int t = 0;
    double v_raw = 0.0;
    double v_centred = 0.0;
};

struct ValueEstimateDataset {
    std::vector<ValueEstimateRow> rows;
    int indicators = 0;
    void to_csv(std::ostream& out) const;
};

struct ValueTrainConfig {
    int N = 500;      // buffer draws per portfolio
    int J = 24;       // portfolios for the refit
    int J_plus = 120; // augmenting portfolios
    double lambda = 2000.0;
    int T = 1000;
    SamplerConfig sampler;
    double k_clamp_lo = 0.5, k_clamp_hi = 1.5;
    LapseModel lapse;    // q = 0 -> base recursion
    int lapse_n_mc = 64; // thinning draws per expectation

    // MLP for V_phi
    int v_hidden = 32;
    double v_learning_rate = 0.01;
    int v_epochs = 300;
    int v_batch = 64;

    // Oracle hooks: averaging the whole buffer instead of sampling, a fixed
    // enumerated portfolio set, and an exact tabular refit of U (requires a
    // single indicator).
    bool exact_expectation = false;
    std::optional<std::vector<portfolio::FreqVec>> enumerate_portfolios;
    bool tabular_u = false;
};

/// One backward-induction step: value estimates for the given portfolios
/// using the current next-step model. With lapse q > 0 this is the leaving
/// recursion (expected next-step value via thinning Monte Carlo).
std::vector<double> value_estimates_for_portfolios(
    const NextStepValueFn& u, const PolicyFn& policy, const ConversionFn& conversion,
    const CustomerReplayBuffer& buffer, const std::vector<portfolio::FreqVec>& portfolios,
    const ValueTrainConfig& cfg, Rng& rng);

/// Leaving-recursion step with internally sampled portfolios; returns
/// (portfolio, estimate) pairs.
std::vector<std::pair<portfolio::FreqVec, double>> value_recursion_leaving(
    const NextStepValueFn& u, const PolicyFn& policy, const ConversionFn& conversion,
    const CustomerReplayBuffer& buffer, const LapseModel& lapse, int t,
    const ValueTrainConfig& cfg, Rng& rng);

struct TrainResult {
    ValueFn value;
    ValueEstimateDataset dataset;
    /// Tabular mode only: the refit U table per timestep, t = T..1 in
    /// reverse order (tabular_values[T - t] approximates V(., t)).
    std::vector<std::vector<double>> tabular_values;
};

/// Backward sweep t = T..1: sample portfolios, estimate their values through
/// the conversion-weighted one-step recursion, refit U, value an augmenting
/// set, recentre per timestep, and finally fit V_phi to the centred values.
TrainResult train_value_function(const PolicyFn& policy, const ConversionFn& conversion,
                                 const CustomerReplayBuffer& buffer,
                                 const portfolio::TargetPortfolio& target,
                                 const ValueTrainConfig& cfg, Rng& rng);

// ---------------------------------------------------------------------------
// Inference

struct RlQuote {
    double action = 1.0;
    double price = 0.0;
    double k = 1.0;
};

/// k from the value function at t+1 (clamped to the trained support), action
/// from the k-aware policy on predicted market variables, clamped to [1, 2].
RlQuote quote_price_rl(const pipeline::PipelineModels& models, const ValueFn& value,
                       const portfolio::FreqVec& f, const portfolio::MemberMask& member,
                       int t, const CustomerFeatures& c, double cost, double k_lo = 0.5,
                       double k_hi = 1.5);

} // namespace pursuit::rl

#endif
