#ifndef PURSUIT_PIPELINE_HPP
#define PURSUIT_PIPELINE_HPP

#include <array>
#include <vector>

#include "pursuit/models.hpp"
#include "pursuit/record.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::pipeline {

/// The three models of the standard method, fitted from one training window.
struct PipelineModels {
    models::MarketModel market;
    models::ConversionModel conversion;
    models::ActionModel action;
};

/// Fit market, conversion, and action models on the trailing `window_epochs`
/// epochs of history (clamped to what exists). The action model is the plain
/// m -> a variant unless `k_aware_action` is set.
PipelineModels train_pipeline(const std::vector<InteractionRecord>& history, int window_epochs,
                              bool k_aware_action, Rng& rng);

struct Quote {
    double action = 1.0;
    double price = 0.0;
    bool explored = false;
    double factor = 1.0;
};

const std::array<double, 6>& exploration_factors();

/// m = M(s); a = pi(m); with probability `exploration_rate` (when exploring)
/// the action is multiplied by a factor drawn uniformly from the six
/// modulation factors, then clamped to [0.9, 2.2]. Exploration is the only
/// stochastic element: with explore=false no draws are consumed at all.
Quote quote_price(const PipelineModels& models, const CustomerFeatures& c, double cost,
                  Rng& rng, bool explore, double exploration_rate = 0.12);

/// Burn-in epoch 1 policy: a ~ Uniform[1, 1.2].
Quote random_policy_quote(double cost, Rng& rng);

} // namespace pursuit::pipeline

#endif
