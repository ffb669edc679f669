#include "pursuit/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace pursuit::pipeline {

PipelineModels train_pipeline(const std::vector<InteractionRecord>& history, int window_epochs,
                              bool k_aware_action, Rng& rng) {
    if (history.empty()) throw std::invalid_argument("train_pipeline: empty history");
    if (window_epochs < 1) throw std::invalid_argument("train_pipeline: window must be >= 1");

    int max_epoch = history[0].epoch;
    for (const auto& r : history) max_epoch = std::max(max_epoch, r.epoch);
    const int lo_epoch = max_epoch - window_epochs + 1; // clamps below min simply by matching nothing earlier

    models::Dataset market_data;
    models::Dataset conversion_data;
    std::vector<market::MarketVariables> market_samples;
    for (const auto& r : history) {
        if (r.epoch < lo_epoch) continue;
        const auto& mv = r.market_vars;
        market_data.add(models::FeatureEncoder::encode(r.customer), {mv.m1, mv.m3, mv.m5});
        conversion_data.add({mv.m1, mv.m3, mv.m5, r.action}, {r.accepted ? 1.0 : 0.0});
        market_samples.push_back(mv);
    }

    PipelineModels out;
    try {
        Rng forest_rng = rng.stream(1);
        out.market = models::fit_market_model(market_data, forest_rng);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("train_pipeline: market model: ") + e.what());
    }
    try {
        Rng conv_rng = rng.stream(2);
        out.conversion = models::fit_conversion_model(conversion_data, conv_rng);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("train_pipeline: conversion model: ") + e.what());
    }
    try {
        Rng action_rng = rng.stream(3);
        out.action = k_aware_action
                         ? models::fit_action_model_k(out.conversion, market_samples, action_rng)
                         : models::fit_action_model_plain(out.conversion, market_samples,
                                                          action_rng);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("train_pipeline: action model: ") + e.what());
    }
    return out;
}

const std::array<double, 6>& exploration_factors() {
    static const std::array<double, 6> factors{0.93, 0.95, 0.97, 1.03, 1.05, 1.07};
    return factors;
}

Quote quote_price(const PipelineModels& models, const CustomerFeatures& c, double cost,
                  Rng& rng, bool explore, double exploration_rate) {
    Quote q;
    const market::MarketVariables m = models.market.predict(c);
    q.action = models.action.predict(m);
    if (explore && rng.uniform() < exploration_rate) {
        const auto& factors = exploration_factors();
        q.factor = factors[rng.uniform_int(factors.size())];
        q.explored = true;
        q.action = std::clamp(q.action * q.factor, 0.9, 2.2);
    }
    q.price = cost * q.action;
    return q;
}

Quote random_policy_quote(double cost, Rng& rng) {
    Quote q;
    q.action = rng.uniform(1.0, 1.2);
    q.price = cost * q.action;
    return q;
}

} // namespace pursuit::pipeline
