#ifndef PURSUIT_BASELINE_HPP
#define PURSUIT_BASELINE_HPP

#include <vector>

#include "pursuit/pipeline.hpp"
#include "pursuit/portfolio.hpp"
#include "pursuit/rl.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::baseline {

struct BaselineParams {
    double n = 1.0;
    double beta = 0.02;
};

/// Mean terminal frequency representation over unmodulated historic epochs.
struct HistoricRates {
    std::vector<double> f_bar;
};

HistoricRates historic_frequency(const std::vector<portfolio::FreqVec>& epoch_freqs);

/// g(z) = 1 + beta (z^n - 1) / (z^n + 1); increasing, bounded in
/// [1 - beta, 1 + beta], g(1) = 1. z must be positive.
double g(double z, const BaselineParams& p);

/// Product of g(f_bar_i / f*_i) over the indicator sets containing the
/// customer; 1 for customers in no set.
double modulation_factor(const portfolio::MemberMask& member, const HistoricRates& rates,
                         const portfolio::TargetPortfolio& target, const BaselineParams& p);
double modulation_factor(const CustomerFeatures& c,
                         const std::vector<portfolio::IndicatorSet>& sets,
                         const HistoricRates& rates, const portfolio::TargetPortfolio& target,
                         const BaselineParams& p);

/// The grid the parameters are searched over.
std::vector<BaselineParams> default_grid();

struct GridSearchResult {
    BaselineParams chosen;
    std::vector<double> scores; // aligned with the candidate grid
};

/// Offline model-based evaluation: one simulated epoch per candidate against
/// frozen models, scoring expected conversion profit minus lambda * loss.
/// Acceptances for the portfolio term are drawn with common random numbers
/// across candidates.
GridSearchResult grid_search_params(const std::vector<BaselineParams>& grid,
                                    const pipeline::PipelineModels& models,
                                    const rl::CustomerReplayBuffer& buffer,
                                    const HistoricRates& rates,
                                    const portfolio::TargetPortfolio& target, double lambda,
                                    int eval_budget, Rng& rng);

} // namespace pursuit::baseline

#endif
