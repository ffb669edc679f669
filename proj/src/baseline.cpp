#include "pursuit/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pursuit::baseline {

HistoricRates historic_frequency(const std::vector<portfolio::FreqVec>& epoch_freqs) {
    if (epoch_freqs.empty())
        throw std::invalid_argument("historic_frequency: no epochs");
    const std::size_t size = epoch_freqs[0].size();
    HistoricRates rates;
    rates.f_bar.assign(size, 0.0);
    for (const auto& f : epoch_freqs) {
        if (f.size() != size)
            throw std::invalid_argument("historic_frequency: size mismatch");
        for (std::size_t i = 0; i < size; ++i) rates.f_bar[i] += f[i];
    }
    for (auto& v : rates.f_bar) v /= static_cast<double>(epoch_freqs.size());
    return rates;
}

double g(double z, const BaselineParams& p) {
    if (!(z > 0.0)) throw std::domain_error("g: z must be > 0");
    const double zn = std::pow(z, p.n);
    return 1.0 + p.beta * (zn - 1.0) / (zn + 1.0);
}

double modulation_factor(const portfolio::MemberMask& member, const HistoricRates& rates,
                         const portfolio::TargetPortfolio& target, const BaselineParams& p) {
    if (member.size() != rates.f_bar.size() || member.size() != target.target.size())
        throw std::invalid_argument("modulation_factor: size mismatch");
    double factor = 1.0;
    for (std::size_t i = 0; i < member.size(); ++i) {
        if (!member[i]) continue;
        if (target.target[i] < 1)
            throw std::invalid_argument("modulation_factor: target must be >= 1");
        // A category never seen historically gets the strongest discount.
        const double ratio = std::max(rates.f_bar[i], 1e-12) / target.target[i];
        factor *= g(ratio, p);
    }
    return factor;
}

double modulation_factor(const CustomerFeatures& c,
                         const std::vector<portfolio::IndicatorSet>& sets,
                         const HistoricRates& rates, const portfolio::TargetPortfolio& target,
                         const BaselineParams& p) {
    return modulation_factor(portfolio::membership(sets, c), rates, target, p);
}

std::vector<BaselineParams> default_grid() {
    std::vector<BaselineParams> grid;
    for (double n : {0.5, 1.0, 2.0})
        for (double beta : {0.02, 0.05, 0.1, 0.25}) grid.push_back({n, beta});
    return grid;
}

GridSearchResult grid_search_params(const std::vector<BaselineParams>& grid,
                                    const pipeline::PipelineModels& models,
                                    const rl::CustomerReplayBuffer& buffer,
                                    const HistoricRates& rates,
                                    const portfolio::TargetPortfolio& target, double lambda,
                                    int eval_budget, Rng& rng) {
    if (grid.empty()) throw std::invalid_argument("grid_search_params: empty grid");
    if (buffer.empty()) throw std::invalid_argument("grid_search_params: empty buffer");
    if (eval_budget < 1) throw std::invalid_argument("grid_search_params: bad eval budget");

    // Base actions use the inference path (predicted market variables); the
    // acceptance oracle uses the realised ones. Both are candidate
    // independent, so compute once.
    std::vector<double> base_action(buffer.size());
    for (std::size_t i = 0; i < buffer.size(); ++i)
        base_action[i] = models.action.predict(models.market.predict(buffer.entries[i].features));

    GridSearchResult result;
    result.scores.reserve(grid.size());
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const BaselineParams& p = grid[gi];
        Rng eval = rng.stream(7100); // same stream per candidate: common random numbers
        double expected_profit = 0.0;
        portfolio::FreqVec freq(target.target.size());
        for (int step = 0; step < eval_budget; ++step) {
            const std::size_t idx = eval.uniform_int(buffer.size());
            const rl::BufferEntry& e = buffer.entries[idx];
            const double factor = modulation_factor(e.membership, rates, target, p);
            const double a = std::clamp(base_action[idx] * factor, 0.9, 2.2);
            const double pacc = models::ConversionModel::interpolate_grid(e.conversion_grid, a);
            expected_profit += e.cost * (a - 1.0) * pacc;
            if (eval.bernoulli(pacc)) portfolio::add_customer(freq, e.membership);
        }
        const double score = expected_profit - lambda * portfolio::loss(freq, target);
        result.scores.push_back(score);
        if (score > best) {
            best = score;
            result.chosen = p;
        }
    }
    return result;
}

} // namespace pursuit::baseline
