#ifndef PURSUIT_PORTFOLIO_HPP
#define PURSUIT_PORTFOLIO_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pursuit/customer.hpp"
#include "pursuit/rng.hpp"

namespace pursuit::portfolio {

/// Predicate over a single customer feature: an inclusive interval for
/// numeric features or a value set for categorical ones.
struct IndicatorSet {
    enum class Kind { Interval, ValueSet };
    std::string feature;
    Kind kind = Kind::Interval;
    double lo = 0.0;
    double hi = 0.0;
    std::vector<int> values;

    bool contains(const CustomerFeatures& c) const;
};

/// Frequency representation of a portfolio: counts over the indicator sets.
struct FreqVec {
    std::vector<int> counts;

    FreqVec() = default;
    explicit FreqVec(std::size_t size) : counts(size, 0) {}

    std::size_t size() const { return counts.size(); }
    int& operator[](std::size_t i) { return counts[i]; }
    int operator[](std::size_t i) const { return counts[i]; }
    bool operator==(const FreqVec&) const = default;
};

struct TargetPortfolio {
    std::vector<int> target; // every component >= 1
};

using MemberMask = std::vector<std::uint8_t>;

/// Component i is 1 iff the customer belongs to set i.
MemberMask membership(const std::vector<IndicatorSet>& sets, const CustomerFeatures& c);

/// Increment counts where the mask is set.
void add_customer(FreqVec& f, const MemberMask& member);
/// Non-mutating variant, used when valuing hypothetical portfolios.
FreqVec with_customer(const FreqVec& f, const MemberMask& member);

/// Mean absolute relative discrepancy, (1/I) sum |f_i - f*_i| / max(f_i, f*_i),
/// in [0, 1], symmetric, zero iff equal. A 0/0 component contributes 0.
double loss(const FreqVec& f, const TargetPortfolio& target);
double loss(const std::vector<int>& f, const std::vector<int>& target);

/// Target counts from historic per-epoch mean frequencies: double when the
/// mean is small (<= 10), otherwise double or halve at random, rounding up
/// and down respectively; forced >= 1.
TargetPortfolio generate_target(const std::vector<double>& hist_freq, Rng& rng);

/// Draw `count` indicator sets over distinct features chosen uniformly.
/// Numeric features get an interval between two random quantiles of the
/// reference sample's marginal; categorical features a random nonempty value
/// subset.
std::vector<IndicatorSet> make_indicator_sets(const std::vector<CustomerFeatures>& reference,
                                              int count, Rng& rng);

/// Feature names indicator sets may draw from.
const std::vector<std::string>& indicator_features();

} // namespace pursuit::portfolio

#endif
