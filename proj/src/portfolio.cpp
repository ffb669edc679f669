#include "pursuit/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pursuit::portfolio {

namespace {

struct FeatureInfo {
    std::string name;
    bool categorical;
    int cardinality; // categorical only
};

const std::vector<FeatureInfo>& feature_table() {
    static const std::vector<FeatureInfo> table = {
        {"age", false, 0},
        {"region", true, kRegionCount},
        {"occupation", true, kOccupationCount},
        {"vehicle_value", false, 0},
        {"years_licensed", false, 0},
        {"income", false, 0},
        {"risk_score", false, 0},
    };
    return table;
}

double numeric_value(const CustomerFeatures& c, const std::string& name) {
    if (name == "age") return c.age;
    if (name == "vehicle_value") return c.vehicle_value;
    if (name == "years_licensed") return c.years_licensed;
    if (name == "income") return c.income;
    if (name == "risk_score") return c.risk_score;
    throw std::invalid_argument("unknown numeric feature: " + name);
}

int categorical_value(const CustomerFeatures& c, const std::string& name) {
    if (name == "region") return c.region;
    if (name == "occupation") return c.occupation;
    throw std::invalid_argument("unknown categorical feature: " + name);
}

} // namespace

const std::vector<std::string>& indicator_features() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& f : feature_table()) v.push_back(f.name);
        return v;
    }();
    return names;
}

bool IndicatorSet::contains(const CustomerFeatures& c) const {
    if (kind == Kind::Interval) {
        const double v = numeric_value(c, feature);
        return v >= lo && v <= hi;
    }
    const int v = categorical_value(c, feature);
    return std::find(values.begin(), values.end(), v) != values.end();
}

MemberMask membership(const std::vector<IndicatorSet>& sets, const CustomerFeatures& c) {
    MemberMask mask(sets.size(), 0);
    for (std::size_t i = 0; i < sets.size(); ++i) {
        mask[i] = sets[i].contains(c) ? 1 : 0;
    }
    return mask;
}

void add_customer(FreqVec& f, const MemberMask& member) {
    if (f.size() != member.size())
        throw std::invalid_argument("add_customer: length mismatch");
    for (std::size_t i = 0; i < member.size(); ++i) f[i] += member[i];
}

FreqVec with_customer(const FreqVec& f, const MemberMask& member) {
    FreqVec out = f;
    add_customer(out, member);
    return out;
}

double loss(const std::vector<int>& f, const std::vector<int>& target) {
    if (f.size() != target.size())
        throw std::invalid_argument("loss: length mismatch");
    if (f.empty()) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const int hi = std::max(f[i], target[i]);
        if (hi == 0) continue; // 0/0 component contributes nothing
        acc += std::abs(f[i] - target[i]) / static_cast<double>(hi);
    }
    return acc / static_cast<double>(f.size());
}

double loss(const FreqVec& f, const TargetPortfolio& target) {
    return loss(f.counts, target.target);
}

TargetPortfolio generate_target(const std::vector<double>& hist_freq, Rng& rng) {
    TargetPortfolio out;
    out.target.reserve(hist_freq.size());
    for (double fbar : hist_freq) {
        if (fbar < 0.0) throw std::invalid_argument("generate_target: negative frequency");
        int t;
        if (fbar <= 10.0) {
            t = static_cast<int>(std::ceil(2.0 * fbar));
        } else if (rng.bernoulli(0.5)) {
            t = static_cast<int>(std::ceil(2.0 * fbar));
        } else {
            t = static_cast<int>(std::floor(fbar / 2.0));
        }
        out.target.push_back(std::max(1, t));
    }
    return out;
}

std::vector<IndicatorSet> make_indicator_sets(const std::vector<CustomerFeatures>& reference,
                                              int count, Rng& rng) {
    const auto& table = feature_table();
    if (count < 1 || count > static_cast<int>(table.size()))
        throw std::invalid_argument("make_indicator_sets: count out of range");
    if (reference.empty())
        throw std::invalid_argument("make_indicator_sets: empty reference sample");

    // Distinct features, uniform order via partial Fisher-Yates.
    std::vector<int> idx(table.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.uniform_int(idx.size() - i));
        std::swap(idx[i], idx[j]);
    }

    std::vector<IndicatorSet> sets;
    sets.reserve(count);
    for (int i = 0; i < count; ++i) {
        const FeatureInfo& info = table[idx[i]];
        IndicatorSet s;
        s.feature = info.name;
        if (info.categorical) {
            s.kind = IndicatorSet::Kind::ValueSet;
            while (s.values.empty()) {
                for (int v = 0; v < info.cardinality; ++v) {
                    if (rng.bernoulli(0.5)) s.values.push_back(v);
                }
            }
        } else {
            s.kind = IndicatorSet::Kind::Interval;
            std::vector<double> vals;
            vals.reserve(reference.size());
            for (const auto& c : reference) vals.push_back(numeric_value(c, info.name));
            std::sort(vals.begin(), vals.end());
            // Two distinct levels from {0.05, 0.10, ..., 0.95}.
            const int levels = 19;
            int a = static_cast<int>(rng.uniform_int(levels));
            int b = static_cast<int>(rng.uniform_int(levels - 1));
            if (b >= a) ++b;
            if (a > b) std::swap(a, b);
            const auto quantile = [&](int level) {
                const double q = 0.05 * (level + 1);
                const auto pos = static_cast<std::size_t>(q * (vals.size() - 1));
                return vals[pos];
            };
            s.lo = quantile(a);
            s.hi = quantile(b);
        }
        sets.push_back(std::move(s));
    }
    return sets;
}

} // namespace pursuit::portfolio
