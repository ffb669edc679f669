#include "pursuit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pursuit::stats {

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Midranks of the pooled sample, returned per element (a first, then b),
/// plus the tie correction term sum(t^3 - t).
void midranks(const std::vector<double>& a, const std::vector<double>& b,
              std::vector<double>& ranks_a, double& tie_term) {
    const std::size_t n = a.size() + b.size();
    std::vector<std::pair<double, std::size_t>> pooled;
    pooled.reserve(n);
    for (std::size_t i = 0; i < a.size(); ++i) pooled.emplace_back(a[i], i);
    for (std::size_t i = 0; i < b.size(); ++i) pooled.emplace_back(b[i], a.size() + i);
    std::sort(pooled.begin(), pooled.end());

    std::vector<double> rank(n, 0.0);
    tie_term = 0.0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[j + 1].first == pooled[i].first) ++j;
        const double mid = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[pooled[k].second] = mid;
        const double t = static_cast<double>(j - i + 1);
        tie_term += t * t * t - t;
        i = j + 1;
    }
    ranks_a.assign(rank.begin(), rank.begin() + a.size());
}

/// Counts of subsets with rank sum <= / >= the observed one, over all ways
/// of assigning n_a of the pooled ranks to the first group.
struct ExactCounts {
    double le = 0.0, ge = 0.0, total = 0.0;
};

void enumerate_subsets(const std::vector<double>& ranks, std::size_t start, std::size_t left,
                       double sum, double observed, ExactCounts& counts) {
    if (left == 0) {
        counts.total += 1.0;
        if (sum <= observed + 1e-9) counts.le += 1.0;
        if (sum >= observed - 1e-9) counts.ge += 1.0;
        return;
    }
    if (ranks.size() - start < left) return;
    enumerate_subsets(ranks, start + 1, left - 1, sum + ranks[start], observed, counts);
    enumerate_subsets(ranks, start + 1, left, sum, observed, counts);
}

} // namespace

MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                 Alternative alt) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("mann_whitney_u: samples must be nonempty");
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());

    std::vector<double> ranks_a;
    double tie_term = 0.0;
    midranks(a, b, ranks_a, tie_term);
    double rank_sum = 0.0;
    for (double r : ranks_a) rank_sum += r;

    MannWhitneyResult res;
    res.u = rank_sum - n1 * (n1 + 1.0) / 2.0;

    const std::size_t n = a.size() + b.size();
    if (n <= 20) {
        res.exact = true;
        std::vector<double> pooled_ranks;
        double unused = 0.0;
        {
            // All pooled midranks in one vector: ranks of a, then of b.
            std::vector<double> ranks_b;
            midranks(b, a, ranks_b, unused);
            pooled_ranks = ranks_a;
            pooled_ranks.insert(pooled_ranks.end(), ranks_b.begin(), ranks_b.end());
        }
        ExactCounts counts;
        enumerate_subsets(pooled_ranks, 0, a.size(), 0.0, rank_sum, counts);
        const double p_le = counts.le / counts.total;
        const double p_ge = counts.ge / counts.total;
        switch (alt) {
            case Alternative::Less: res.p = p_le; break;
            case Alternative::Greater: res.p = p_ge; break;
            case Alternative::TwoSided: res.p = std::min(1.0, 2.0 * std::min(p_le, p_ge)); break;
        }
        return res;
    }

    const double total_n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    double var = n1 * n2 / 12.0 *
                 ((total_n + 1.0) - tie_term / (total_n * (total_n - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0; // all values identical
        return res;
    }
    const double sd = std::sqrt(var);
    const double p_less = normal_cdf((res.u - mu + 0.5) / sd);
    const double p_greater = normal_sf((res.u - mu - 0.5) / sd);
    switch (alt) {
        case Alternative::Less: res.p = p_less; break;
        case Alternative::Greater: res.p = p_greater; break;
        case Alternative::TwoSided:
            res.p = std::min(1.0, 2.0 * std::min(p_less, p_greater));
            break;
    }
    return res;
}

double cohens_d(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw std::invalid_argument("cohens_d: need at least 2 values per sample");
    const auto mean = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double x : v) m += x;
        return m / static_cast<double>(v.size());
    };
    const auto var = [&](const std::vector<double>& v, double m) {
        double acc = 0.0;
        for (double x : v) acc += (x - m) * (x - m);
        return acc / static_cast<double>(v.size() - 1);
    };
    const double ma = mean(a), mb = mean(b);
    const double va = var(a, ma), vb = var(b, mb);
    const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    const double pooled = std::sqrt(((n1 - 1.0) * va + (n2 - 1.0) * vb) / (n1 + n2 - 2.0));
    if (pooled <= 0.0) throw std::domain_error("cohens_d: zero pooled standard deviation");
    return (ma - mb) / pooled;
}

double cles(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("cles: samples must be nonempty");
    double wins = 0.0;
    for (double x : a) {
        for (double y : b) {
            if (x > y) wins += 1.0;
            else if (x == y) wins += 0.5;
        }
    }
    return wins / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

} // namespace pursuit::stats
