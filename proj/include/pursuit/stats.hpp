#ifndef PURSUIT_STATS_HPP
#define PURSUIT_STATS_HPP

#include <vector>

namespace pursuit::stats {

enum class Alternative { Less, Greater, TwoSided };

struct MannWhitneyResult {
    double u = 0.0; // U statistic of the first sample, midrank ties
    double p = 1.0;
    bool exact = false;
};

/// Exact enumeration for combined sizes up to 20, otherwise the normal
/// approximation with tie and continuity corrections. `Less` tests whether
/// the first sample is stochastically smaller.
MannWhitneyResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                                 Alternative alt);

/// (mean(a) - mean(b)) / pooled standard deviation (n-1 weights).
double cohens_d(const std::vector<double>& a, const std::vector<double>& b);

/// Fraction of pairs (x in a, y in b) with x > y; ties count one half.
double cles(const std::vector<double>& a, const std::vector<double>& b);

} // namespace pursuit::stats

#endif
