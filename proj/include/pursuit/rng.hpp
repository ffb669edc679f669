#ifndef PURSUIT_RNG_HPP
#define PURSUIT_RNG_HPP

#include <cstdint>
#include <vector>

namespace pursuit {

/// Counter-based splittable generator: a SplitMix64 finalizer applied to a
/// keyed counter. `stream(label)` derives an independent child stream from
/// the root key without consuming any draws from the parent, so adding a new
/// consumer can never shift the sequence seen by an existing one. All
/// distributions below are implemented in-house; libstdc++ distribution
/// objects are avoided because their draw sequences are implementation
/// defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    /// Independent child stream. Derivation depends only on the root key and
    /// the label, never on how many draws this stream has produced.
    Rng stream(std::uint64_t label) const;

    std::uint64_t next_u64();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Uniform integer in [0, n), n >= 1.
    std::uint64_t uniform_int(std::uint64_t n);
    bool bernoulli(double p);

    /// Standard normal via Box-Muller. Always consumes exactly two uniforms
    /// (no spare cached) so draw counts stay predictable.
    double normal();
    double normal(double mean, double sd);
    double lognormal(double mean_log, double sd_log);
    /// Rejection sampling; consumes a variable number of draws.
    double truncated_normal(double mean, double sd, double lo, double hi);
    double laplace(double location, double scale);
    /// Sum of n Bernoulli(p) draws.
    int binomial(int n, double p);
    /// Index drawn proportionally to the (non-negative) weights.
    int categorical(const std::vector<double>& weights);

private:
    struct Raw {};
    Rng(Raw, std::uint64_t key);

    std::uint64_t key_;
    std::uint64_t counter_;
};

} // namespace pursuit

#endif
