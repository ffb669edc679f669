#include "pursuit/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace pursuit {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer (Stafford mix13).
std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

Rng::Rng(std::uint64_t seed) : key_(mix64(seed + kGolden)), counter_(0) {}

Rng::Rng(Raw, std::uint64_t key) : key_(key), counter_(0) {}

Rng Rng::stream(std::uint64_t label) const {
    return Rng(Raw{}, mix64(key_ ^ mix64((label + 1) * kGolden)));
}

std::uint64_t Rng::next_u64() {
    counter_ += kGolden;
    return mix64(key_ + counter_);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_int: n must be >= 1");
    // Multiply-shift; bias of O(n / 2^64) is negligible for simulation use.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

bool Rng::bernoulli(double p) {
    return uniform() < p;
}

double Rng::normal() {
    // 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double Rng::normal(double mean, double sd) {
    return mean + sd * normal();
}

double Rng::lognormal(double mean_log, double sd_log) {
    return std::exp(normal(mean_log, sd_log));
}

double Rng::truncated_normal(double mean, double sd, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("truncated_normal: lo must be < hi");
    for (;;) {
        const double x = normal(mean, sd);
        if (x >= lo && x <= hi) return x;
    }
}

double Rng::laplace(double location, double scale) {
    // Inverse CDF on u in (-1/2, 1/2].
    const double u = uniform() - 0.5;
    const double s = (u < 0.0) ? -1.0 : 1.0;
    return location - scale * s * std::log(1.0 - 2.0 * std::fabs(u));
}

int Rng::binomial(int n, double p) {
    if (n < 0) throw std::invalid_argument("binomial: n must be >= 0");
    if (p <= 0.0) return 0;
    if (p >= 1.0) return n;
    int k = 0;
    for (int i = 0; i < n; ++i) k += bernoulli(p) ? 1 : 0;
    return k;
}

int Rng::categorical(const std::vector<double>& weights) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw std::invalid_argument("categorical: negative weight");
        total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("categorical: weights sum to zero");
    double u = uniform() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
        u -= weights[i];
        if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
}

} // namespace pursuit
