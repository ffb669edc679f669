#include "doctest.h"

#include <cmath>
#include <vector>

#include "pursuit/rng.hpp"

using namespace pursuit;

TEST_CASE("rng is deterministic and streams are independent of draw order") {
    Rng a(42);
    Rng b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    // Deriving a stream after consuming draws gives the same child stream.
    Rng fresh(42);
    Rng child1 = fresh.stream(7);
    Rng consumed(42);
    for (int i = 0; i < 10; ++i) consumed.uniform();
    Rng child2 = consumed.stream(7);
    for (int i = 0; i < 20; ++i) CHECK(child1.next_u64() == child2.next_u64());

    // Different labels give different sequences.
    Rng c1 = fresh.stream(1);
    Rng c2 = fresh.stream(2);
    bool any_diff = false;
    for (int i = 0; i < 10; ++i) any_diff |= (c1.next_u64() != c2.next_u64());
    CHECK(any_diff);
}

TEST_CASE("uniform moments and support") {
    Rng rng(1);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
    }
    CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("normal moments") {
    Rng rng(2);
    double sum = 0.0, sq = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    CHECK(sum / n == doctest::Approx(0.0).epsilon(0.02));
    CHECK(sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("laplace location and spread") {
    Rng rng(3);
    const int n = 100000;
    double below = 0.0, sum_abs = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = rng.laplace(1.0, 0.1);
        if (x < 1.0) below += 1.0;
        sum_abs += std::abs(x - 1.0);
    }
    // Median at the location, mean absolute deviation = scale.
    CHECK(below / n == doctest::Approx(0.5).epsilon(0.02));
    CHECK(sum_abs / n == doctest::Approx(0.1).epsilon(0.03));
}

TEST_CASE("binomial mean and bounds") {
    Rng rng(4);
    const int n = 20000;
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int k = rng.binomial(10, 0.1);
        CHECK(k >= 0);
        CHECK(k <= 10);
        sum += k;
    }
    // 3 s.e. of Binomial(10, 0.1) mean over 20000 draws.
    CHECK(std::abs(sum / n - 1.0) < 3.0 * std::sqrt(10 * 0.1 * 0.9 / n));
    CHECK(rng.binomial(5, 0.0) == 0);
    CHECK(rng.binomial(5, 1.0) == 5);
}

TEST_CASE("truncated normal stays in range") {
    Rng rng(5);
    for (int i = 0; i < 10000; ++i) {
        const double x = rng.truncated_normal(40.0, 13.0, 18.0, 90.0);
        CHECK(x >= 18.0);
        CHECK(x <= 90.0);
    }
}

TEST_CASE("categorical frequencies") {
    Rng rng(6);
    std::vector<double> w{1.0, 2.0, 1.0};
    std::vector<int> counts(3, 0);
    const int n = 40000;
    for (int i = 0; i < n; ++i) counts[rng.categorical(w)]++;
    CHECK(counts[0] / static_cast<double>(n) == doctest::Approx(0.25).epsilon(0.05));
    CHECK(counts[1] / static_cast<double>(n) == doctest::Approx(0.50).epsilon(0.05));
    CHECK_THROWS_AS((void)rng.categorical({0.0, 0.0}), std::invalid_argument);
}
