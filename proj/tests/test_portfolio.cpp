#include "doctest.h"

#include <algorithm>
#include <vector>

#include "pursuit/market.hpp"
#include "pursuit/portfolio.hpp"

using namespace pursuit;
using portfolio::FreqVec;
using portfolio::TargetPortfolio;

namespace {

FreqVec fv(std::vector<int> counts) {
    FreqVec f;
    f.counts = std::move(counts);
    return f;
}

TargetPortfolio tp(std::vector<int> target) { return {std::move(target)}; }

CustomerFeatures sample_one(Rng& rng) {
    market::EnvParams env;
    return market::sample_customer(env, rng, 0).features;
}

} // namespace

TEST_CASE("loss hand cases") {
    CHECK(portfolio::loss(fv({3, 7}), tp({3, 7})) == 0.0);
    CHECK(portfolio::loss(fv({0, 0}), tp({5, 7})) == 1.0);
    CHECK(portfolio::loss(fv({5}), tp({10})) == 0.5);
}

TEST_CASE("loss law over random pairs: bounded, symmetric, zero iff equal") {
    Rng rng(101);
    for (int rep = 0; rep < 10000; ++rep) {
        const std::size_t n = 1 + rng.uniform_int(6);
        std::vector<int> f(n), g(n);
        for (auto& x : f) x = static_cast<int>(rng.uniform_int(30));
        for (auto& x : g) x = static_cast<int>(rng.uniform_int(30));
        const double l1 = portfolio::loss(f, g);
        const double l2 = portfolio::loss(g, f);
        CHECK(l1 >= 0.0);
        CHECK(l1 <= 1.0);
        CHECK(l1 == l2);
        CHECK((l1 == 0.0) == (f == g));
    }
}

TEST_CASE("membership and add_customer") {
    portfolio::IndicatorSet all_ages;
    all_ages.feature = "age";
    all_ages.kind = portfolio::IndicatorSet::Kind::Interval;
    all_ages.lo = 18.0;
    all_ages.hi = 90.0;

    portfolio::IndicatorSet rich;
    rich.feature = "income";
    rich.kind = portfolio::IndicatorSet::Kind::Interval;
    rich.lo = 1e9;
    rich.hi = 2e9;

    portfolio::IndicatorSet metro;
    metro.feature = "region";
    metro.kind = portfolio::IndicatorSet::Kind::ValueSet;
    metro.values = {0, 1};

    std::vector<portfolio::IndicatorSet> sets{all_ages, rich, metro};

    CustomerFeatures c;
    c.age = 30;
    c.income = 25000;
    c.region = 1;
    const auto mask = portfolio::membership(sets, c);
    CHECK(mask == portfolio::MemberMask({1, 0, 1}));

    FreqVec f(3);
    portfolio::add_customer(f, mask);
    CHECK(f == fv({1, 0, 1}));
    portfolio::add_customer(f, portfolio::MemberMask({0, 0, 0}));
    CHECK(f == fv({1, 0, 1}));

    // Empty set list: membership is empty, nothing to add.
    CHECK(portfolio::membership({}, c).empty());
}

TEST_CASE("every generated customer is inside the full age interval") {
    portfolio::IndicatorSet all_ages;
    all_ages.feature = "age";
    all_ages.lo = 18.0;
    all_ages.hi = 90.0;
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) CHECK(all_ages.contains(sample_one(rng)));
}

TEST_CASE("add_customer is order independent") {
    Rng rng(77);
    const std::size_t n_sets = 4;
    std::vector<portfolio::MemberMask> masks;
    for (int i = 0; i < 50; ++i) {
        portfolio::MemberMask m(n_sets);
        for (auto& b : m) b = rng.bernoulli(0.5) ? 1 : 0;
        masks.push_back(std::move(m));
    }
    FreqVec forward(n_sets), backward(n_sets), shuffled(n_sets);
    for (const auto& m : masks) portfolio::add_customer(forward, m);
    for (auto it = masks.rbegin(); it != masks.rend(); ++it)
        portfolio::add_customer(backward, *it);
    std::vector<std::size_t> order(masks.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i + 1 < order.size(); ++i)
        std::swap(order[i], order[i + rng.uniform_int(order.size() - i)]);
    for (auto i : order) portfolio::add_customer(shuffled, masks[i]);
    CHECK(forward == backward);
    CHECK(forward == shuffled);
}

TEST_CASE("generate_target branches") {
    Rng rng(1);
    SUBCASE("doubling branch") {
        const auto t = portfolio::generate_target({4.0}, rng);
        CHECK(t.target == std::vector<int>{8});
    }
    SUBCASE("halve or double for large frequencies") {
        int halved = 0, doubled = 0;
        for (int rep = 0; rep < 200; ++rep) {
            const auto t = portfolio::generate_target({20.0}, rng);
            if (t.target[0] == 10) ++halved;
            else if (t.target[0] == 40) ++doubled;
        }
        CHECK(halved + doubled == 200);
        CHECK(halved > 50);
        CHECK(doubled > 50);
    }
    SUBCASE("forced minimum") {
        const auto t = portfolio::generate_target({0.0}, rng);
        CHECK(t.target == std::vector<int>{1});
    }
    SUBCASE("ceil on the doubling branch") {
        const auto t = portfolio::generate_target({3.3}, rng);
        CHECK(t.target == std::vector<int>{7});
    }
}

TEST_CASE("make_indicator_sets: distinct features, valid predicates") {
    Rng gen(11);
    std::vector<CustomerFeatures> ref;
    for (int i = 0; i < 500; ++i) ref.push_back(sample_one(gen));

    Rng rng(12);
    const auto sets = portfolio::make_indicator_sets(ref, 5, rng);
    CHECK(sets.size() == 5);
    std::vector<std::string> names;
    for (const auto& s : sets) {
        names.push_back(s.feature);
        if (s.kind == portfolio::IndicatorSet::Kind::Interval) {
            CHECK(s.lo <= s.hi);
        } else {
            CHECK(!s.values.empty());
        }
    }
    std::sort(names.begin(), names.end());
    CHECK(std::adjacent_find(names.begin(), names.end()) == names.end());

    // Membership is a pure function: same input, same output.
    const auto m1 = portfolio::membership(sets, ref[0]);
    const auto m2 = portfolio::membership(sets, ref[0]);
    CHECK(m1 == m2);
}
