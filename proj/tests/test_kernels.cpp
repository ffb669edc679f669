#include "doctest.h"

#include <cmath>
#include <vector>

#include "pursuit/kernels.hpp"
#include "pursuit/rng.hpp"

using namespace pursuit;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double lo = -2.0, double hi = 2.0) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(lo, hi);
    return v;
}

} // namespace

TEST_CASE("scalar kernels match direct formulas") {
    Rng rng(7);
    const auto a = random_vec(rng, 131);
    const auto b = random_vec(rng, 131);

    double dot = 0.0, sum = 0.0, sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        sum += a[i];
        const double d = a[i] - b[i];
        sq += d * d;
    }
    CHECK(kernels::scalar::dot(a.data(), b.data(), a.size()) == doctest::Approx(dot).epsilon(1e-12));
    CHECK(kernels::scalar::sum(a.data(), a.size()) == doctest::Approx(sum).epsilon(1e-12));
    CHECK(kernels::scalar::squared_distance(a.data(), b.data(), a.size()) ==
          doctest::Approx(sq).epsilon(1e-12));

    auto y = b;
    kernels::scalar::axpy(0.37, a.data(), y.data(), y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        CHECK(y[i] == doctest::Approx(b[i] + 0.37 * a[i]).epsilon(1e-12));
}

TEST_CASE("matern weighted sum: scalar reference on tiny case") {
    // Single basis point at the query: kernel value 1, so the sum is w[0].
    const double q[2] = {0.5, -0.25};
    const double basis[2] = {0.5, -0.25}; // column-major, n = 1, d = 2
    const double w[1] = {3.25};
    CHECK(kernels::scalar::matern52_weighted_sum(q, basis, w, 1, 2, 1.0 / 0.3) ==
          doctest::Approx(3.25).epsilon(1e-14));
}

#ifdef PURSUIT_HAVE_AVX2
TEST_CASE("avx2 kernels agree with scalar reference") {
    if (!kernels::cpu_has_avx2()) return;
    Rng rng(11);

    for (std::size_t n : {1ul, 3ul, 4ul, 7ul, 64ul, 501ul, 2048ul}) {
        const auto a = random_vec(rng, n);
        const auto b = random_vec(rng, n);
        const double tol = 1e-11 * (1.0 + static_cast<double>(n));

        CHECK(std::abs(kernels::avx2::dot(a.data(), b.data(), n) -
                       kernels::scalar::dot(a.data(), b.data(), n)) <= tol);
        CHECK(std::abs(kernels::avx2::sum(a.data(), n) - kernels::scalar::sum(a.data(), n)) <=
              tol);
        CHECK(std::abs(kernels::avx2::squared_distance(a.data(), b.data(), n) -
                       kernels::scalar::squared_distance(a.data(), b.data(), n)) <= tol);

        auto y1 = b, y2 = b;
        kernels::scalar::axpy(-1.7, a.data(), y1.data(), n);
        kernels::avx2::axpy(-1.7, a.data(), y2.data(), n);
        for (std::size_t i = 0; i < n; ++i) CHECK(y1[i] == doctest::Approx(y2[i]).epsilon(1e-12));
    }
}

TEST_CASE("avx2 matern weighted sum agrees with scalar across shapes") {
    if (!kernels::cpu_has_avx2()) return;
    Rng rng(13);
    for (std::size_t n : {1ul, 2ul, 5ul, 16ul, 100ul, 500ul}) {
        for (std::size_t d : {1ul, 3ul, 4ul, 8ul}) {
            std::vector<double> basis(n * d);
            for (auto& x : basis) x = rng.uniform(-3.0, 3.0);
            const auto q = random_vec(rng, d, -3.0, 3.0);
            const auto w = random_vec(rng, n, -5.0, 5.0);
            const double s =
                kernels::scalar::matern52_weighted_sum(q.data(), basis.data(), w.data(), n, d,
                                                       1.0 / 0.3);
            const double v =
                kernels::avx2::matern52_weighted_sum(q.data(), basis.data(), w.data(), n, d,
                                                     1.0 / 0.3);
            double wsum = 0.0;
            for (double x : w) wsum += std::abs(x);
            CHECK(std::abs(s - v) <= 1e-12 * (1.0 + wsum));
        }
    }
}

TEST_CASE("avx2 matern handles far extrapolation without blowing up") {
    if (!kernels::cpu_has_avx2()) return;
    // Distances large enough that exp underflows.
    std::vector<double> basis(4, 1000.0);
    std::vector<double> w(4, 2.0);
    const double q[1] = {-1000.0};
    const double v = kernels::avx2::matern52_weighted_sum(q, basis.data(), w.data(), 4, 1, 1.0);
    CHECK(v == 0.0);
}
#endif

TEST_CASE("backend forcing and dispatch") {
    kernels::force_backend(kernels::Backend::Scalar);
    CHECK(kernels::active_backend() == kernels::Backend::Scalar);
    const double a[3] = {1, 2, 3};
    const double b[3] = {4, 5, 6};
    CHECK(kernels::dot(a, b, 3) == doctest::Approx(32.0));
    kernels::reset_backend();
#ifdef PURSUIT_HAVE_AVX2
    if (kernels::cpu_has_avx2()) CHECK(kernels::active_backend() == kernels::Backend::Avx2);
#endif
}
