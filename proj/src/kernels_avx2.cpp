#ifdef PURSUIT_HAVE_AVX2

#include "pursuit/kernels.hpp"

#include <cmath>
#include <immintrin.h>

namespace pursuit::kernels::avx2 {

namespace {

double reduce4(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// Cephes-style exp on 4 lanes: exp(x) = 2^n * (1 + 2 px / (qx - px)) with
// px, qx rational in x^2 after argument reduction x -= n*ln2. Accurate to a
// couple of ulp, which the backend equivalence tests bound explicitly.
__m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d lo_cut = _mm256_set1_pd(-708.0);
    const __m256d hi_cut = _mm256_set1_pd(708.0);

    const __m256d underflow = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
    x = _mm256_max_pd(_mm256_min_pd(x, hi_cut), lo_cut);

    __m256d n = _mm256_floor_pd(_mm256_fmadd_pd(log2e, x, half));
    x = _mm256_fnmadd_pd(n, ln2_hi, x);
    x = _mm256_fnmadd_pd(n, ln2_lo, x);

    const __m256d xx = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(p0, xx, p1);
    px = _mm256_fmadd_pd(px, xx, p2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
    qx = _mm256_fmadd_pd(qx, xx, q2);
    qx = _mm256_fmadd_pd(qx, xx, q3);
    __m256d e = _mm256_add_pd(
        one, _mm256_mul_pd(_mm256_set1_pd(2.0),
                           _mm256_div_pd(px, _mm256_sub_pd(qx, px))));

    // 2^n via exponent-field construction; n is in [-1022, 1023] here.
    __m128i n32 = _mm256_cvtpd_epi32(n);
    __m256i n64 = _mm256_cvtepi32_epi64(n32);
    __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(bits));

    return _mm256_andnot_pd(underflow, e);
}

} // namespace

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
    }
    double r = reduce4(acc);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double r = reduce4(acc);
    for (; i < n; ++i) r += x[i];
    return r;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double r = reduce4(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r += d * d;
    }
    return r;
}

double matern52_weighted_sum(const double* q, const double* basis,
                             const double* w, std::size_t n, std::size_t d,
                             double inv_lengthscale) {
    const double s5l = std::sqrt(5.0) * inv_lengthscale;
    const __m256d vs5l = _mm256_set1_pd(s5l);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d third = _mm256_set1_pd(1.0 / 3.0);
    const __m256d sign = _mm256_set1_pd(-0.0);

    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
        __m256d d2 = _mm256_setzero_pd();
        for (std::size_t k = 0; k < d; ++k) {
            const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(q[k]),
                                               _mm256_loadu_pd(basis + k * n + j));
            d2 = _mm256_fmadd_pd(diff, diff, d2);
        }
        const __m256d t = _mm256_mul_pd(vs5l, _mm256_sqrt_pd(d2));
        const __m256d poly =
            _mm256_fmadd_pd(_mm256_mul_pd(t, t), third, _mm256_add_pd(one, t));
        const __m256d e = exp_pd(_mm256_xor_pd(t, sign));
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(w + j), _mm256_mul_pd(poly, e), acc);
    }
    double r = reduce4(acc);
    for (; j < n; ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = q[k] - basis[k * n + j];
            d2 += diff * diff;
        }
        const double t = s5l * std::sqrt(d2);
        r += w[j] * (1.0 + t + t * t * (1.0 / 3.0)) * std::exp(-t);
    }
    return r;
}

} // namespace pursuit::kernels::avx2

#endif // PURSUIT_HAVE_AVX2
