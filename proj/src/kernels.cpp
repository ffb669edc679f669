#include "pursuit/kernels.hpp"

#include <atomic>
#include <stdexcept>

namespace pursuit::kernels {

namespace {

Backend detect() {
#ifdef PURSUIT_HAVE_AVX2
    if (cpu_has_avx2()) return Backend::Avx2;
#endif
    return Backend::Scalar;
}

std::atomic<int> g_forced{-1};

Backend current() {
    const int forced = g_forced.load(std::memory_order_relaxed);
    if (forced >= 0) return static_cast<Backend>(forced);
    static const Backend auto_detected = detect();
    return auto_detected;
}

} // namespace

bool cpu_has_avx2() {
#if defined(PURSUIT_HAVE_AVX2) && defined(__GNUC__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend active_backend() { return current(); }

const char* backend_name(Backend b) {
    return b == Backend::Avx2 ? "avx2" : "scalar";
}

void force_backend(Backend b) {
    if (b == Backend::Avx2 && !cpu_has_avx2())
        throw std::runtime_error("kernels: AVX2 backend not available on this CPU");
    g_forced.store(static_cast<int>(b), std::memory_order_relaxed);
}

void reset_backend() { g_forced.store(-1, std::memory_order_relaxed); }

#ifdef PURSUIT_HAVE_AVX2
#define PURSUIT_DISPATCH(fn, ...) \
    (current() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__))
#else
#define PURSUIT_DISPATCH(fn, ...) scalar::fn(__VA_ARGS__)
#endif

double dot(const double* a, const double* b, std::size_t n) {
    return PURSUIT_DISPATCH(dot, a, b, n);
}

double sum(const double* x, std::size_t n) {
    return PURSUIT_DISPATCH(sum, x, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    PURSUIT_DISPATCH(axpy, alpha, x, y, n);
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    return PURSUIT_DISPATCH(squared_distance, a, b, n);
}

double matern52_weighted_sum(const double* q, const double* basis,
                             const double* w, std::size_t n, std::size_t d,
                             double inv_lengthscale) {
    return PURSUIT_DISPATCH(matern52_weighted_sum, q, basis, w, n, d, inv_lengthscale);
}

#undef PURSUIT_DISPATCH

} // namespace pursuit::kernels
