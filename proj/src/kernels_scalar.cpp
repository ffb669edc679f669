#include "pursuit/kernels.hpp"

#include <cmath>

namespace pursuit::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double squared_distance(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double matern52_weighted_sum(const double* q, const double* basis,
                             const double* w, std::size_t n, std::size_t d,
                             double inv_lengthscale) {
    const double sqrt5_over_l = std::sqrt(5.0) * inv_lengthscale;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double diff = q[k] - basis[k * n + j];
            d2 += diff * diff;
        }
        const double t = sqrt5_over_l * std::sqrt(d2);
        acc += w[j] * (1.0 + t + t * t * (1.0 / 3.0)) * std::exp(-t);
    }
    return acc;
}

} // namespace pursuit::kernels::scalar
