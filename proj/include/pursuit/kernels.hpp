#ifndef PURSUIT_KERNELS_HPP
#define PURSUIT_KERNELS_HPP

#include <cstddef>

namespace pursuit::kernels {

/// Runtime-dispatched double-precision kernels for the arithmetic inner
/// loops (value-model dots, MLP mat-vecs, Matern kernel rows in the
/// Gaussian-process predict path). The scalar implementations are the
/// reference; the AVX2 variants must agree with them to tight tolerance and
/// are selected at startup when the CPU supports AVX2+FMA. Lane-reordered
/// accumulation means the two backends are not bit-identical; within one
/// process the selection is fixed, so runs remain reproducible.
enum class Backend { Scalar, Avx2 };

Backend active_backend();
const char* backend_name(Backend b);
bool cpu_has_avx2();
/// Pin the backend (tests, `--kernels scalar`). Throws if the requested
/// backend is unavailable on this CPU.
void force_backend(Backend b);
void reset_backend();

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
/// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);

/// Sum over basis points j of w[j] * matern52(|q - x_j| / lengthscale)
/// where matern52(r) = (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r).
/// `basis` is column-major: coordinate k of point j lives at basis[k*n + j].
double matern52_weighted_sum(const double* q, const double* basis,
                             const double* w, std::size_t n, std::size_t d,
                             double inv_lengthscale);

/// Reference implementations, always available regardless of dispatch.
namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double matern52_weighted_sum(const double* q, const double* basis,
                             const double* w, std::size_t n, std::size_t d,
                             double inv_lengthscale);
} // namespace scalar

#ifdef PURSUIT_HAVE_AVX2
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double matern52_weighted_sum(const double* q, const double* basis,
                             const double* w, std::size_t n, std::size_t d,
                             double inv_lengthscale);
} // namespace avx2
#endif

} // namespace pursuit::kernels

#endif
