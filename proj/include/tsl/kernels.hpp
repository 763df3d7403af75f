#pragma once

#include <complex>
#include <cstddef>
#include <string>

namespace tsl::kernels {

/**
 * Low-level dense kernels used by the integrators, the linear algebra layer
 * and the velocity/statistics reductions.
 *
 * Every kernel exists in a portable scalar form which is the semantic
 * reference.  On x86-64 an AVX2+FMA variant and on AArch64 a NEON variant of
 * the hot kernels is compiled in as well; the best supported backend is
 * selected once at runtime.  The vector variants are required to match the
 * scalar reference to floating-point roundoff (they may fuse operations, so
 * bit-identity is not guaranteed) and are covered by equivalence tests.
 */

using cplx = std::complex<double>;

enum class Backend { scalar, avx2, neon };

/** Backend chosen for the current process (auto-detected at first use). */
Backend active_backend();

/** Human-readable name of the active backend ("scalar", "avx2", "neon"). */
std::string backend_name();

/** True when `b` can run on this host. */
bool backend_supported(Backend b);

/**
 * Force a specific backend (used by the equivalence tests and by the CLI
 * `--kernel` override).  Throws tsl::Error when unsupported on this host.
 * Not thread-safe; call before spawning workers.
 */
void force_backend(Backend b);

/** Return to the auto-detected backend. */
void reset_backend();

// -------------------------------------------------------------------------
// real double kernels
// -------------------------------------------------------------------------

/** y[i] += a * x[i] */
void axpy(std::size_t n, double a, const double* x, double* y);

/** x[i] *= a */
void scale(std::size_t n, double a, double* x);

/** sum_i x[i] * y[i] */
double dot(std::size_t n, const double* x, const double* y);

/** sum_i |x[i]| */
double sum_abs(std::size_t n, const double* x);

/** sum_i |x[i] - y[i]| */
double sum_abs_diff(std::size_t n, const double* x, const double* y);

// -------------------------------------------------------------------------
// complex double kernels (interleaved re/im, i.e. std::complex<double>[])
// -------------------------------------------------------------------------

/** y[i] += a * x[i] */
void zaxpy(std::size_t n, cplx a, const cplx* x, cplx* y);

/** x[i] *= a */
void zscale(std::size_t n, cplx a, cplx* x);

/** sum_i conj(x[i]) * y[i] */
cplx zdotc(std::size_t n, const cplx* x, const cplx* y);

/**
 * Dense row-major complex GEMM:  C (n x m) = beta*C + alpha * A (n x k) * B (k x m).
 * Aliasing between C and A/B is not allowed.
 */
void zgemm(std::size_t n, std::size_t k, std::size_t m, cplx alpha, const cplx* A,
		   const cplx* B, cplx beta, cplx* C);

}  // namespace tsl::kernels
