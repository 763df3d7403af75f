// AVX2+FMA kernel variants.  This translation unit is compiled with
// -mavx2 -mfma on x86-64; the dispatcher only hands out the table after a
// cpuid feature check, so nothing here executes on unsupported hosts.

#include "kernel_table.hpp"

#if (defined(__x86_64__) || defined(__i386__)) && defined(__AVX2__) && defined(__FMA__)

#include <immintrin.h>

#include <cmath>

namespace tsl::kernels::detail {

namespace {

inline double hsum(__m256d v) {
	__m128d lo = _mm256_castpd256_pd128(v);
	__m128d hi = _mm256_extractf128_pd(v, 1);
	lo = _mm_add_pd(lo, hi);
	__m128d sh = _mm_unpackhi_pd(lo, lo);
	return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
	const __m256d va = _mm256_set1_pd(a);
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4) {
		__m256d vy = _mm256_loadu_pd(y + i);
		vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
		_mm256_storeu_pd(y + i, vy);
	}
	for (; i < n; ++i) y[i] += a * x[i];
}

void scale_avx2(std::size_t n, double a, double* x) {
	const __m256d va = _mm256_set1_pd(a);
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4)
		_mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
	for (; i < n; ++i) x[i] *= a;
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
	__m256d acc0 = _mm256_setzero_pd();
	__m256d acc1 = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 8 <= n; i += 8) {
		acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
		acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
	}
	for (; i + 4 <= n; i += 4)
		acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
	double s = hsum(_mm256_add_pd(acc0, acc1));
	for (; i < n; ++i) s += x[i] * y[i];
	return s;
}

double sum_abs_avx2(std::size_t n, const double* x) {
	const __m256d mask = _mm256_set1_pd(-0.0);
	__m256d acc = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4)
		acc = _mm256_add_pd(acc, _mm256_andnot_pd(mask, _mm256_loadu_pd(x + i)));
	double s = hsum(acc);
	for (; i < n; ++i) s += std::abs(x[i]);
	return s;
}

double sum_abs_diff_avx2(std::size_t n, const double* x, const double* y) {
	const __m256d mask = _mm256_set1_pd(-0.0);
	__m256d acc = _mm256_setzero_pd();
	std::size_t i = 0;
	for (; i + 4 <= n; i += 4) {
		__m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
		acc = _mm256_add_pd(acc, _mm256_andnot_pd(mask, d));
	}
	double s = hsum(acc);
	for (; i < n; ++i) s += std::abs(x[i] - y[i]);
	return s;
}

// complex helpers: values are interleaved (re, im) pairs, two complex per ymm

void zaxpy_avx2(std::size_t n, cplx a, const cplx* x, cplx* y) {
	const __m256d ar = _mm256_set1_pd(a.real());
	const __m256d ai = _mm256_set1_pd(a.imag());
	const double* xd = reinterpret_cast<const double*>(x);
	double* yd = reinterpret_cast<double*>(y);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) {
		__m256d vx = _mm256_loadu_pd(xd + 2 * i);
		__m256d vy = _mm256_loadu_pd(yd + 2 * i);
		__m256d t1 = _mm256_mul_pd(ar, vx);
		__m256d t2 = _mm256_mul_pd(ai, _mm256_permute_pd(vx, 0x5));
		vy = _mm256_add_pd(vy, _mm256_addsub_pd(t1, t2));
		_mm256_storeu_pd(yd + 2 * i, vy);
	}
	for (; i < n; ++i) {
		const double xr = xd[2 * i], xi = xd[2 * i + 1];
		yd[2 * i] += a.real() * xr - a.imag() * xi;
		yd[2 * i + 1] += a.real() * xi + a.imag() * xr;
	}
}

void zscale_avx2(std::size_t n, cplx a, cplx* x) {
	const __m256d ar = _mm256_set1_pd(a.real());
	const __m256d ai = _mm256_set1_pd(a.imag());
	double* xd = reinterpret_cast<double*>(x);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) {
		__m256d vx = _mm256_loadu_pd(xd + 2 * i);
		__m256d t1 = _mm256_mul_pd(ar, vx);
		__m256d t2 = _mm256_mul_pd(ai, _mm256_permute_pd(vx, 0x5));
		_mm256_storeu_pd(xd + 2 * i, _mm256_addsub_pd(t1, t2));
	}
	for (; i < n; ++i) {
		const double xr = xd[2 * i], xi = xd[2 * i + 1];
		xd[2 * i] = a.real() * xr - a.imag() * xi;
		xd[2 * i + 1] = a.real() * xi + a.imag() * xr;
	}
}

cplx zdotc_avx2(std::size_t n, const cplx* x, const cplx* y) {
	// re(sum conj(x) y) = plain dot over interleaved doubles;
	// im accumulates xr*yi - xi*yr via a sign-flipped swap of y.
	const __m256d sign = _mm256_set_pd(-1.0, 1.0, -1.0, 1.0);
	__m256d acc_re = _mm256_setzero_pd();
	__m256d acc_im = _mm256_setzero_pd();
	const double* xd = reinterpret_cast<const double*>(x);
	const double* yd = reinterpret_cast<const double*>(y);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) {
		__m256d vx = _mm256_loadu_pd(xd + 2 * i);
		__m256d vy = _mm256_loadu_pd(yd + 2 * i);
		acc_re = _mm256_fmadd_pd(vx, vy, acc_re);
		__m256d swapped = _mm256_mul_pd(_mm256_permute_pd(vy, 0x5), sign);
		acc_im = _mm256_fmadd_pd(vx, swapped, acc_im);
	}
	double re = hsum(acc_re);
	double im = hsum(acc_im);
	for (; i < n; ++i) {
		const double xr = xd[2 * i], xi = xd[2 * i + 1];
		const double yr = yd[2 * i], yi = yd[2 * i + 1];
		re += xr * yr + xi * yi;
		im += xr * yi - xi * yr;
	}
	return {re, im};
}

void zgemm_avx2(std::size_t n, std::size_t k, std::size_t m, cplx alpha, const cplx* A,
				const cplx* B, cplx beta, cplx* C) {
	for (std::size_t i = 0; i < n; ++i) {
		cplx* crow = C + i * m;
		if (beta == cplx(0.0, 0.0)) {
			std::size_t j = 0;
			double* cd = reinterpret_cast<double*>(crow);
			const __m256d z = _mm256_setzero_pd();
			for (; j + 2 <= m; j += 2) _mm256_storeu_pd(cd + 2 * j, z);
			for (; j < m; ++j) crow[j] = cplx(0.0, 0.0);
		} else if (beta != cplx(1.0, 0.0)) {
			zscale_avx2(m, beta, crow);
		}
		const cplx* arow = A + i * k;
		for (std::size_t kk = 0; kk < k; ++kk) {
			const cplx a = alpha * arow[kk];
			if (a == cplx(0.0, 0.0)) continue;
			zaxpy_avx2(m, a, B + kk * m, crow);
		}
	}
}

bool host_supports_avx2() {
	return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace

const KernelTable* avx2_table() {
	if (!host_supports_avx2()) return nullptr;
	static constexpr KernelTable t = {axpy_avx2,    scale_avx2,  dot_avx2,
									  sum_abs_avx2, sum_abs_diff_avx2,
									  zaxpy_avx2,   zscale_avx2, zdotc_avx2,
									  zgemm_avx2};
	return &t;
}

}  // namespace tsl::kernels::detail

#else

namespace tsl::kernels::detail {
const KernelTable* avx2_table() { return nullptr; }
}  // namespace tsl::kernels::detail

#endif
