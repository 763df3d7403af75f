// NEON kernel variants for AArch64.  NEON is mandatory on AArch64, so no
// runtime feature probe is needed.  Only the real-double kernels are
// vectorized here; complex entries stay null and fall back to the scalar
// reference via the dispatcher.

#include "kernel_table.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

#include <cmath>

namespace tsl::kernels::detail {

namespace {

void axpy_neon(std::size_t n, double a, const double* x, double* y) {
	const float64x2_t va = vdupq_n_f64(a);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) {
		float64x2_t vy = vld1q_f64(y + i);
		vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
		vst1q_f64(y + i, vy);
	}
	for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(std::size_t n, double a, double* x) {
	const float64x2_t va = vdupq_n_f64(a);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
	for (; i < n; ++i) x[i] *= a;
}

double dot_neon(std::size_t n, const double* x, const double* y) {
	float64x2_t acc = vdupq_n_f64(0.0);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
	double s = vaddvq_f64(acc);
	for (; i < n; ++i) s += x[i] * y[i];
	return s;
}

double sum_abs_neon(std::size_t n, const double* x) {
	float64x2_t acc = vdupq_n_f64(0.0);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabsq_f64(vld1q_f64(x + i)));
	double s = vaddvq_f64(acc);
	for (; i < n; ++i) s += std::abs(x[i]);
	return s;
}

double sum_abs_diff_neon(std::size_t n, const double* x, const double* y) {
	float64x2_t acc = vdupq_n_f64(0.0);
	std::size_t i = 0;
	for (; i + 2 <= n; i += 2)
		acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
	double s = vaddvq_f64(acc);
	for (; i < n; ++i) s += std::abs(x[i] - y[i]);
	return s;
}

}  // namespace

const KernelTable* neon_table() {
	static constexpr KernelTable t = {axpy_neon,    scale_neon, dot_neon,
									  sum_abs_neon, sum_abs_diff_neon,
									  nullptr,      nullptr,    nullptr,
									  nullptr};
	return &t;
}

}  // namespace tsl::kernels::detail

#else

namespace tsl::kernels::detail {
const KernelTable* neon_table() { return nullptr; }
}  // namespace tsl::kernels::detail

#endif
