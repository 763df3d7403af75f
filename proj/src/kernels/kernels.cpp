#include "tsl/kernels.hpp"

#include <cmath>
#include <cstring>

#include "kernel_table.hpp"
#include "tsl/errors.hpp"

namespace tsl::kernels {

namespace detail {

// ---------------------------------------------------------------------------
// scalar reference kernels
// ---------------------------------------------------------------------------

namespace scalar {

void axpy(std::size_t n, double a, const double* x, double* y) {
	for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(std::size_t n, double a, double* x) {
	for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

double dot(std::size_t n, const double* x, const double* y) {
	double s = 0.0;
	for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
	return s;
}

double sum_abs(std::size_t n, const double* x) {
	double s = 0.0;
	for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i]);
	return s;
}

double sum_abs_diff(std::size_t n, const double* x, const double* y) {
	double s = 0.0;
	for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
	return s;
}

void zaxpy(std::size_t n, cplx a, const cplx* x, cplx* y) {
	const double ar = a.real(), ai = a.imag();
	const double* xd = reinterpret_cast<const double*>(x);
	double* yd = reinterpret_cast<double*>(y);
	for (std::size_t i = 0; i < n; ++i) {
		const double xr = xd[2 * i], xi = xd[2 * i + 1];
		yd[2 * i] += ar * xr - ai * xi;
		yd[2 * i + 1] += ar * xi + ai * xr;
	}
}

void zscale(std::size_t n, cplx a, cplx* x) {
	const double ar = a.real(), ai = a.imag();
	double* xd = reinterpret_cast<double*>(x);
	for (std::size_t i = 0; i < n; ++i) {
		const double xr = xd[2 * i], xi = xd[2 * i + 1];
		xd[2 * i] = ar * xr - ai * xi;
		xd[2 * i + 1] = ar * xi + ai * xr;
	}
}

cplx zdotc(std::size_t n, const cplx* x, const cplx* y) {
	double re = 0.0, im = 0.0;
	const double* xd = reinterpret_cast<const double*>(x);
	const double* yd = reinterpret_cast<const double*>(y);
	for (std::size_t i = 0; i < n; ++i) {
		const double xr = xd[2 * i], xi = xd[2 * i + 1];
		const double yr = yd[2 * i], yi = yd[2 * i + 1];
		re += xr * yr + xi * yi;
		im += xr * yi - xi * yr;
	}
	return {re, im};
}

void zgemm(std::size_t n, std::size_t k, std::size_t m, cplx alpha, const cplx* A,
		   const cplx* B, cplx beta, cplx* C) {
	for (std::size_t i = 0; i < n; ++i) {
		cplx* crow = C + i * m;
		if (beta == cplx(0.0, 0.0)) {
			for (std::size_t j = 0; j < m; ++j) crow[j] = cplx(0.0, 0.0);
		} else if (beta != cplx(1.0, 0.0)) {
			zscale(m, beta, crow);
		}
		const cplx* arow = A + i * k;
		for (std::size_t kk = 0; kk < k; ++kk) {
			const cplx a = alpha * arow[kk];
			if (a == cplx(0.0, 0.0)) continue;
			zaxpy(m, a, B + kk * m, crow);
		}
	}
}

}  // namespace scalar

const KernelTable* scalar_table() {
	static const KernelTable t = {scalar::axpy,    scalar::scale,  scalar::dot,
								  scalar::sum_abs, scalar::sum_abs_diff,
								  scalar::zaxpy,   scalar::zscale, scalar::zdotc,
								  scalar::zgemm};
	return &t;
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

namespace {

const KernelTable* table_for(Backend b) {
	switch (b) {
		case Backend::scalar: return scalar_table();
		case Backend::avx2: return avx2_table();
		case Backend::neon: return neon_table();
	}
	return nullptr;
}

Backend detect_backend() {
	if (avx2_table() != nullptr) return Backend::avx2;
	if (neon_table() != nullptr) return Backend::neon;
	return Backend::scalar;
}

struct Dispatch {
	Backend backend;
	// effective table: every entry non-null (falls back to scalar per-kernel)
	KernelTable table;
};

Dispatch make_dispatch(Backend b) {
	const KernelTable* chosen = table_for(b);
	const KernelTable* ref = scalar_table();
	Dispatch d;
	d.backend = b;
	d.table = *ref;
	if (chosen != nullptr && chosen != ref) {
		if (chosen->axpy) d.table.axpy = chosen->axpy;
		if (chosen->scale) d.table.scale = chosen->scale;
		if (chosen->dot) d.table.dot = chosen->dot;
		if (chosen->sum_abs) d.table.sum_abs = chosen->sum_abs;
		if (chosen->sum_abs_diff) d.table.sum_abs_diff = chosen->sum_abs_diff;
		if (chosen->zaxpy) d.table.zaxpy = chosen->zaxpy;
		if (chosen->zscale) d.table.zscale = chosen->zscale;
		if (chosen->zdotc) d.table.zdotc = chosen->zdotc;
		if (chosen->zgemm) d.table.zgemm = chosen->zgemm;
	}
	return d;
}

Dispatch& dispatch() {
	static Dispatch d = make_dispatch(detect_backend());
	return d;
}

}  // namespace

}  // namespace detail

Backend active_backend() { return detail::dispatch().backend; }

std::string backend_name() {
	switch (active_backend()) {
		case Backend::scalar: return "scalar";
		case Backend::avx2: return "avx2";
		case Backend::neon: return "neon";
	}
	return "unknown";
}

bool backend_supported(Backend b) { return detail::table_for(b) != nullptr; }

void force_backend(Backend b) {
	if (!backend_supported(b)) throw Error("kernel backend not supported on this host");
	detail::dispatch() = detail::make_dispatch(b);
}

void reset_backend() { detail::dispatch() = detail::make_dispatch(detail::detect_backend()); }

// ---------------------------------------------------------------------------
// public entry points
// ---------------------------------------------------------------------------

void axpy(std::size_t n, double a, const double* x, double* y) {
	detail::dispatch().table.axpy(n, a, x, y);
}

void scale(std::size_t n, double a, double* x) { detail::dispatch().table.scale(n, a, x); }

double dot(std::size_t n, const double* x, const double* y) {
	return detail::dispatch().table.dot(n, x, y);
}

double sum_abs(std::size_t n, const double* x) {
	return detail::dispatch().table.sum_abs(n, x);
}

double sum_abs_diff(std::size_t n, const double* x, const double* y) {
	return detail::dispatch().table.sum_abs_diff(n, x, y);
}

void zaxpy(std::size_t n, cplx a, const cplx* x, cplx* y) {
	detail::dispatch().table.zaxpy(n, a, x, y);
}

void zscale(std::size_t n, cplx a, cplx* x) { detail::dispatch().table.zscale(n, a, x); }

cplx zdotc(std::size_t n, const cplx* x, const cplx* y) {
	return detail::dispatch().table.zdotc(n, x, y);
}

void zgemm(std::size_t n, std::size_t k, std::size_t m, cplx alpha, const cplx* A,
		   const cplx* B, cplx beta, cplx* C) {
	detail::dispatch().table.zgemm(n, k, m, alpha, A, B, beta, C);
}

}  // namespace tsl::kernels
