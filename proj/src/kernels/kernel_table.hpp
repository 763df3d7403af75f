#pragma once

#include "tsl/kernels.hpp"

namespace tsl::kernels::detail {

/** Function-pointer table for one backend.  Null entries fall back to scalar. */
struct KernelTable {
	void (*axpy)(std::size_t, double, const double*, double*) = nullptr;
	void (*scale)(std::size_t, double, double*) = nullptr;
	double (*dot)(std::size_t, const double*, const double*) = nullptr;
	double (*sum_abs)(std::size_t, const double*) = nullptr;
	double (*sum_abs_diff)(std::size_t, const double*, const double*) = nullptr;
	void (*zaxpy)(std::size_t, cplx, const cplx*, cplx*) = nullptr;
	void (*zscale)(std::size_t, cplx, cplx*) = nullptr;
	cplx (*zdotc)(std::size_t, const cplx*, const cplx*) = nullptr;
	void (*zgemm)(std::size_t, std::size_t, std::size_t, cplx, const cplx*, const cplx*,
				  cplx, cplx*) = nullptr;
};

/** Returns nullptr when the backend is not compiled in / not supported. */
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace tsl::kernels::detail
