#include "tsl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

ComplexMatrix::ComplexMatrix(int dim, std::vector<cplx> entries)
	: n_(dim), a_(std::move(entries)) {
	if (a_.size() != static_cast<std::size_t>(dim) * dim)
		throw DimensionMismatch("entry count does not match matrix dimension");
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
	n_ = static_cast<int>(rows.size());
	a_.reserve(static_cast<std::size_t>(n_) * n_);
	for (const auto& row : rows) {
		if (static_cast<int>(row.size()) != n_)
			throw DimensionMismatch("matrix literal is not square");
		a_.insert(a_.end(), row.begin(), row.end());
	}
}

ComplexMatrix ComplexMatrix::identity(int dim) {
	ComplexMatrix m(dim);
	for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
	return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<double>& d) {
	ComplexMatrix m(static_cast<int>(d.size()));
	for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
	return m;
}

ComplexMatrix ComplexMatrix::diagonal(const std::vector<cplx>& d) {
	ComplexMatrix m(static_cast<int>(d.size()));
	for (int i = 0; i < m.dim(); ++i) m(i, i) = d[i];
	return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
	if (n_ != o.n_) throw DimensionMismatch("matrix dimensions differ");
	kernels::zaxpy(a_.size(), cplx(1.0, 0.0), o.a_.data(), a_.data());
	return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
	if (n_ != o.n_) throw DimensionMismatch("matrix dimensions differ");
	kernels::zaxpy(a_.size(), cplx(-1.0, 0.0), o.a_.data(), a_.data());
	return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(cplx s) {
	kernels::zscale(a_.size(), s, a_.data());
	return *this;
}

ComplexMatrix ComplexMatrix::adjoint() const {
	ComplexMatrix out(n_);
	for (int i = 0; i < n_; ++i)
		for (int j = 0; j < n_; ++j) out(j, i) = std::conj((*this)(i, j));
	return out;
}

cplx ComplexMatrix::trace() const {
	cplx s = 0.0;
	for (int i = 0; i < n_; ++i) s += (*this)(i, i);
	return s;
}

double ComplexMatrix::max_abs() const {
	double m = 0.0;
	for (const cplx& v : a_) m = std::max(m, std::abs(v));
	return m;
}

bool ComplexMatrix::is_hermitian(double tol) const {
	for (int i = 0; i < n_; ++i) {
		if (std::abs((*this)(i, i).imag()) > tol) return false;
		for (int j = i + 1; j < n_; ++j)
			if (std::abs((*this)(i, j) - std::conj((*this)(j, i))) > tol) return false;
	}
	return true;
}

void ComplexMatrix::hermitize() {
	for (int i = 0; i < n_; ++i) {
		(*this)(i, i) = cplx((*this)(i, i).real(), 0.0);
		for (int j = i + 1; j < n_; ++j) {
			const cplx v = 0.5 * ((*this)(i, j) + std::conj((*this)(j, i)));
			(*this)(i, j) = v;
			(*this)(j, i) = std::conj(v);
		}
	}
}

ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
	if (a.dim() != b.dim()) throw DimensionMismatch("matrix dimensions differ");
	ComplexMatrix c(a.dim());
	kernels::zgemm(a.dim(), a.dim(), a.dim(), cplx(1.0, 0.0), a.data(), b.data(),
				   cplx(0.0, 0.0), c.data());
	return c;
}

void gemm_into(cplx alpha, const ComplexMatrix& a, const ComplexMatrix& b, cplx beta,
			   ComplexMatrix& c) {
	if (a.dim() != b.dim() || a.dim() != c.dim())
		throw DimensionMismatch("matrix dimensions differ");
	kernels::zgemm(a.dim(), a.dim(), a.dim(), alpha, a.data(), b.data(), beta, c.data());
}

cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
	if (a.dim() != b.dim()) throw DimensionMismatch("matrix dimensions differ");
	cplx s = 0.0;
	const int n = a.dim();
	for (int i = 0; i < n; ++i)
		for (int j = 0; j < n; ++j) s += a(i, j) * b(j, i);
	return s;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
	const int na = a.dim(), nb = b.dim();
	ComplexMatrix out(na * nb);
	for (int i = 0; i < na; ++i)
		for (int j = 0; j < na; ++j) {
			const cplx aij = a(i, j);
			if (aij == cplx(0.0, 0.0)) continue;
			for (int p = 0; p < nb; ++p)
				for (int q = 0; q < nb; ++q) out(i * nb + p, j * nb + q) = aij * b(p, q);
		}
	return out;
}

ComplexMatrix kron_chain(const std::vector<const ComplexMatrix*>& factors) {
	if (factors.empty()) throw DimensionMismatch("kron_chain needs at least one factor");
	ComplexMatrix out = *factors.front();
	for (std::size_t i = 1; i < factors.size(); ++i) out = kron(out, *factors[i]);
	return out;
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver: cyclic complex Jacobi
// ---------------------------------------------------------------------------

namespace {

double offdiag_norm(const ComplexMatrix& a) {
	double s = 0.0;
	for (int p = 0; p < a.dim(); ++p)
		for (int q = p + 1; q < a.dim(); ++q) s += std::norm(a(p, q));
	return std::sqrt(2.0 * s);
}

}  // namespace

EigResult hermitian_eig(const ComplexMatrix& input) {
	if (!input.is_hermitian(1e-10)) throw NotHermitian("hermitian_eig needs a Hermitian matrix");
	const int n = input.dim();
	ComplexMatrix a = input;
	a.hermitize();
	ComplexMatrix u = ComplexMatrix::identity(n);

	double scale = 0.0;
	for (int i = 0; i < n; ++i)
		for (int j = 0; j < n; ++j) scale += std::norm(a(i, j));
	scale = std::sqrt(scale);
	const double tol = 1e-13 * std::max(1.0, scale);
	const int max_sweeps = 100;

	bool converged = (n <= 1) || offdiag_norm(a) <= tol;
	for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
		for (int p = 0; p < n; ++p) {
			for (int q = p + 1; q < n; ++q) {
				const cplx apq = a(p, q);
				const double mag = std::abs(apq);
				if (mag <= 1e-300) continue;
				// Unitary 2x2 rotation J = diag-phase * real Jacobi rotation:
				// with beta = |a_pq| and phase = a_pq/|a_pq| the pivot is
				// eliminated exactly.
				const cplx phase = apq / mag;
				const double app = a(p, p).real();
				const double aqq = a(q, q).real();
				const double tau = (aqq - app) / (2.0 * mag);
				// smaller-magnitude root of t^2 - 2*tau*t - 1 = 0
				const double t = (tau >= 0.0 ? -1.0 : 1.0) /
								 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
				const double c = 1.0 / std::sqrt(1.0 + t * t);
				const double s = t * c;
				// column update: col_p' = c*col_p + s*conj(phase)*col_q
				//                col_q' = -s*phase*col_p + c*col_q
				// (phases arranged so that the transformed a_pq vanishes)
				const cplx sp = s * std::conj(phase);
				const cplx sq = s * phase;
				for (int r = 0; r < n; ++r) {
					const cplx arp = a(r, p);
					const cplx arq = a(r, q);
					a(r, p) = c * arp + sp * arq;
					a(r, q) = c * arq - sq * arp;
				}
				for (int r = 0; r < n; ++r) {
					const cplx apr = a(p, r);
					const cplx aqr = a(q, r);
					a(p, r) = c * apr + sq * aqr;
					a(q, r) = c * aqr - sp * apr;
				}
				for (int r = 0; r < n; ++r) {
					const cplx urp = u(r, p);
					const cplx urq = u(r, q);
					u(r, p) = c * urp + sp * urq;
					u(r, q) = c * urq - sq * urp;
				}
				a(p, q) = 0.0;
				a(q, p) = 0.0;
				a(p, p) = cplx(a(p, p).real(), 0.0);
				a(q, q) = cplx(a(q, q).real(), 0.0);
			}
		}
		converged = offdiag_norm(a) <= tol;
	}
	if (!converged) throw NoConvergence("Jacobi eigensolver did not converge");

	EigResult res;
	res.values.resize(n);
	for (int i = 0; i < n; ++i) res.values[i] = a(i, i).real();
	std::vector<int> order(n);
	std::iota(order.begin(), order.end(), 0);
	std::stable_sort(order.begin(), order.end(),
					 [&](int i, int j) { return res.values[i] < res.values[j]; });
	std::vector<double> sorted(n);
	ComplexMatrix vectors(n);
	for (int k = 0; k < n; ++k) {
		sorted[k] = res.values[order[k]];
		for (int r = 0; r < n; ++r) vectors(r, k) = u(r, order[k]);
	}
	res.values = std::move(sorted);
	res.vectors = std::move(vectors);
	return res;
}

double trace_norm(const ComplexMatrix& a) {
	const int n = a.dim();
	if (n == 0) return 0.0;
	if (a.is_hermitian(1e-10)) {
		EigResult e = hermitian_eig(a);
		double s = 0.0;
		for (double v : e.values) s += std::abs(v);
		return s;
	}
	// anti-Hermitian: i*A is Hermitian
	{
		ComplexMatrix h = a;
		h += a.adjoint();
		if (h.max_abs() <= 1e-10) {
			ComplexMatrix ia = a;
			ia *= cplx(0.0, 1.0);
			EigResult e = hermitian_eig(ia);
			double s = 0.0;
			for (double v : e.values) s += std::abs(v);
			return s;
		}
	}
	// general: singular values from the Hermitian PSD matrix A^dagger A
	ComplexMatrix ata(n);
	gemm_into(cplx(1.0, 0.0), a.adjoint(), a, cplx(0.0, 0.0), ata);
	ata.hermitize();
	EigResult e = hermitian_eig(ata);
	double s = 0.0;
	for (double v : e.values) s += std::sqrt(std::max(v, 0.0));
	return s;
}

}  // namespace tsl
