#pragma once

#include <complex>
#include <initializer_list>
#include <vector>

namespace tsl {

using cplx = std::complex<double>;

/** Dense square complex matrix, row-major. */
class ComplexMatrix {
public:
	ComplexMatrix() = default;
	explicit ComplexMatrix(int dim) : n_(dim), a_(static_cast<std::size_t>(dim) * dim) {}
	ComplexMatrix(int dim, std::vector<cplx> entries);
	/** Row-major brace initialization for small literals in tests/builders. */
	ComplexMatrix(std::initializer_list<std::initializer_list<cplx>> rows);

	static ComplexMatrix identity(int dim);
	static ComplexMatrix diagonal(const std::vector<double>& d);
	static ComplexMatrix diagonal(const std::vector<cplx>& d);

	int dim() const { return n_; }
	cplx& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * n_ + j]; }
	const cplx& operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
	cplx* data() { return a_.data(); }
	const cplx* data() const { return a_.data(); }
	std::size_t size() const { return a_.size(); }

	ComplexMatrix& operator+=(const ComplexMatrix& o);
	ComplexMatrix& operator-=(const ComplexMatrix& o);
	ComplexMatrix& operator*=(cplx s);

	ComplexMatrix adjoint() const;
	cplx trace() const;
	double max_abs() const;
	bool is_hermitian(double tol = 1e-10) const;
	/** In-place (A + A^dagger) / 2; removes roundoff drift on Hermitian data. */
	void hermitize();

	friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
	friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
	friend ComplexMatrix operator*(cplx s, ComplexMatrix a) { return a *= s; }

private:
	int n_ = 0;
	std::vector<cplx> a_;
};

/** C = A * B (dims must match). */
ComplexMatrix mat_mul(const ComplexMatrix& a, const ComplexMatrix& b);

/** C = beta*C + alpha * A*B, in place into c. */
void gemm_into(cplx alpha, const ComplexMatrix& a, const ComplexMatrix& b, cplx beta,
			   ComplexMatrix& c);

/** trace(A * B) without forming the product. */
cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

/** Kronecker product of an ordered list of factors (first factor most significant). */
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix kron_chain(const std::vector<const ComplexMatrix*>& factors);

struct EigResult {
	std::vector<double> values;  // ascending
	ComplexMatrix vectors;       // columns are the eigenvectors, unitary
};

/**
 * Full eigensystem of a Hermitian matrix via cyclic complex Jacobi sweeps.
 * Accurate and dependency-free for the moderate dimensions used here
 * (<= a few hundred).  Throws NotHermitian / NoConvergence.
 */
EigResult hermitian_eig(const ComplexMatrix& a);

/**
 * Trace norm ||A||_1 = sum of singular values.  Hermitian and anti-Hermitian
 * inputs take the cheaper |eigenvalue| route; the general case goes through
 * the eigenvalues of A^dagger A.
 */
double trace_norm(const ComplexMatrix& a);

}  // namespace tsl
