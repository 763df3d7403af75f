#include <cmath>
#include <complex>
#include <vector>

#include "test_support.hpp"
#include "tsl/errors.hpp"
#include "tsl/linalg.hpp"

using tsl::ComplexMatrix;
using tsl::cplx;

namespace {

ComplexMatrix random_matrix(tsltest::Rng& rng, int n) {
	ComplexMatrix a(n);
	for (int i = 0; i < n; ++i)
		for (int j = 0; j < n; ++j)
			a(i, j) = {tsltest::urand(rng, -1.0, 1.0), tsltest::urand(rng, -1.0, 1.0)};
	return a;
}

ComplexMatrix random_hermitian(tsltest::Rng& rng, int n) {
	ComplexMatrix a = random_matrix(rng, n);
	a.hermitize();
	return a;
}

ComplexMatrix naive_mul(const ComplexMatrix& a, const ComplexMatrix& b) {
	const int n = a.dim();
	ComplexMatrix c(n);
	for (int i = 0; i < n; ++i)
		for (int j = 0; j < n; ++j) {
			cplx s = 0.0;
			for (int k = 0; k < n; ++k) s += a(i, k) * b(k, j);
			c(i, j) = s;
		}
	return c;
}

/** Laplace-expansion determinant; oracle use only (n <= 4). */
cplx naive_det(const ComplexMatrix& a) {
	const int n = a.dim();
	if (n == 1) return a(0, 0);
	cplx det = 0.0;
	double sign = 1.0;
	for (int p = 0; p < n; ++p) {
		ComplexMatrix minor(n - 1);
		for (int i = 1; i < n; ++i) {
			int jj = 0;
			for (int j = 0; j < n; ++j) {
				if (j == p) continue;
				minor(i - 1, jj++) = a(i, j);
			}
		}
		det += sign * a(0, p) * naive_det(minor);
		sign = -sign;
	}
	return det;
}

const ComplexMatrix kPauliX = {{0.0, 1.0}, {1.0, 0.0}};
const ComplexMatrix kPauliY = {{0.0, cplx(0.0, -1.0)}, {cplx(0.0, 1.0), 0.0}};
const ComplexMatrix kPauliZ = {{1.0, 0.0}, {0.0, -1.0}};

}  // namespace

TEST_CASE("matrix basics") {
	ComplexMatrix a = {{1.0, cplx(2.0, 1.0)}, {3.0, 4.0}};
	CHECK(a.dim() == 2);
	CHECK(a(0, 1) == cplx(2.0, 1.0));
	CHECK(a.trace() == cplx(5.0, 0.0));
	CHECK(a.max_abs() == doctest::Approx(4.0));

	const ComplexMatrix id = ComplexMatrix::identity(3);
	CHECK(id.trace() == cplx(3.0, 0.0));

	const ComplexMatrix d = ComplexMatrix::diagonal(std::vector<double>{1.0, -2.0});
	CHECK(d(1, 1) == cplx(-2.0, 0.0));
	CHECK(d.is_hermitian());

	ComplexMatrix s = a;
	s += a;
	CHECK(s(1, 0) == cplx(6.0, 0.0));
	s -= a;
	CHECK(s(1, 0) == cplx(3.0, 0.0));
	s *= cplx(0.0, 1.0);
	CHECK(s(1, 0) == cplx(0.0, 3.0));

	const ComplexMatrix adj = a.adjoint();
	CHECK(adj(1, 0) == std::conj(a(0, 1)));
	CHECK(!a.is_hermitian());

	ComplexMatrix h = a;
	h.hermitize();
	CHECK(h.is_hermitian(1e-15));
}

TEST_CASE("multiplication and gemm against naive loops") {
	tsltest::Rng rng(51);
	for (int n : {1, 2, 3, 5, 8}) {
		const ComplexMatrix a = random_matrix(rng, n);
		const ComplexMatrix b = random_matrix(rng, n);
		const ComplexMatrix ref = naive_mul(a, b);
		const ComplexMatrix c = mat_mul(a, b);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j) CHECK(std::abs(c(i, j) - ref(i, j)) <= 1e-12 * n);

		// gemm with alpha/beta
		ComplexMatrix acc = random_matrix(rng, n);
		ComplexMatrix acc_ref = acc;
		const cplx alpha(0.5, -0.25), beta(-1.0, 2.0);
		gemm_into(alpha, a, b, beta, acc);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j) acc_ref(i, j) = beta * acc_ref(i, j) + alpha * ref(i, j);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j) CHECK(std::abs(acc(i, j) - acc_ref(i, j)) <= 1e-12 * n);

		// trace_product avoids forming the product
		CHECK(std::abs(trace_product(a, b) - ref.trace()) <= 1e-12 * n);
	}
	CHECK_THROWS_AS(mat_mul(ComplexMatrix(2), ComplexMatrix(3)), tsl::DimensionMismatch);
}

TEST_CASE("kronecker products") {
	tsltest::Rng rng(52);
	const ComplexMatrix a = random_matrix(rng, 2);
	const ComplexMatrix b = random_matrix(rng, 3);
	const ComplexMatrix k = kron(a, b);
	CHECK(k.dim() == 6);
	for (int i1 = 0; i1 < 2; ++i1)
		for (int i2 = 0; i2 < 3; ++i2)
			for (int j1 = 0; j1 < 2; ++j1)
				for (int j2 = 0; j2 < 3; ++j2)
					CHECK(std::abs(k(i1 * 3 + i2, j1 * 3 + j2) - a(i1, j1) * b(i2, j2)) <= 1e-15);
	CHECK(std::abs(k.trace() - a.trace() * b.trace()) <= 1e-13);

	const ComplexMatrix chain = tsl::kron_chain({&kPauliX, &kPauliZ, &kPauliY});
	const ComplexMatrix nested = kron(kron(kPauliX, kPauliZ), kPauliY);
	CHECK(chain.dim() == 8);
	for (int i = 0; i < 8; ++i)
		for (int j = 0; j < 8; ++j) CHECK(chain(i, j) == nested(i, j));
}

TEST_CASE("hermitian eigensolver on known cases") {
	const tsl::EigResult z = hermitian_eig(kPauliZ);
	CHECK(z.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
	CHECK(z.values[1] == doctest::Approx(1.0).epsilon(1e-12));

	const tsl::EigResult x = hermitian_eig(kPauliX);
	CHECK(x.values[0] == doctest::Approx(-1.0).epsilon(1e-12));
	CHECK(x.values[1] == doctest::Approx(1.0).epsilon(1e-12));

	const ComplexMatrix d = ComplexMatrix::diagonal(std::vector<double>{3.0, -1.0, 2.0});
	const tsl::EigResult e = hermitian_eig(d);
	CHECK(e.values[0] == doctest::Approx(-1.0));
	CHECK(e.values[1] == doctest::Approx(2.0));
	CHECK(e.values[2] == doctest::Approx(3.0));

	const ComplexMatrix one = {{cplx(7.0, 0.0)}};
	CHECK(hermitian_eig(one).values[0] == doctest::Approx(7.0));

	CHECK_THROWS_AS(hermitian_eig(ComplexMatrix({{0.0, 1.0}, {2.0, 0.0}})), tsl::NotHermitian);
}

TEST_CASE("hermitian eigensolver: 2x2 closed form oracle") {
	tsltest::Rng rng(53);
	for (int iter = 0; iter < 50; ++iter) {
		const ComplexMatrix a = random_hermitian(rng, 2);
		const double p = a(0, 0).real(), q = a(1, 1).real();
		const double disc = std::sqrt(0.25 * (p - q) * (p - q) + std::norm(a(0, 1)));
		const double lo = 0.5 * (p + q) - disc, hi = 0.5 * (p + q) + disc;
		const tsl::EigResult e = hermitian_eig(a);
		CHECK(e.values[0] == doctest::Approx(lo).epsilon(1e-11));
		CHECK(e.values[1] == doctest::Approx(hi).epsilon(1e-11));
	}
}

TEST_CASE("hermitian eigensolver invariants on random matrices") {
	tsltest::Rng rng(54);
	for (int n : {1, 2, 3, 4, 6, 8}) {
		for (int iter = 0; iter < 6; ++iter) {
			const ComplexMatrix a = random_hermitian(rng, n);
			const tsl::EigResult e = hermitian_eig(a);

			// ascending values
			for (int i = 0; i + 1 < n; ++i) CHECK(e.values[i] <= e.values[i + 1]);

			// A U = U diag(values)
			const ComplexMatrix au = mat_mul(a, e.vectors);
			for (int i = 0; i < n; ++i)
				for (int j = 0; j < n; ++j)
					CHECK(std::abs(au(i, j) - e.vectors(i, j) * e.values[j]) <= 1e-9 * (1.0 + a.max_abs()));

			// unitarity
			const ComplexMatrix utu = mat_mul(e.vectors.adjoint(), e.vectors);
			for (int i = 0; i < n; ++i)
				for (int j = 0; j < n; ++j)
					CHECK(std::abs(utu(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-11);

			// trace and determinant
			double sum = 0.0, prod = 1.0;
			for (double v : e.values) {
				sum += v;
				prod *= v;
			}
			CHECK(std::abs(sum - a.trace().real()) <= 1e-9 * (1.0 + std::abs(sum)));
			if (n <= 4) {
				const cplx det = naive_det(a);
				CHECK(std::abs(det.imag()) <= 1e-9);
				CHECK(prod == doctest::Approx(det.real()).epsilon(1e-7));
			}
		}
	}
}

TEST_CASE("trace norm") {
	CHECK(trace_norm(ComplexMatrix::diagonal(std::vector<double>{3.0, -4.0})) ==
		  doctest::Approx(7.0).epsilon(1e-12));

	// nilpotent: single singular value 1
	CHECK(trace_norm(ComplexMatrix({{0.0, 1.0}, {0.0, 0.0}})) == doctest::Approx(1.0).epsilon(1e-9));

	// anti-Hermitian block: singular values sqrt(2), sqrt(2)
	const ComplexMatrix anti = {{0.0, cplx(1.0, 1.0)}, {cplx(-1.0, 1.0), 0.0}};
	CHECK(trace_norm(anti) == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));

	tsltest::Rng rng(55);
	for (int n : {2, 3, 5}) {
		// unitary matrices have all singular values equal to one
		const ComplexMatrix u = hermitian_eig(random_hermitian(rng, n)).vectors;
		CHECK(trace_norm(u) == doctest::Approx(static_cast<double>(n)).epsilon(1e-8));

		// Hermitian case equals the sum of absolute eigenvalues
		const ComplexMatrix h = random_hermitian(rng, n);
		double ref = 0.0;
		for (double v : hermitian_eig(h).values) ref += std::abs(v);
		CHECK(trace_norm(h) == doctest::Approx(ref).epsilon(1e-10));

		// general case: compare against the Hermitian dilation [[0, A], [A^+, 0]],
		// whose eigenvalues are plus/minus the singular values of A
		const ComplexMatrix a = random_matrix(rng, n);
		ComplexMatrix dil(2 * n);
		const ComplexMatrix at = a.adjoint();
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j) {
				dil(i, n + j) = a(i, j);
				dil(n + i, j) = at(i, j);
			}
		double dref = 0.0;
		for (double v : hermitian_eig(dil).values) dref += std::abs(v);
		CHECK(trace_norm(a) == doctest::Approx(0.5 * dref).epsilon(1e-8));

		// invariance under adjoint
		CHECK(trace_norm(a) == doctest::Approx(trace_norm(a.adjoint())).epsilon(1e-9));
	}
}
