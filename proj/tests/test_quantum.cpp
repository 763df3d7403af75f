#include "tsl/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "tsl/errors.hpp"
#include "tsl/numerics.hpp"
#include "tsl/transport.hpp"

using namespace tsl;
using tsltest::Rng;

namespace {

ComplexMatrix random_hermitian(Rng& rng, int dim, double scale = 1.0) {
	ComplexMatrix h(dim);
	for (int i = 0; i < dim; ++i) {
		h(i, i) = tsltest::urand(rng, -scale, scale);
		for (int j = i + 1; j < dim; ++j) {
			const cplx z{tsltest::urand(rng, -scale, scale), tsltest::urand(rng, -scale, scale)};
			h(i, j) = z;
			h(j, i) = std::conj(z);
		}
	}
	return h;
}

/** Full-rank random density matrix A A^dagger / tr. */
ComplexMatrix random_density(Rng& rng, int dim) {
	ComplexMatrix a(dim);
	for (int i = 0; i < dim; ++i)
		for (int j = 0; j < dim; ++j)
			a(i, j) = cplx{tsltest::urand(rng, -1.0, 1.0), tsltest::urand(rng, -1.0, 1.0)};
	ComplexMatrix rho = mat_mul(a, a.adjoint());
	rho *= 1.0 / rho.trace().real();
	rho.hermitize();
	return rho;
}

std::vector<cplx> random_state(Rng& rng, int dim) {
	std::vector<cplx> psi(static_cast<std::size_t>(dim));
	for (auto& c : psi) c = cplx{tsltest::urand(rng, -1.0, 1.0), tsltest::urand(rng, -1.0, 1.0)};
	return psi;
}

double edge_flow_sum(const FlowField& f) {
	double s = 0.0;
	for (const double v : f.edge) s += std::abs(v);
	return s;
}

double external_flow_sum(const FlowField& f) {
	double s = 0.0;
	for (const double v : f.external) s += std::abs(v);
	return s;
}

}  // namespace

TEST_CASE("density matrix construction and validation") {
	const DensityMatrix plus = DensityMatrix::pure({1.0, 1.0});
	CHECK(plus.dim() == 2);
	CHECK(plus.matrix()(0, 0).real() == doctest::Approx(0.5).epsilon(1e-12));
	CHECK(plus.matrix()(0, 1).real() == doctest::Approx(0.5).epsilon(1e-12));

	const DensityMatrix mixed = DensityMatrix::maximally_mixed(4);
	CHECK(mixed.matrix()(2, 2).real() == doctest::Approx(0.25));
	CHECK(mixed.min_eigenvalue() == doctest::Approx(0.25).epsilon(1e-12));
	CHECK_NOTHROW(mixed.check_positive());

	ComplexMatrix bad(2);
	bad(0, 0) = 0.5;
	bad(1, 1) = 0.5;
	bad(0, 1) = cplx{0.0, 0.4};
	bad(1, 0) = cplx{0.0, 0.4};  // not conjugate-symmetric
	CHECK_THROWS_AS(DensityMatrix{bad}, NotHermitian);

	ComplexMatrix off_trace(2);
	off_trace(0, 0) = 0.7;
	off_trace(1, 1) = 0.2;
	CHECK_THROWS_AS(DensityMatrix{off_trace}, InvariantViolation);

	ComplexMatrix indefinite(2);
	indefinite(0, 0) = 1.5;
	indefinite(1, 1) = -0.5;
	const DensityMatrix neg{indefinite};
	CHECK(neg.min_eigenvalue() == doctest::Approx(-0.5));
	CHECK_THROWS_AS(neg.check_positive(), InvariantViolation);

	CHECK_THROWS_AS(DensityMatrix::pure({0.0, 0.0}), NonPositiveEntry);
	CHECK_THROWS_AS(DensityMatrix::maximally_mixed(0), DimensionMismatch);
}

TEST_CASE("energy fluctuation: pinned values and eigendecomposition oracle") {
	// Eigenstate of the observable -> zero spread.
	const DensityMatrix up = DensityMatrix::pure({1.0, 0.0});
	CHECK(energy_fluctuation(up, pauli_z()) == doctest::Approx(0.0).epsilon(1e-12));

	// sigma_z on the maximally mixed qubit -> exactly 1.
	CHECK(energy_fluctuation(DensityMatrix::maximally_mixed(2), pauli_z()) ==
		  doctest::Approx(1.0).epsilon(1e-12));

	Rng rng(4401);
	for (int rep = 0; rep < 30; ++rep) {
		const int dim = tsltest::irand(rng, 2, 6);
		const ComplexMatrix a = random_hermitian(rng, dim, 2.0);
		const ComplexMatrix rho = random_density(rng, dim);
		const EigResult eig = hermitian_eig(a);
		double mean = 0.0, second = 0.0;
		for (int k = 0; k < dim; ++k) {
			cplx pop = 0.0;
			for (int i = 0; i < dim; ++i)
				for (int j = 0; j < dim; ++j)
					pop += std::conj(eig.vectors(i, k)) * rho(i, j) * eig.vectors(j, k);
			mean += eig.values[static_cast<std::size_t>(k)] * pop.real();
			second += eig.values[static_cast<std::size_t>(k)] *
					  eig.values[static_cast<std::size_t>(k)] * pop.real();
		}
		const double oracle = std::sqrt(std::max(0.0, second - mean * mean));
		CHECK(energy_fluctuation(rho, a) == doctest::Approx(oracle).epsilon(1e-9));
	}

	ComplexMatrix skew(2);
	skew(0, 1) = 1.0;  // not Hermitian
	CHECK_THROWS_AS(energy_fluctuation(up, skew), NotHermitian);
}

TEST_CASE("master-equation right-hand side: pinned cases and trace preservation") {
	// Commuting diagonal Hamiltonian and state, no jumps -> exactly zero.
	QuantumModel diag;
	diag.dim = 3;
	diag.hamiltonian = ComplexMatrix::diagonal(std::vector<double>{0.3, -1.0, 2.0});
	diag.graph = Graph(3, {}, true);
	const ComplexMatrix rho_diag = ComplexMatrix::diagonal(std::vector<double>{0.2, 0.3, 0.5});
	CHECK(lindblad_rhs(diag, rho_diag).max_abs() <= 1e-15);

	// Pure decay: d rho_11 / dt = -gamma.
	const double gamma = 0.8;
	QuantumModel decay;
	decay.dim = 2;
	decay.hamiltonian = ComplexMatrix(2);
	decay.graph = Graph(2, {}, true);
	ComplexMatrix lower(2);
	lower(0, 1) = std::sqrt(gamma);
	decay.jumps.push_back(JumpOperator{lower, -1, 0, 0.0, -1});
	ComplexMatrix excited(2);
	excited(1, 1) = 1.0;
	const ComplexMatrix rhs = lindblad_rhs(decay, excited);
	CHECK(rhs(1, 1).real() == doctest::Approx(-gamma).epsilon(1e-12));
	CHECK(rhs(0, 0).real() == doctest::Approx(gamma).epsilon(1e-12));

	// Random models keep the trace flat to rounding.
	Rng rng(4402);
	for (int rep = 0; rep < 25; ++rep) {
		const int dim = tsltest::irand(rng, 2, 6);
		QuantumModel m;
		m.dim = dim;
		m.hamiltonian = random_hermitian(rng, dim, 1.5);
		m.graph = Graph(dim, {}, true);
		const int jumps = tsltest::irand(rng, 0, 3);
		for (int k = 0; k < jumps; ++k) {
			ComplexMatrix l(dim);
			for (int i = 0; i < dim; ++i)
				for (int j = 0; j < dim; ++j)
					l(i, j) = cplx{tsltest::urand(rng, -0.7, 0.7), tsltest::urand(rng, -0.7, 0.7)};
			m.jumps.push_back(JumpOperator{std::move(l), -1, 0, 0.0, -1});
		}
		const ComplexMatrix rho = random_density(rng, dim);
		CHECK(std::abs(lindblad_rhs(m, rho).trace()) <= 1e-12);
	}

	CHECK_THROWS_AS(lindblad_rhs(decay, ComplexMatrix(3)), DimensionMismatch);
}

TEST_CASE("two-site boson exchange oscillates as cos^2(gamma t)") {
	const double gamma = 0.7;
	const Graph pairg = Graph::chain(2);
	const QuantumModel model =
		boson_lattice_model(pairg, gamma, 0.0, 0.0, {0.0, 0.0}, {0.0, 0.0}, 1);
	CHECK(model.dim == 4);

	// One boson on site 0: basis index 1*2 + 0 = 2 (site 0 most significant).
	std::vector<cplx> psi(4);
	psi[2] = 1.0;
	const QuantumTrajectory run = boson_trajectory(model, DensityMatrix::pure(psi), 2.0, 1600);

	for (int k = 0; k < run.trajectory.sample_count(); ++k) {
		const double t = run.trajectory.times[static_cast<std::size_t>(k)];
		const double expected = std::cos(gamma * t) * std::cos(gamma * t);
		CHECK(run.trajectory.measures[static_cast<std::size_t>(k)][0] ==
			  doctest::Approx(expected).epsilon(5e-7));
		// Isolated lattice: total occupation conserved.
		CHECK(std::abs(run.trajectory.measures[static_cast<std::size_t>(k)].total() - 1.0) <=
			  1e-8);
	}
	CHECK(run.report.max_trace_drift <= 1e-10);
	CHECK(run.report.min_eigenvalue >= -1e-7);
	validate_trajectory(run.trajectory);

	// Master bound holds end to end (no external flows -> infinite mode valid).
	const BoundReport rep = speed_limit_report(run.trajectory, Lambda::infinite());
	CHECK(rep.tau_bound <= 2.0 * (1.0 + 1e-6));
	CHECK(rep.distance > 0.1);
}

TEST_CASE("ladder and lattice operator entries") {
	const ComplexMatrix b = boson_ladder(2);
	CHECK(b(0, 1).real() == doctest::Approx(1.0));
	CHECK(b(1, 2).real() == doctest::Approx(std::sqrt(2.0)));
	CHECK(std::abs(b(1, 0)) == 0.0);
	CHECK(std::abs(b(2, 2)) == 0.0);
	CHECK_THROWS_AS(boson_ladder(0), NonPositiveEntry);

	const Graph single(1, {}, true);
	const QuantumModel m = boson_lattice_model(single, 0.0, 0.0, 0.0, {0.25}, {1.0}, 2);
	CHECK(m.site_observables[0](1, 1).real() == doctest::Approx(1.0));
	CHECK(m.site_observables[0](2, 2).real() == doctest::Approx(2.0));
	REQUIRE(m.jumps.size() == 2);
	// L_+ = sqrt(0.25) b^dagger, L_- = sqrt(1.0) b, paired with opposite entropies.
	CHECK(m.jumps[0].op(1, 0).real() == doctest::Approx(0.5));
	CHECK(m.jumps[0].op(2, 1).real() == doctest::Approx(0.5 * std::sqrt(2.0)));
	CHECK(m.jumps[1].op(0, 1).real() == doctest::Approx(1.0));
	CHECK(m.jumps[0].entropy == doctest::Approx(std::log(0.25)));
	CHECK(m.jumps[0].pair == 1);
	CHECK(m.jumps[1].pair == 0);

	CHECK_THROWS_AS(boson_lattice_model(single, 0.0, 0.0, 0.0, {0.5}, {0.0}, 2), UnpairedJump);
	CHECK_THROWS_AS(boson_lattice_model(Graph::chain(4), 1.0, 0.0, 0.0,
										std::vector<double>(4, 0.0), std::vector<double>(4, 0.0),
										9),
					DimensionCap);
}

TEST_CASE("boson flows: diagonal states, driven steady state, entropy identities") {
	Rng rng(4403);

	// Fock (diagonal) states carry no exchange flow.
	const Graph pairg = Graph::chain(2);
	const QuantumModel hop =
		boson_lattice_model(pairg, 0.9, 0.4, 0.2, {0.0, 0.0}, {0.0, 0.0}, 2);
	std::vector<cplx> fock(9);
	fock[3] = 1.0;  // |n0=1, n1=0>
	const QuantumFlowSnapshot still = boson_flows(hop, DensityMatrix::pure(fock));
	CHECK(std::abs(still.flow.edge[0]) <= 1e-14);
	CHECK(still.a_t == 0.0);

	// Driven single site: the truncated thermal state is stationary, f_i = 0.
	const Graph single(1, {}, true);
	const double up = 0.3, down = 0.9;
	const QuantumModel driven = boson_lattice_model(single, 0.0, 0.0, 0.0, {up}, {down}, 4);
	const double r = up / down;
	std::vector<double> p(5);
	double norm = 0.0;
	for (int n = 0; n < 5; ++n) {
		p[static_cast<std::size_t>(n)] = std::pow(r, n);
		norm += p[static_cast<std::size_t>(n)];
	}
	for (double& v : p) v /= norm;
	const ComplexMatrix steady = ComplexMatrix::diagonal(p);
	const QuantumFlowSnapshot ss = boson_flows(driven, steady);
	CHECK(std::abs(ss.flow.external[0]) <= 1e-12);
	CHECK(std::abs(ss.sigma_t) <= 1e-10);  // stationary => no entropy production
	CHECK(ss.a_t > 0.0);
	CHECK(lindblad_rhs(driven, steady).max_abs() <= 1e-12);

	// Random dissipative states: entropy rate nonnegative, flow bound of the
	// external term, and the full velocity bound at several lambda.
	const QuantumModel open2 =
		boson_lattice_model(pairg, 0.8, 0.5, 0.1, {0.4, 0.7}, {0.9, 0.5}, 2);
	for (int rep = 0; rep < 30; ++rep) {
		const ComplexMatrix rho = random_density(rng, 9);
		const QuantumFlowSnapshot s = boson_flows(open2, rho);
		CHECK(s.sigma_t >= -1e-9);
		CHECK(s.a_t >= 0.0);
		CHECK(external_flow_sum(s.flow) <=
			  std::sqrt(std::max(0.0, s.sigma_t * s.a_t) / 2.0) + 1e-9);
		for (const double lam : {0.5, 2.0}) {
			const double bound = boson_velocity_bound(s, 0.8, pairg.max_degree(), Lambda::finite(lam));
			CHECK(velocity(s.flow, lam) <= bound + 1e-9);
		}
	}

	// Three sites with one isolated site: its external flow stays zero.
	const Graph chain3 = Graph::chain(3);
	const QuantumModel tri =
		boson_lattice_model(chain3, 0.6, 0.3, 0.0, {0.5, 0.0, 0.2}, {0.8, 0.0, 0.6}, 1);
	for (int rep = 0; rep < 20; ++rep) {
		const ComplexMatrix rho = random_density(rng, 8);
		const QuantumFlowSnapshot s = boson_flows(tri, rho);
		CHECK(std::abs(s.flow.external[1]) <= 1e-14);
		CHECK(external_flow_sum(s.flow) <=
			  std::sqrt(std::max(0.0, s.sigma_t * s.a_t) / 2.0) + 1e-9);
		boson_velocity_bound(s, 0.6, chain3.max_degree(), Lambda::finite(1.0));
	}
}

TEST_CASE("boson velocity bound: vacuum, isolated, and dissipative trajectories") {
	const Graph pairg = Graph::chain(2);

	// Vacuum: zero measure, zero flows, zero bound.
	const QuantumModel iso = boson_lattice_model(pairg, 1.1, 0.0, 0.0, {0.0, 0.0}, {0.0, 0.0}, 1);
	std::vector<cplx> vac(4);
	vac[0] = 1.0;
	const QuantumFlowSnapshot vs = boson_flows(iso, DensityMatrix::pure(vac));
	CHECK(boson_velocity_bound(vs, 1.1, pairg.max_degree(), Lambda::finite(1.0)) ==
		  doctest::Approx(0.0).epsilon(1e-12));
	CHECK(velocity(vs.flow, 1.0) <= 1e-12);

	// Isolated system: sigma = a = 0, bound reduces to gamma d_G N.
	std::vector<cplx> one(4);
	one[2] = 1.0;
	const QuantumFlowSnapshot is = boson_flows(iso, DensityMatrix::pure(one));
	CHECK(is.a_t == 0.0);
	CHECK(boson_velocity_bound(is, 1.1, 1, Lambda::infinite()) ==
		  doctest::Approx(1.1 * 1.0).epsilon(1e-9));

	// Dissipative trajectory: validates, satisfies the master bound at finite lambda.
	Rng rng(4404);
	const QuantumModel open2 = boson_lattice_model(pairg, 0.8, 0.5, 0.1, {0.4, 0.7}, {0.9, 0.5}, 2);
	const QuantumTrajectory run =
		boson_trajectory(open2, DensityMatrix(random_density(rng, 9)), 0.5, 250);
	validate_trajectory(run.trajectory);
	CHECK(run.report.max_trace_drift <= 1e-7);
	CHECK(run.report.min_eigenvalue >= -1e-7);
	for (const double lam : {0.5, 1.0, 2.0}) {
		const BoundReport rep = speed_limit_report(run.trajectory, Lambda::finite(lam));
		CHECK(rep.tau_bound <= rep.tau * (1.0 + 1e-6));
	}
	// Pointwise Eq-(28)-style cap integrates to a bound on the average velocity.
	for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
		const double bound =
			boson_velocity_bound(run.snapshots[k], 0.8, pairg.max_degree(), Lambda::finite(1.0));
		CHECK(velocity(run.snapshots[k].flow, 1.0) <= bound + 1e-9);
	}
}

TEST_CASE("truncation monitor flags populated top Fock levels") {
	const Graph pairg = Graph::chain(2);
	// n_max = 1 with one boson: the top level is heavily populated -> flagged.
	const QuantumModel tight = boson_lattice_model(pairg, 0.7, 0.0, 0.0, {0.0, 0.0}, {0.0, 0.0}, 1);
	std::vector<cplx> one(4);
	one[2] = 1.0;
	const QuantumTrajectory t1 = boson_trajectory(tight, DensityMatrix::pure(one), 0.3, 60);
	CHECK(t1.report.truncation_flag);
	CHECK(t1.report.max_truncation > 0.4);

	// Deep truncation with weak drive: the top level stays empty.
	const Graph single(1, {}, true);
	const QuantumModel roomy = boson_lattice_model(single, 0.0, 0.0, 0.0, {0.05}, {1.0}, 6);
	const QuantumTrajectory t2 =
		boson_trajectory(roomy, DensityMatrix::pure(std::vector<cplx>{1, 0, 0, 0, 0, 0, 0}), 1.0,
						 120);
	CHECK_FALSE(t2.report.truncation_flag);
	CHECK(t2.report.max_truncation <= 1e-6);
}

TEST_CASE("spin chain: measure, conservation, flows, and the transfer-time bound") {
	const double gamma = 1.0;
	const int sites = 4;
	const QuantumModel chain = spin_chain_model(sites, gamma);
	CHECK(chain.dim == 16);
	CHECK(chain.graph.max_degree() == 2);

	// |up down down down> -> x = [1,0,0,0], index 0*8+1*4+1*2+1 = 7.
	std::vector<cplx> psi(16);
	psi[7] = 1.0;
	const DensityMatrix rho0 = DensityMatrix::pure(psi);
	const QuantumFlowSnapshot first = spin_flows(chain, rho0);
	CHECK(first.measure[0] == doctest::Approx(1.0).epsilon(1e-12));
	CHECK(first.measure.total() == doctest::Approx(1.0).epsilon(1e-12));

	// W1 from the start to full transfer equals the chain length.
	const Measure target = Measure::delta(sites, sites - 1);
	CHECK(wasserstein1(chain.graph, first.measure, target).value ==
		  doctest::Approx(sites - 1.0).epsilon(1e-10));

	// Evolve to the bound horizon (N-1)/(2 gamma): the state never comes close
	// to the transferred measure before that time.
	const double horizon = (sites - 1) / (2.0 * gamma);
	const QuantumTrajectory run = spin_trajectory(chain, rho0, horizon, 600);
	validate_trajectory(run.trajectory);
	double closest = 1e300;
	for (int k = 0; k < run.trajectory.sample_count(); ++k) {
		const Measure& x = run.trajectory.measures[static_cast<std::size_t>(k)];
		CHECK(std::abs(x.total() - 1.0) <= 1e-8);  // magnetization conserved
		const QuantumFlowSnapshot& s = run.snapshots[k];
		CHECK(velocity(s.flow, 0.0) <= spin_velocity_bound(chain, s) + 1e-9);
		if (run.trajectory.times[static_cast<std::size_t>(k)] < horizon - 1e-9)
			closest = std::min(closest, wasserstein1(chain.graph, x, target).value);
	}
	CHECK(closest > 0.05);

	// Master bound end to end (no external flows -> infinite mode).
	const BoundReport rep = speed_limit_report(run.trajectory, Lambda::infinite());
	CHECK(rep.tau_bound <= rep.tau * (1.0 + 1e-6));

	CHECK_THROWS_AS(spin_chain_model(1, 1.0), NonPositiveEntry);
	CHECK_THROWS_AS(spin_chain_model(13, 1.0), DimensionCap);
}

TEST_CASE("spin chain under a piecewise control field conserves magnetization") {
	const double gamma = 0.9;
	const int sites = 5;
	const auto field = [](double t, int site) {
		const int seg = static_cast<int>(t / 0.25);
		return 1.5 * std::sin(3.7 * seg + 1.3 * site);
	};
	const QuantumModel chain = spin_chain_model(sites, gamma, field);

	Rng rng(4405);
	const DensityMatrix rho0 = DensityMatrix::pure(random_state(rng, 32));
	// The discontinuous field costs the integrator an O(h^2) positivity hit at
	// each segment boundary; allow a correspondingly looser tolerance.
	EvolutionOptions opts;
	opts.positivity_tol = 1e-6;
	const QuantumTrajectory run = spin_trajectory(chain, rho0, 1.0, 1600, opts);
	validate_trajectory(run.trajectory);

	const double m0 = run.trajectory.measures.front().total();
	for (int k = 0; k < run.trajectory.sample_count(); ++k) {
		CHECK(std::abs(run.trajectory.measures[static_cast<std::size_t>(k)].total() - m0) <= 1e-8);
		const QuantumFlowSnapshot& s = run.snapshots[k];
		CHECK(velocity(s.flow, 0.0) <= gamma * 2.0 * m0 + 1e-9);
	}
	const BoundReport rep = speed_limit_report(run.trajectory, Lambda::infinite());
	CHECK(rep.tau_bound <= rep.tau * (1.0 + 1e-6));
}

TEST_CASE("projective snapshots: pinned cases and the fluctuation bound") {
	// Two-level H = sigma_x with rho = |+><+|: stationary populations, no flow.
	ComplexMatrix p0(2), p1(2);
	p0(0, 0) = 1.0;
	p1(1, 1) = 1.0;
	const ProjectiveFamily qubit{{p0, p1}, Graph::chain(2)};
	const QuantumFlowSnapshot plus =
		isolated_projective(pauli_x(), qubit, DensityMatrix::pure({1.0, 1.0}));
	CHECK(std::abs(plus.flow.edge[0]) <= 1e-12);
	CHECK(plus.energy_fluctuation == doctest::Approx(1.0).epsilon(1e-9));

	// Hamiltonian diagonal in the projector basis: no flow for any state.
	Rng rng(4406);
	{
		const int dim = 3;
		std::vector<ComplexMatrix> ps;
		for (int n = 0; n < dim; ++n) {
			ComplexMatrix p(dim);
			p(n, n) = 1.0;
			ps.push_back(std::move(p));
		}
		const ProjectiveFamily fam{ps, Graph::complete(dim)};
		const ComplexMatrix h = ComplexMatrix::diagonal(std::vector<double>{2.0, -1.0, 0.5});
		const QuantumFlowSnapshot s = isolated_projective(h, fam, random_density(rng, dim));
		CHECK(edge_flow_sum(s.flow) <= 1e-12);
	}

	// Random configurations: velocity <= sqrt(d_G) * fluctuation.
	for (int rep = 0; rep < 40; ++rep) {
		const int dim = tsltest::irand(rng, 4, 6);
		std::vector<ComplexMatrix> ps;
		const EigResult basis = hermitian_eig(random_hermitian(rng, dim));
		for (int n = 0; n < dim; ++n) {
			ComplexMatrix p(dim);
			for (int i = 0; i < dim; ++i)
				for (int j = 0; j < dim; ++j)
					p(i, j) = basis.vectors(i, n) * std::conj(basis.vectors(j, n));
			ps.push_back(std::move(p));
		}
		const ProjectiveFamily fam{ps, Graph::complete(dim)};
		const ComplexMatrix h = random_hermitian(rng, dim, 1.5);
		const ComplexMatrix rho = rep % 2 == 0
									  ? random_density(rng, dim)
									  : DensityMatrix::pure(random_state(rng, dim)).matrix();
		const QuantumFlowSnapshot s = isolated_projective(h, fam, rho);
		const double cap = std::sqrt(static_cast<double>(dim - 1)) * s.energy_fluctuation;
		CHECK(edge_flow_sum(s.flow) <= cap + 1e-9);
		CHECK(s.measure.total() == doctest::Approx(1.0).epsilon(1e-8));
	}

	// Coarse (rank-2) projectors work too.
	{
		ComplexMatrix a(4), b(4);
		a(0, 0) = a(1, 1) = 1.0;
		b(2, 2) = b(3, 3) = 1.0;
		const ProjectiveFamily fam{{a, b}, Graph::chain(2)};
		const QuantumFlowSnapshot s =
			isolated_projective(random_hermitian(rng, 4), fam, random_density(rng, 4));
		CHECK(s.measure.total() == doctest::Approx(1.0).epsilon(1e-9));
		CHECK(edge_flow_sum(s.flow) <= s.energy_fluctuation + 1e-9);  // d_G = 1
	}
}

TEST_CASE("projective family validation") {
	Rng rng(4407);
	const ComplexMatrix h = random_hermitian(rng, 3);
	const ComplexMatrix rho = random_density(rng, 3);

	// Missing projector -> incomplete family.
	ComplexMatrix p0(3), p1(3);
	p0(0, 0) = 1.0;
	p1(1, 1) = 1.0;
	CHECK_THROWS_AS(isolated_projective(h, ProjectiveFamily{{p0, p1}, Graph::chain(2)}, rho),
					IncompleteProjectors);

	// Non-idempotent "projector".
	ComplexMatrix half = ComplexMatrix::identity(3);
	half *= 0.5;
	CHECK_THROWS_AS(isolated_projective(h, ProjectiveFamily{{half, half}, Graph::chain(2)}, rho),
					IncompleteProjectors);

	// Topology that misses a flow-carrying pair is rejected.
	std::vector<ComplexMatrix> ps;
	for (int n = 0; n < 3; ++n) {
		ComplexMatrix p(3);
		p(n, n) = 1.0;
		ps.push_back(std::move(p));
	}
	ComplexMatrix hop(3);  // direct 0 <-> 2 coupling, but the chain graph lacks that edge
	hop(0, 2) = 1.0;
	hop(2, 0) = 1.0;
	CHECK_THROWS_AS(
		isolated_projective(hop, ProjectiveFamily{ps, Graph::chain(3)},
							DensityMatrix::pure({1.0, 0.0, cplx{0.0, 1.0}}).matrix()),
		InvariantViolation);
}

TEST_CASE("measured walk: degenerate case, cross-check, and bound chain") {
	// No segments -> no motion, zero distance.
	const WalkResult still = measured_walk_simulate(5, {0.8, 0.8, 0.8, 0.8}, 0.4, 0, 2);
	CHECK(still.trajectory.sample_count() == 1);
	CHECK(still.report.distance == 0.0);
	CHECK(still.report.tau_bound == 0.0);

	// A single segment matches the direct projective snapshot at the endpoint.
	const int sites = 5;
	const std::vector<double> couplings(4, 0.8);
	const WalkResult one = measured_walk_simulate(sites, couplings, 0.5, 1, 2, 40);
	CHECK(one.trajectory.graph.max_degree() == 2);
	{
		ComplexMatrix h(sites);
		for (int n = 0; n + 1 < sites; ++n) {
			h(n, n + 1) = couplings[static_cast<std::size_t>(n)];
			h(n + 1, n) = couplings[static_cast<std::size_t>(n)];
		}
		QuantumModel free;
		free.dim = sites;
		free.hamiltonian = h;
		free.graph = Graph::chain(sites);
		std::vector<cplx> psi(static_cast<std::size_t>(sites));
		psi[2] = 1.0;
		ComplexMatrix last(sites);
		evolve_density(free, DensityMatrix::pure(psi), 0.5, 40,
					   [&](int, double, const ComplexMatrix& r) { last = r; });
		ProjectiveFamily fam{{}, Graph::chain(sites)};
		for (int n = 0; n < sites; ++n) {
			ComplexMatrix p(sites);
			p(n, n) = 1.0;
			fam.projectors.push_back(std::move(p));
		}
		const QuantumFlowSnapshot direct = isolated_projective(h, fam, last);
		const FlowField& recorded = one.trajectory.flows.back();
		for (std::size_t e = 0; e < recorded.edge.size(); ++e)
			CHECK(recorded.edge[e] == doctest::Approx(direct.flow.edge[e]).epsilon(1e-10));
		for (int i = 0; i < sites; ++i)
			CHECK(one.trajectory.measures.back()[i] ==
				  doctest::Approx(direct.measure[i]).epsilon(1e-10));
	}

	// Multi-segment run: trajectory valid, bounds ordered W1/<v> >= W1/(sqrt2 <dH>).
	const WalkResult walk = measured_walk_simulate(7, std::vector<double>(6, 1.0), 0.35, 6, 3, 40);
	validate_trajectory(walk.trajectory);
	const double tau = 6 * 0.35;
	CHECK(walk.report.tau == doctest::Approx(tau).epsilon(1e-12));
	CHECK(walk.report.tau_bound <= tau * (1.0 + 1e-6));
	CHECK(walk.report.avg_velocity <= walk.avg_fluctuation + 1e-9);
	CHECK(walk.fluctuation_bound <= walk.report.tau_bound + 1e-9);
	CHECK(walk.fluctuation_bound > 0.0);
	// Dephasing keeps the populations continuous across segment boundaries.
	for (int k = 0; k + 1 < walk.trajectory.sample_count(); ++k)
		CHECK(walk.trajectory.times[static_cast<std::size_t>(k)] <
			  walk.trajectory.times[static_cast<std::size_t>(k) + 1]);

	CHECK_THROWS_AS(measured_walk_simulate(1, {}, 0.1, 1, 0), NonPositiveEntry);
	CHECK_THROWS_AS(measured_walk_simulate(3, {1.0}, 0.1, 1, 0), LengthMismatch);
	CHECK_THROWS_AS(measured_walk_simulate(3, {1.0, 1.0}, 0.1, 1, 5), DimensionMismatch);
}

TEST_CASE("open system: classical current oracle and entropy identities") {
	const double eps0 = 0.0, eps1 = 1.3;
	const double gplus = 0.35, gminus = 0.85;
	const ComplexMatrix h = ComplexMatrix::diagonal(std::vector<double>{eps0, eps1});

	ComplexMatrix ldown(2), lup(2);
	ldown(0, 1) = std::sqrt(gminus);
	lup(1, 0) = std::sqrt(gplus);
	const double s_down = std::log(gminus / gplus);
	std::vector<JumpOperator> jumps;
	jumps.push_back(JumpOperator{ldown, -1, -1, s_down, 1});
	jumps.push_back(JumpOperator{lup, -1, +1, -s_down, 0});
	const OpenSystemModel model = open_system_model(h, jumps);
	CHECK(model.base.graph.edge_count() == 1);

	// Diagonal state: the edge flow is the classical master-equation current.
	const double x0 = 0.3, x1 = 0.7;
	const ComplexMatrix rho = ComplexMatrix::diagonal(std::vector<double>{x0, x1});
	const ComplexMatrix v0(2);
	const QuantumFlowSnapshot s = open_system_flows(model, v0, rho);
	CHECK(s.flow.edge[0] == doctest::Approx(gplus * x0 - gminus * x1).epsilon(1e-12));
	CHECK(external_flow_sum(s.flow) <= 1e-14);  // V = 0 -> no coherent flows
	CHECK(s.a_t == doctest::Approx(gminus * x1 + gplus * x0).epsilon(1e-12));
	const double j = gminus * x1 - gplus * x0;
	const double oracle = j * std::log((gminus * x1) / (gplus * x0));
	CHECK(s.sigma_pop + s.sigma_env == doctest::Approx(oracle).epsilon(1e-9));
	CHECK(s.sigma_t >= -1e-12);
}

TEST_CASE("open system: random states satisfy the flow and entropy bounds") {
	Rng rng(4408);
	const int dim = 4;
	const ComplexMatrix h = ComplexMatrix::diagonal(std::vector<double>{0.0, 0.7, 1.6, 2.9});

	// Energy-resolved jump pairs on four transitions.
	std::vector<JumpOperator> jumps;
	const std::vector<std::pair<int, int>> bonds{{0, 1}, {1, 2}, {0, 3}, {2, 3}};
	for (const auto& [lo, hi] : bonds) {
		const double rate = tsltest::urand(rng, 0.2, 1.0);
		const double s = tsltest::urand(rng, -1.0, 1.0);
		ComplexMatrix down(dim), up(dim);
		down(lo, hi) = std::sqrt(rate);
		up(hi, lo) = std::sqrt(rate) * std::exp(-s / 2.0);
		const int base = static_cast<int>(jumps.size());
		jumps.push_back(JumpOperator{down, -1, -1, s, base + 1});
		jumps.push_back(JumpOperator{up, -1, +1, -s, base});
	}
	const OpenSystemModel model = open_system_model(h, jumps);
	CHECK(model.base.graph.edge_count() == 4);

	for (int rep = 0; rep < 40; ++rep) {
		const ComplexMatrix rho = random_density(rng, dim);
		const ComplexMatrix v = random_hermitian(rng, dim, 1.2);
		const QuantumFlowSnapshot s = open_system_flows(model, v, rho);

		// Proven combination is nonnegative and matches the log-sum form.
		CHECK(s.sigma_pop + s.sigma_env >= -1e-10);
		double logsum = 0.0;
		for (std::size_t k = 0; k < model.transitions.size(); ++k) {
			const auto [to, from] = model.transitions[k];
			const int kp = model.base.jumps[k].pair;
			const double a = model.rates[k][static_cast<std::size_t>(to) * dim + from] *
							 s.measure[from];
			const double b =
				model.rates[static_cast<std::size_t>(kp)][static_cast<std::size_t>(from) * dim + to] *
				s.measure[to];
			logsum += 0.5 * (a - b) * std::log(a / b);
		}
		CHECK(s.sigma_pop + s.sigma_env == doctest::Approx(logsum).epsilon(1e-8));

		// Coherent-flow chain and the jump-flow entropic bound.
		const ComplexMatrix comm = mat_mul(v, rho) - mat_mul(rho, v);
		const double tn = trace_norm(comm);
		CHECK(external_flow_sum(s.flow) <= tn + 1e-9);
		CHECK(tn <= 2.0 * s.energy_fluctuation + 1e-9);
		CHECK(edge_flow_sum(s.flow) <=
			  std::sqrt(std::max(0.0, (s.sigma_pop + s.sigma_env) * s.a_t) / 2.0) + 1e-9);
		// Activity always caps the jump flows; together they give the two
		// velocity bounds 2 lambda dV + sqrt(...) and 2 lambda dV + a_t.
		CHECK(edge_flow_sum(s.flow) <= s.a_t + 1e-9);
		const double lam = 0.7;
		CHECK(velocity(s.flow, lam) <=
			  2.0 * lam * s.energy_fluctuation +
				  std::sqrt(std::max(0.0, s.sigma_t * s.a_t) / 2.0) + 1e-9);
	}
}

TEST_CASE("open system model validation") {
	Rng rng(4409);
	// Degenerate spectrum rejected.
	CHECK_THROWS_AS(open_system_model(ComplexMatrix::identity(3), {}), DegenerateSpectrum);

	const ComplexMatrix h = ComplexMatrix::diagonal(std::vector<double>{0.0, 1.0});
	ComplexMatrix ldown(2);
	ldown(0, 1) = 1.0;

	// Jumps must declare a partner.
	CHECK_THROWS_AS(open_system_model(h, {JumpOperator{ldown, -1, -1, 0.0, -1}}), UnpairedJump);

	// Multi-transition operators are not energy-resolved.
	{
		std::vector<JumpOperator> jumps;
		jumps.push_back(JumpOperator{pauli_x(), -1, 0, 0.0, 0});  // self-paired, Hermitian
		CHECK_THROWS_AS(open_system_model(h, jumps), UnpairedJump);
	}

	// Broken detailed-balance relation.
	{
		ComplexMatrix lup(2);
		lup(1, 0) = 0.5;  // wrong scale for entropy 0
		std::vector<JumpOperator> jumps;
		jumps.push_back(JumpOperator{ldown, -1, -1, 0.0, 1});
		jumps.push_back(JumpOperator{lup, -1, +1, 0.0, 0});
		CHECK_THROWS_AS(open_system_model(h, jumps), UnpairedJump);
	}

	// Self-paired Hermitian single-transition jump is legal (pure dephasing-like).
	{
		ComplexMatrix deph(2);
		deph(1, 1) = 0.9;
		std::vector<JumpOperator> jumps;
		jumps.push_back(JumpOperator{deph, -1, 0, 0.0, 0});
		const OpenSystemModel m = open_system_model(h, jumps);
		CHECK(m.base.graph.edge_count() == 0);
		const QuantumFlowSnapshot s =
			open_system_flows(m, ComplexMatrix(2), random_density(rng, 2));
		CHECK(s.a_t > 0.0);
		CHECK(s.sigma_pop + s.sigma_env >= -1e-12);
	}
}

TEST_CASE("open trajectory: driven three-level system end to end") {
	Rng rng(4410);
	const int dim = 3;
	const ComplexMatrix h = ComplexMatrix::diagonal(std::vector<double>{0.0, 0.8, 2.0});

	std::vector<JumpOperator> jumps;
	const std::vector<std::pair<int, int>> bonds{{0, 1}, {1, 2}};
	for (const auto& [lo, hi] : bonds) {
		const double rate = 0.6;
		const double s = 0.4;
		ComplexMatrix down(dim), up(dim);
		down(lo, hi) = std::sqrt(rate);
		up(hi, lo) = std::sqrt(rate) * std::exp(-s / 2.0);
		const int base = static_cast<int>(jumps.size());
		jumps.push_back(JumpOperator{down, -1, -1, s, base + 1});
		jumps.push_back(JumpOperator{up, -1, +1, -s, base});
	}
	const OpenSystemModel model = open_system_model(h, jumps);

	const ComplexMatrix vmat = random_hermitian(rng, dim, 0.5);
	const HamiltonianFn drive = [vmat](double t) { return cplx(std::cos(1.3 * t)) * vmat; };

	const QuantumTrajectory run =
		open_trajectory(model, drive, DensityMatrix(random_density(rng, dim)), 1.0, 400);
	validate_trajectory(run.trajectory);
	CHECK(run.report.max_trace_drift <= 1e-7);
	CHECK(run.report.min_eigenvalue >= -1e-7);
	for (const QuantumFlowSnapshot& s : run.snapshots) CHECK(s.sigma_pop + s.sigma_env >= -1e-9);
	for (const double lam : {0.5, 1.0}) {
		const BoundReport rep = speed_limit_report(run.trajectory, Lambda::finite(lam));
		CHECK(rep.tau_bound <= rep.tau * (1.0 + 1e-6));
	}
}
