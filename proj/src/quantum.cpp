#include "tsl/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "tsl/errors.hpp"
#include "tsl/numerics.hpp"

namespace tsl {

namespace {

constexpr cplx kI{0.0, 1.0};

void add_scaled(ComplexMatrix& y, cplx s, const ComplexMatrix& x) {
	cplx* yd = y.data();
	const cplx* xd = x.data();
	const std::size_t n = y.size();
	for (std::size_t i = 0; i < n; ++i) yd[i] += s * xd[i];
}

/** Cached pieces of the master-equation right-hand side. */
struct RhsContext {
	const QuantumModel& model;
	std::vector<ComplexMatrix> adjoints;  // L_k^dagger
	ComplexMatrix weight_sum;             // sum_k L_k^dagger L_k

	explicit RhsContext(const QuantumModel& m) : model(m), weight_sum(m.dim) {
		adjoints.reserve(m.jumps.size());
		for (const JumpOperator& j : m.jumps) {
			adjoints.push_back(j.op.adjoint());
			gemm_into(1.0, adjoints.back(), j.op, 1.0, weight_sum);
		}
	}

	void eval(double t, const ComplexMatrix& rho, ComplexMatrix& out, ComplexMatrix& tmp) const {
		if (model.hamiltonian_t) {
			const ComplexMatrix h = model.hamiltonian_t(t);
			if (h.dim() != model.dim)
				throw DimensionMismatch("time-dependent Hamiltonian has the wrong dimension");
			gemm_into(-kI, h, rho, 0.0, out);
			gemm_into(kI, rho, h, 1.0, out);
		} else {
			gemm_into(-kI, model.hamiltonian, rho, 0.0, out);
			gemm_into(kI, rho, model.hamiltonian, 1.0, out);
		}
		for (std::size_t k = 0; k < model.jumps.size(); ++k) {
			gemm_into(1.0, model.jumps[k].op, rho, 0.0, tmp);
			gemm_into(1.0, tmp, adjoints[k], 1.0, out);
		}
		if (!model.jumps.empty()) {
			gemm_into(-0.5, weight_sum, rho, 1.0, out);
			gemm_into(-0.5, rho, weight_sum, 1.0, out);
		}
	}
};

double real_tp(const ComplexMatrix& a, const ComplexMatrix& b) { return trace_product(a, b).real(); }

/** -tr(drho ln rho) in the instantaneous eigenbasis with clamped logs. */
double system_entropy_rate(const ComplexMatrix& rho, const ComplexMatrix& rhod) {
	const EigResult eig = hermitian_eig(rho);
	const int d = rho.dim();
	double out = 0.0;
	for (int k = 0; k < d; ++k) {
		cplx acc = 0.0;
		for (int i = 0; i < d; ++i) {
			cplx row = 0.0;
			for (int j = 0; j < d; ++j) row += rhod(i, j) * eig.vectors(j, k);
			acc += std::conj(eig.vectors(i, k)) * row;
		}
		const double dk = acc.real();
		const double p = eig.values[k];
		if (p < 1e-12 && std::abs(dk) < 1e-12) continue;  // removable singularity
		out -= dk * std::log(std::max(p, 1e-14));
	}
	return out;
}

/** Net flow into each vertex implied by a flow field. */
std::vector<double> induced_rates(const Graph& g, const FlowField& f) {
	std::vector<double> dx(f.external);
	for (int e = 0; e < g.edge_count(); ++e) {
		const Edge ed = g.edge(e);
		dx[ed.u] -= f.edge[e];
		dx[ed.v] += f.edge[e];
	}
	return dx;
}

void check_flow_consistency(const QuantumModel& model, const FlowField& f,
							const ComplexMatrix& rhod, double tol) {
	const std::vector<double> dx = induced_rates(model.graph, f);
	for (int i = 0; i < model.graph.vertex_count(); ++i) {
		const double expect = real_tp(model.site_observables[i], rhod);
		if (std::abs(dx[i] - expect) > tol * std::max(1.0, std::abs(expect)))
			throw InvariantViolation("flow field does not reproduce the measure derivative");
	}
}

Measure clamped_measure(std::vector<double> x) { return Measure(std::move(x), 1e-6); }

}  // namespace

// ---------------------------------------------------------------------------
// DensityMatrix
// ---------------------------------------------------------------------------

DensityMatrix::DensityMatrix(ComplexMatrix rho, double herm_tol, double trace_tol)
	: rho_(std::move(rho)) {
	if (rho_.dim() < 1) throw DimensionMismatch("density matrix must have positive dimension");
	if (!rho_.is_hermitian(herm_tol)) throw NotHermitian("density matrix is not Hermitian");
	const cplx tr = rho_.trace();
	if (std::abs(tr - 1.0) > trace_tol)
		throw InvariantViolation("density matrix trace deviates from one by " +
								 std::to_string(std::abs(tr - 1.0)));
	rho_.hermitize();
}

DensityMatrix DensityMatrix::pure(const std::vector<cplx>& psi) {
	const int d = static_cast<int>(psi.size());
	if (d < 1) throw DimensionMismatch("state vector is empty");
	double norm2 = 0.0;
	for (const cplx& c : psi) norm2 += std::norm(c);
	if (!(norm2 > 0.0) || !std::isfinite(norm2))
		throw NonPositiveEntry("state vector must have positive finite norm");
	ComplexMatrix rho(d);
	for (int i = 0; i < d; ++i)
		for (int j = 0; j < d; ++j) rho(i, j) = psi[i] * std::conj(psi[j]) / norm2;
	return DensityMatrix(std::move(rho));
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
	if (dim < 1) throw DimensionMismatch("dimension must be positive");
	ComplexMatrix rho(dim);
	for (int i = 0; i < dim; ++i) rho(i, i) = 1.0 / dim;
	return DensityMatrix(std::move(rho));
}

double DensityMatrix::min_eigenvalue() const { return hermitian_eig(rho_).values.front(); }

void DensityMatrix::check_positive(double tol) const {
	const double m = min_eigenvalue();
	if (m < -tol)
		throw InvariantViolation("density matrix has negative eigenvalue " + std::to_string(m));
}

// ---------------------------------------------------------------------------
// Model plumbing
// ---------------------------------------------------------------------------

ComplexMatrix QuantumModel::hamiltonian_at(double t) const {
	return hamiltonian_t ? hamiltonian_t(t) : hamiltonian;
}

Measure QuantumModel::measure_of(const ComplexMatrix& rho) const {
	if (measurement) return measurement(rho);
	std::vector<double> x(site_observables.size());
	for (std::size_t i = 0; i < site_observables.size(); ++i)
		x[i] = real_tp(site_observables[i], rho);
	return clamped_measure(std::move(x));
}

void validate_model(const QuantumModel& model) {
	if (model.dim < 1) throw DimensionMismatch("model dimension must be positive");
	if (model.dim > kDimensionCap)
		throw DimensionCap("model dimension " + std::to_string(model.dim) + " exceeds the cap " +
						   std::to_string(kDimensionCap));
	if (model.hamiltonian.dim() != model.dim)
		throw DimensionMismatch("Hamiltonian dimension does not match the model");
	if (!model.hamiltonian.is_hermitian(1e-9 * std::max(1.0, model.hamiltonian.max_abs())))
		throw NotHermitian("Hamiltonian is not Hermitian");
	const int n = static_cast<int>(model.jumps.size());
	for (int k = 0; k < n; ++k) {
		const JumpOperator& j = model.jumps[k];
		if (j.op.dim() != model.dim)
			throw DimensionMismatch("jump operator dimension does not match the model");
		if (j.pair < 0) continue;
		if (j.pair >= n) throw UnpairedJump("declared pair index is out of range");
		const JumpOperator& p = model.jumps[j.pair];
		if (p.pair != k) throw UnpairedJump("jump pairing is not reciprocal");
		if (std::abs(j.entropy + p.entropy) > 1e-12 * std::max(1.0, std::abs(j.entropy)))
			throw UnpairedJump("paired jumps must carry opposite entropy changes");
		ComplexMatrix expect = cplx(std::exp(j.entropy / 2.0)) * p.op.adjoint();
		expect -= j.op;
		if (expect.max_abs() > 1e-9 * std::max(1.0, j.op.max_abs()))
			throw UnpairedJump("declared pair violates local detailed balance");
	}
}

ComplexMatrix lindblad_rhs(const QuantumModel& model, const ComplexMatrix& rho, double t) {
	if (rho.dim() != model.dim)
		throw DimensionMismatch("density matrix dimension does not match the model");
	const RhsContext ctx(model);
	ComplexMatrix out(model.dim), tmp(model.dim);
	ctx.eval(t, rho, out, tmp);
	return out;
}

EvolutionReport evolve_density(const QuantumModel& model, const DensityMatrix& rho0, double tau,
							   int steps, const StepCallback& on_step,
							   const EvolutionOptions& opts) {
	validate_model(model);
	if (rho0.dim() != model.dim)
		throw DimensionMismatch("initial state dimension does not match the model");
	if (!(tau >= 0.0) || !std::isfinite(tau))
		throw NonPositiveEntry("evolution horizon must be finite and nonnegative");
	if (steps < 1) throw NonPositiveEntry("step count must be positive");

	const RhsContext ctx(model);
	const int d = model.dim;
	ComplexMatrix rho = rho0.matrix();
	ComplexMatrix k1(d), k2(d), k3(d), k4(d), stage(d), tmp(d);
	const double h = tau / steps;
	const bool monitor_truncation = model.truncation_monitor.dim() == d;

	std::vector<char> probe(static_cast<std::size_t>(steps) + 1, 0);
	const int checks = std::max(1, opts.positivity_checks);
	for (int j = 1; j <= checks; ++j) {
		const long long idx = static_cast<long long>(j) * steps / checks;
		probe[static_cast<std::size_t>(std::min<long long>(steps, std::max<long long>(1, idx)))] = 1;
	}
	probe[static_cast<std::size_t>(steps)] = 1;

	double max_drift = 0.0;
	double min_eig = 1.0;
	double max_trunc = 0.0;

	const auto monitor = [&](int index, double t) {
		const cplx tr = rho.trace();
		const double drift = std::abs(tr - 1.0);
		if (!std::isfinite(drift) || !std::isfinite(rho.max_abs()))
			throw NonFiniteState("density matrix became non-finite during evolution");
		if (drift > opts.trace_tol)
			throw InvariantViolation("trace drift " + std::to_string(drift) +
									 " exceeds the tolerance");
		max_drift = std::max(max_drift, drift);
		if (monitor_truncation)
			max_trunc = std::max(max_trunc, real_tp(model.truncation_monitor, rho));
		if (probe[static_cast<std::size_t>(index)]) {
			const double m = hermitian_eig(rho).values.front();
			if (m < -opts.positivity_tol)
				throw InvariantViolation("density matrix eigenvalue " + std::to_string(m) +
										 " fell below the positivity tolerance");
			min_eig = std::min(min_eig, m);
		}
		if (on_step) on_step(index, t, rho);
	};

	monitor(0, 0.0);
	for (int k = 0; k < steps; ++k) {
		const double t = k * h;
		ctx.eval(t, rho, k1, tmp);
		stage = rho;
		add_scaled(stage, 0.5 * h, k1);
		ctx.eval(t + 0.5 * h, stage, k2, tmp);
		stage = rho;
		add_scaled(stage, 0.5 * h, k2);
		ctx.eval(t + 0.5 * h, stage, k3, tmp);
		stage = rho;
		add_scaled(stage, h, k3);
		ctx.eval(t + h, stage, k4, tmp);
		add_scaled(rho, h / 6.0, k1);
		add_scaled(rho, h / 3.0, k2);
		add_scaled(rho, h / 3.0, k3);
		add_scaled(rho, h / 6.0, k4);
		rho.hermitize();
		monitor(k + 1, (k + 1) * h);
	}

	return EvolutionReport{DensityMatrix(std::move(rho), 1e-9, std::max(1e-8, opts.trace_tol)),
						   max_drift, min_eig, max_trunc, max_trunc > opts.truncation_tol};
}

// ---------------------------------------------------------------------------
// Fluctuations and operator helpers
// ---------------------------------------------------------------------------

double energy_fluctuation(const ComplexMatrix& rho, const ComplexMatrix& a) {
	if (a.dim() != rho.dim()) throw DimensionMismatch("observable dimension mismatch");
	if (!a.is_hermitian(1e-9 * std::max(1.0, a.max_abs())))
		throw NotHermitian("fluctuation requires a Hermitian observable");
	const ComplexMatrix arho = mat_mul(a, rho);
	const double mean = arho.trace().real();
	const double second = trace_product(a, arho).real();
	return std::sqrt(std::max(0.0, second - mean * mean));
}

double energy_fluctuation(const DensityMatrix& rho, const ComplexMatrix& a) {
	return energy_fluctuation(rho.matrix(), a);
}

ComplexMatrix pauli_x() { return ComplexMatrix{{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix pauli_y() { return ComplexMatrix{{0.0, -kI}, {kI, 0.0}}; }
ComplexMatrix pauli_z() { return ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}; }

ComplexMatrix boson_ladder(int n_max) {
	if (n_max < 1) throw NonPositiveEntry("Fock truncation must be at least 1");
	ComplexMatrix b(n_max + 1);
	for (int n = 0; n < n_max; ++n) b(n, n + 1) = std::sqrt(static_cast<double>(n + 1));
	return b;
}

ComplexMatrix site_embed(const ComplexMatrix& local, int site, int sites, int local_dim) {
	if (local.dim() != local_dim) throw DimensionMismatch("local operator has the wrong dimension");
	if (sites < 1 || site < 0 || site >= sites)
		throw DimensionMismatch("site index out of range");
	const ComplexMatrix eye = ComplexMatrix::identity(local_dim);
	std::vector<const ComplexMatrix*> factors(static_cast<std::size_t>(sites), &eye);
	factors[static_cast<std::size_t>(site)] = &local;
	return kron_chain(factors);
}

// ---------------------------------------------------------------------------
// Boson lattice
// ---------------------------------------------------------------------------

QuantumModel boson_lattice_model(const Graph& g, double gamma, double u, double mu,
								 const std::vector<double>& absorb,
								 const std::vector<double>& emit, int n_max) {
	const int v = g.vertex_count();
	if (n_max < 1) throw NonPositiveEntry("Fock truncation must be at least 1");
	if (static_cast<int>(absorb.size()) != v || static_cast<int>(emit.size()) != v)
		throw LengthMismatch("need one absorption and one emission rate per site");
	if (!(gamma >= 0.0) || !std::isfinite(gamma))
		throw NonPositiveEntry("hopping strength must be finite and nonnegative");

	long long dim = 1;
	for (int i = 0; i < v; ++i) {
		dim *= n_max + 1;
		if (dim > kDimensionCap)
			throw DimensionCap("Fock space dimension exceeds the cap " +
							   std::to_string(kDimensionCap));
	}
	const int d = static_cast<int>(dim);
	const int ld = n_max + 1;

	const ComplexMatrix b_local = boson_ladder(n_max);
	std::vector<ComplexMatrix> b(v), bd(v), num(v);
	for (int i = 0; i < v; ++i) {
		b[i] = site_embed(b_local, i, v, ld);
		bd[i] = b[i].adjoint();
		num[i] = mat_mul(bd[i], b[i]);
	}

	ComplexMatrix h(d);
	for (int e = 0; e < g.edge_count(); ++e) {
		const Edge ed = g.edge(e);
		gemm_into(-gamma, bd[ed.u], b[ed.v], 1.0, h);
		gemm_into(-gamma, bd[ed.v], b[ed.u], 1.0, h);
	}
	std::vector<double> onsite(static_cast<std::size_t>(ld));
	for (int n = 0; n < ld; ++n) onsite[static_cast<std::size_t>(n)] = 0.5 * u * n * (n - 1) - mu * n;
	const ComplexMatrix onsite_local = ComplexMatrix::diagonal(onsite);
	for (int i = 0; i < v; ++i) h += site_embed(onsite_local, i, v, ld);
	h.hermitize();

	QuantumModel m;
	m.kind = QuantumKind::boson;
	m.dim = d;
	m.hamiltonian = std::move(h);
	m.graph = g;
	m.gamma = gamma;
	m.site_observables = num;

	for (int e = 0; e < g.edge_count(); ++e) {
		const Edge ed = g.edge(e);
		ComplexMatrix f(d);
		gemm_into(cplx(0.0, -2.0 * gamma), bd[ed.u], b[ed.v], 0.0, f);
		m.edge_flow_ops.push_back(std::move(f));
	}

	for (int i = 0; i < v; ++i) {
		if (absorb[i] < 0.0 || emit[i] < 0.0 || !std::isfinite(absorb[i]) || !std::isfinite(emit[i]))
			throw NonPositiveEntry("jump rates must be finite and nonnegative");
		const bool ap = absorb[i] > 0.0;
		const bool em = emit[i] > 0.0;
		if (ap != em)
			throw UnpairedJump("site " + std::to_string(i) +
							   " has a one-sided jump rate; absorption and emission must both be "
							   "positive or both zero");
		if (!ap) continue;
		const double s = std::log(absorb[i] / emit[i]);
		const int base = static_cast<int>(m.jumps.size());
		m.jumps.push_back(JumpOperator{cplx(std::sqrt(absorb[i])) * bd[i], i, +1, s, base + 1});
		m.jumps.push_back(JumpOperator{cplx(std::sqrt(emit[i])) * b[i], i, -1, -s, base});
	}

	std::vector<double> top(static_cast<std::size_t>(ld), 0.0);
	top.back() = 1.0;
	const ComplexMatrix top_local = ComplexMatrix::diagonal(top);
	ComplexMatrix mon(d);
	for (int i = 0; i < v; ++i) mon += site_embed(top_local, i, v, ld);
	m.truncation_monitor = std::move(mon);

	validate_model(m);
	return m;
}

QuantumFlowSnapshot boson_flows(const QuantumModel& model, const ComplexMatrix& rho) {
	if (model.kind != QuantumKind::boson)
		throw InvariantViolation("boson_flows requires a boson lattice model");
	if (rho.dim() != model.dim)
		throw DimensionMismatch("density matrix dimension does not match the model");

	QuantumFlowSnapshot s;
	s.measure = model.measure_of(rho);
	s.flow = FlowField::zero(model.graph);
	for (int e = 0; e < model.graph.edge_count(); ++e)
		s.flow.edge[static_cast<std::size_t>(e)] = real_tp(model.edge_flow_ops[e], rho);

	for (const JumpOperator& j : model.jumps) {
		const ComplexMatrix lr = mat_mul(j.op, rho);
		const double rate = trace_product(lr, j.op.adjoint()).real();
		s.a_t += rate;
		s.sigma_env += rate * j.entropy;
		if (j.site >= 0) s.flow.external[static_cast<std::size_t>(j.site)] += j.direction * rate;
	}

	const ComplexMatrix rhod = lindblad_rhs(model, rho);
	s.sigma_sys = system_entropy_rate(rho, rhod);
	s.sigma_t = s.sigma_sys + s.sigma_env;
	check_flow_consistency(model, s.flow, rhod, 1e-8);
	return s;
}

QuantumFlowSnapshot boson_flows(const QuantumModel& model, const DensityMatrix& rho) {
	return boson_flows(model, rho.matrix());
}

double boson_velocity_bound(const QuantumFlowSnapshot& snap, double gamma, int d_g,
							const Lambda& lambda) {
	const double topo = gamma * d_g * snap.measure.total();
	const double dissip = std::sqrt(std::max(0.0, snap.sigma_t * snap.a_t) / 2.0);
	double bound = 0.0;
	if (lambda.is_infinite())
		bound = dissip > 1e-12 ? std::numeric_limits<double>::infinity() : topo;
	else
		bound = topo + lambda.value() * dissip;
	const double vel = velocity(snap.flow, lambda);
	if (vel > bound + 1e-9 * std::max(1.0, bound))
		throw InvariantViolation("flow velocity exceeds the boson bound");
	return bound;
}

// ---------------------------------------------------------------------------
// Spin network
// ---------------------------------------------------------------------------

QuantumModel spin_chain_model(int sites, double gamma,
							  const std::function<double(double t, int site)>& field) {
	if (sites < 2) throw NonPositiveEntry("need at least two spins");
	if (!(gamma > 0.0) || !std::isfinite(gamma))
		throw NonPositiveEntry("coupling strength must be positive and finite");
	long long dim = 1;
	for (int i = 0; i < sites; ++i) {
		dim *= 2;
		if (dim > kDimensionCap)
			throw DimensionCap("spin space dimension exceeds the cap " +
							   std::to_string(kDimensionCap));
	}
	const int d = static_cast<int>(dim);
	const Graph g = Graph::chain(sites);

	const ComplexMatrix sx = pauli_x(), sy = pauli_y(), sz = pauli_z();
	std::vector<ComplexMatrix> x(sites), y(sites), z(sites);
	for (int i = 0; i < sites; ++i) {
		x[i] = site_embed(sx, i, sites, 2);
		y[i] = site_embed(sy, i, sites, 2);
		z[i] = site_embed(sz, i, sites, 2);
	}

	ComplexMatrix h(d);
	for (int e = 0; e < g.edge_count(); ++e) {
		const Edge ed = g.edge(e);
		gemm_into(-0.5 * gamma, x[ed.u], x[ed.v], 1.0, h);
		gemm_into(-0.5 * gamma, y[ed.u], y[ed.v], 1.0, h);
		gemm_into(-0.5 * gamma, z[ed.u], z[ed.v], 1.0, h);
	}
	h.hermitize();

	QuantumModel m;
	m.kind = QuantumKind::spin;
	m.dim = d;
	m.graph = g;
	m.gamma = gamma;
	if (field) {
		m.hamiltonian = h;
		m.hamiltonian_t = [h, z, field, sites](double t) {
			ComplexMatrix ht = h;
			for (int n = 0; n < sites; ++n) {
				const double bn = field(t, n);
				if (bn != 0.0) add_scaled(ht, bn, z[n]);
			}
			return ht;
		};
	} else {
		m.hamiltonian = h;
	}

	const ComplexMatrix eye = ComplexMatrix::identity(d);
	for (int i = 0; i < sites; ++i) {
		ComplexMatrix obs = z[i];
		obs += eye;
		obs *= 0.5;
		m.site_observables.push_back(std::move(obs));
	}
	for (int e = 0; e < g.edge_count(); ++e) {
		const Edge ed = g.edge(e);
		// Flow from u toward v: (gamma/2) tr((sigma_v^y sigma_u^x - sigma_v^x sigma_u^y) rho).
		ComplexMatrix f(d);
		gemm_into(0.5 * gamma, y[ed.u], x[ed.v], 0.0, f);
		gemm_into(-0.5 * gamma, x[ed.u], y[ed.v], 1.0, f);
		m.edge_flow_ops.push_back(std::move(f));
	}

	validate_model(m);
	return m;
}

QuantumFlowSnapshot spin_flows(const QuantumModel& model, const ComplexMatrix& rho) {
	if (model.kind != QuantumKind::spin)
		throw InvariantViolation("spin_flows requires a spin chain model");
	if (rho.dim() != model.dim)
		throw DimensionMismatch("density matrix dimension does not match the model");
	QuantumFlowSnapshot s;
	s.measure = model.measure_of(rho);
	s.flow = FlowField::zero(model.graph);
	for (int e = 0; e < model.graph.edge_count(); ++e)
		s.flow.edge[static_cast<std::size_t>(e)] = real_tp(model.edge_flow_ops[e], rho);
	check_flow_consistency(model, s.flow, lindblad_rhs(model, rho), 1e-8);
	return s;
}

QuantumFlowSnapshot spin_flows(const QuantumModel& model, const DensityMatrix& rho) {
	return spin_flows(model, rho.matrix());
}

double spin_velocity_bound(const QuantumModel& model, const QuantumFlowSnapshot& snap) {
	return model.gamma * model.graph.max_degree() * snap.measure.total();
}

// ---------------------------------------------------------------------------
// Isolated dynamics through projectors
// ---------------------------------------------------------------------------

QuantumFlowSnapshot isolated_projective(const ComplexMatrix& hamiltonian,
										const ProjectiveFamily& family, const ComplexMatrix& rho) {
	const int d = hamiltonian.dim();
	const int n = static_cast<int>(family.projectors.size());
	if (n < 1) throw IncompleteProjectors("projector family is empty");
	if (family.graph.vertex_count() != n)
		throw DimensionMismatch("graph must have one vertex per projector");
	if (rho.dim() != d) throw DimensionMismatch("density matrix dimension mismatch");

	ComplexMatrix sum(d);
	for (const ComplexMatrix& p : family.projectors) {
		if (p.dim() != d) throw DimensionMismatch("projector dimension mismatch");
		if (!p.is_hermitian(1e-9)) throw IncompleteProjectors("projector is not Hermitian");
		ComplexMatrix idem = mat_mul(p, p);
		idem -= p;
		if (idem.max_abs() > 1e-9) throw IncompleteProjectors("projector is not idempotent");
		sum += p;
	}
	{
		ComplexMatrix defect = sum;
		defect -= ComplexMatrix::identity(d);
		if (defect.max_abs() > 1e-9)
			throw IncompleteProjectors("projector family does not resolve the identity");
	}

	std::vector<ComplexMatrix> pr(family.projectors.begin(), family.projectors.end());
	std::vector<ComplexMatrix> m(static_cast<std::size_t>(n));
	ComplexMatrix rho_tilde(d);
	std::vector<double> x(static_cast<std::size_t>(n));
	for (int k = 0; k < n; ++k) {
		m[static_cast<std::size_t>(k)] = mat_mul(pr[static_cast<std::size_t>(k)], rho);
		gemm_into(1.0, m[static_cast<std::size_t>(k)], pr[static_cast<std::size_t>(k)], 1.0,
				  rho_tilde);
		x[static_cast<std::size_t>(k)] = m[static_cast<std::size_t>(k)].trace().real();
	}
	std::vector<ComplexMatrix> b(static_cast<std::size_t>(n));
	for (int k = 0; k < n; ++k)
		b[static_cast<std::size_t>(k)] = mat_mul(hamiltonian, m[static_cast<std::size_t>(k)]);

	const auto pair_flow = [&](int to, int from) {
		// f_{to,from} = -i (tr(P_to H P_from rho) - tr(P_from H P_to rho)) = 2 Im tr(P_to H P_from rho)
		return 2.0 * trace_product(pr[static_cast<std::size_t>(to)],
								   b[static_cast<std::size_t>(from)])
						 .imag();
	};

	QuantumFlowSnapshot snap;
	snap.measure = clamped_measure(std::move(x));
	snap.flow = FlowField::zero(family.graph);
	for (int e = 0; e < family.graph.edge_count(); ++e) {
		const Edge ed = family.graph.edge(e);
		snap.flow.edge[static_cast<std::size_t>(e)] = pair_flow(ed.v, ed.u);
	}
	const double scale = std::max(1.0, hamiltonian.max_abs());
	for (int a = 0; a < n; ++a)
		for (int bb = a + 1; bb < n; ++bb) {
			if (family.graph.edge_index(a, bb) >= 0) continue;
			if (std::abs(pair_flow(bb, a)) > 1e-9 * scale)
				throw InvariantViolation("declared topology misses a flow-carrying pair");
		}

	const double shift = trace_product(hamiltonian, rho_tilde).real();
	ComplexMatrix gauged = hamiltonian;
	for (int i = 0; i < d; ++i) gauged(i, i) -= shift;
	snap.energy_fluctuation = energy_fluctuation(rho_tilde, gauged);

	double vel = 0.0;
	for (const double f : snap.flow.edge) vel += std::abs(f);
	const double cap = std::sqrt(static_cast<double>(family.graph.max_degree())) *
					   snap.energy_fluctuation;
	if (vel > cap + 1e-9 * std::max(1.0, cap))
		throw InvariantViolation("flow velocity exceeds the fluctuation bound");
	return snap;
}

QuantumFlowSnapshot isolated_projective(const ComplexMatrix& hamiltonian,
										const ProjectiveFamily& family, const DensityMatrix& rho) {
	return isolated_projective(hamiltonian, family, rho.matrix());
}

// ---------------------------------------------------------------------------
// Measurement-induced walk
// ---------------------------------------------------------------------------

WalkResult measured_walk_simulate(int sites, const std::vector<double>& couplings, double dt,
								  int segments, int x0_site, int steps_per_segment) {
	if (sites < 2) throw NonPositiveEntry("walk needs at least two sites");
	if (static_cast<int>(couplings.size()) != sites - 1)
		throw LengthMismatch("need one coupling per lattice bond");
	if (!(dt > 0.0) || !std::isfinite(dt))
		throw NonPositiveEntry("segment duration must be positive and finite");
	if (segments < 0) throw NonPositiveEntry("segment count must be nonnegative");
	if (steps_per_segment < 1) throw NonPositiveEntry("steps per segment must be positive");
	if (x0_site < 0 || x0_site >= sites) throw DimensionMismatch("initial site out of range");

	ComplexMatrix h(sites);
	for (int nidx = 0; nidx + 1 < sites; ++nidx) {
		h(nidx, nidx + 1) = couplings[static_cast<std::size_t>(nidx)];
		h(nidx + 1, nidx) = couplings[static_cast<std::size_t>(nidx)];
	}

	const Graph g = Graph::chain(sites);
	ProjectiveFamily fam{{}, g};
	QuantumModel model;
	model.kind = QuantumKind::generic;
	model.dim = sites;
	model.hamiltonian = h;
	model.graph = g;
	for (int nidx = 0; nidx < sites; ++nidx) {
		ComplexMatrix p(sites);
		p(nidx, nidx) = 1.0;
		fam.projectors.push_back(p);
		model.site_observables.push_back(std::move(p));
	}

	std::vector<cplx> psi(static_cast<std::size_t>(sites));
	psi[static_cast<std::size_t>(x0_site)] = 1.0;
	ComplexMatrix rho = DensityMatrix::pure(psi).matrix();

	FlowTrajectory traj{g, {}, {}, {}};
	std::vector<double> flucts;
	const auto record = [&](double t, const ComplexMatrix& r) {
		QuantumFlowSnapshot s = isolated_projective(h, fam, r);
		traj.times.push_back(t);
		traj.measures.push_back(std::move(s.measure));
		traj.flows.push_back(std::move(s.flow));
		flucts.push_back(std::sqrt(2.0) * s.energy_fluctuation);
	};

	record(0.0, rho);
	for (int seg = 0; seg < segments; ++seg) {
		const double t0 = seg * dt;
		const EvolutionReport rep = evolve_density(
			model, DensityMatrix(rho), dt, steps_per_segment,
			[&](int idx, double tl, const ComplexMatrix& r) {
				if (idx > 0) record(t0 + tl, r);
			});
		rho = rep.final_state.matrix();
		for (int i = 0; i < sites; ++i)
			for (int j = 0; j < sites; ++j)
				if (i != j) rho(i, j) = 0.0;
	}

	BoundReport report;
	double avg_fluct = 0.0;
	double fluct_bound = 0.0;
	if (segments > 0) {
		report = speed_limit_report(traj, Lambda::infinite());
		avg_fluct = time_average({traj.times.data(), traj.times.size()},
								 {flucts.data(), flucts.size()});
		if (report.distance > 0.0 && avg_fluct > 0.0)
			fluct_bound = report.distance / avg_fluct;
	} else {
		report.lambda = Lambda::infinite();
	}
	return WalkResult{std::move(traj), report, std::move(flucts), avg_fluct, fluct_bound};
}

// ---------------------------------------------------------------------------
// Markovian open system
// ---------------------------------------------------------------------------

OpenSystemModel open_system_model(const ComplexMatrix& hamiltonian,
								  std::vector<JumpOperator> jumps) {
	const int d = hamiltonian.dim();
	if (d < 2) throw DimensionMismatch("open system needs at least two levels");
	if (d > kDimensionCap)
		throw DimensionCap("dimension exceeds the cap " + std::to_string(kDimensionCap));

	EigResult eig = hermitian_eig(hamiltonian);
	double scale = 1.0;
	for (const double e : eig.values) scale = std::max(scale, std::abs(e));
	for (std::size_t k = 0; k + 1 < eig.values.size(); ++k)
		if (eig.values[k + 1] - eig.values[k] < 1e-9 * scale)
			throw DegenerateSpectrum("energy levels " + std::to_string(k) + " and " +
									 std::to_string(k + 1) + " are degenerate");

	const ComplexMatrix u = eig.vectors;
	const ComplexMatrix ud = u.adjoint();

	OpenSystemModel m;
	m.dim = d;
	m.eigen = std::move(eig);

	std::vector<Edge> edges;
	for (std::size_t k = 0; k < jumps.size(); ++k) {
		const JumpOperator& j = jumps[k];
		if (j.op.dim() != d) throw DimensionMismatch("jump operator dimension mismatch");
		if (j.pair < 0)
			throw UnpairedJump("open-system jumps must declare their reverse partner");
		ComplexMatrix lt = mat_mul(ud, mat_mul(j.op, u));
		const double lmax = lt.max_abs();
		if (!(lmax > 0.0)) throw UnpairedJump("jump operator vanishes");
		int from = -1, to = -1, count = 0;
		std::vector<double> r(static_cast<std::size_t>(d) * d, 0.0);
		for (int a = 0; a < d; ++a)
			for (int b = 0; b < d; ++b) {
				const double mag = std::abs(lt(a, b));
				if (mag > 1e-9 * lmax) {
					++count;
					to = a;
					from = b;
					r[static_cast<std::size_t>(a) * d + b] = mag * mag;
				}
			}
		if (count != 1)
			throw UnpairedJump(
				"jump operator is not energy-resolved (it must drive exactly one transition)");
		m.rates.push_back(std::move(r));
		m.transitions.emplace_back(to, from);
		if (to != from) {
			const int lo = std::min(to, from), hi = std::max(to, from);
			if (std::find_if(edges.begin(), edges.end(), [&](const Edge& e) {
					return e.u == lo && e.v == hi;
				}) == edges.end())
				edges.push_back(Edge{lo, hi});
		}
	}
	std::sort(edges.begin(), edges.end(),
			  [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });

	m.base.kind = QuantumKind::generic;
	m.base.dim = d;
	m.base.hamiltonian = hamiltonian;
	m.base.jumps = std::move(jumps);
	m.base.graph = Graph(d, edges, /*allow_disconnected=*/true);
	for (int nidx = 0; nidx < d; ++nidx) {
		ComplexMatrix p(d);
		for (int i = 0; i < d; ++i)
			for (int j = 0; j < d; ++j) p(i, j) = u(i, nidx) * std::conj(u(j, nidx));
		m.base.site_observables.push_back(std::move(p));
	}
	validate_model(m.base);
	return m;
}

QuantumFlowSnapshot open_system_flows(const OpenSystemModel& model, const ComplexMatrix& v,
									  const ComplexMatrix& rho) {
	const int d = model.dim;
	if (v.dim() != d || rho.dim() != d)
		throw DimensionMismatch("drive/state dimension does not match the model");

	const ComplexMatrix& u = model.eigen.vectors;
	const ComplexMatrix ud = u.adjoint();
	const ComplexMatrix rt = mat_mul(ud, mat_mul(rho, u));
	const ComplexMatrix vt = mat_mul(ud, mat_mul(v, u));

	std::vector<double> x(static_cast<std::size_t>(d));
	for (int nidx = 0; nidx < d; ++nidx) x[static_cast<std::size_t>(nidx)] = rt(nidx, nidx).real();

	// Coherent (external) flows f_n = -i <e_n|[V, rho]|e_n>.
	std::vector<double> fn(static_cast<std::size_t>(d), 0.0);
	for (int nidx = 0; nidx < d; ++nidx) {
		cplx acc = 0.0;
		for (int mm = 0; mm < d; ++mm) acc += vt(nidx, mm) * rt(mm, nidx) - rt(nidx, mm) * vt(mm, nidx);
		fn[static_cast<std::size_t>(nidx)] = (-kI * acc).real();
	}

	QuantumFlowSnapshot s;
	s.measure = clamped_measure(x);
	s.flow = FlowField::zero(model.base.graph);
	s.flow.external = fn;

	const int jump_count = static_cast<int>(model.base.jumps.size());
	for (int e = 0; e < model.base.graph.edge_count(); ++e) {
		const Edge ed = model.base.graph.edge(e);
		double f = 0.0;  // flow from ed.u toward ed.v
		for (int k = 0; k < jump_count; ++k) {
			const int kp = model.base.jumps[static_cast<std::size_t>(k)].pair;
			f += model.rates[static_cast<std::size_t>(k)][static_cast<std::size_t>(ed.v) * d + ed.u] *
					 x[static_cast<std::size_t>(ed.u)] -
				 model.rates[static_cast<std::size_t>(kp)][static_cast<std::size_t>(ed.u) * d + ed.v] *
					 x[static_cast<std::size_t>(ed.v)];
		}
		s.flow.edge[static_cast<std::size_t>(e)] = f;
	}

	// Activity and environment entropy flow from the per-jump rates.
	for (int k = 0; k < jump_count; ++k) {
		const auto [to, from] = model.transitions[static_cast<std::size_t>(k)];
		const double ak = model.rates[static_cast<std::size_t>(k)][static_cast<std::size_t>(to) * d + from] *
						  x[static_cast<std::size_t>(from)];
		s.a_t += ak;
		s.sigma_env += ak * model.base.jumps[static_cast<std::size_t>(k)].entropy;
	}

	// Population entropy rate, verbatim: -sum dx_n ln x_n + sum f_n ln x_n.
	ComplexMatrix rhod = lindblad_rhs(model.base, rho);
	gemm_into(-kI, v, rho, 1.0, rhod);
	gemm_into(kI, rho, v, 1.0, rhod);
	const ComplexMatrix rtd = mat_mul(ud, mat_mul(rhod, u));
	for (int nidx = 0; nidx < d; ++nidx) {
		const double lx = std::log(std::max(x[static_cast<std::size_t>(nidx)], 1e-300));
		s.sigma_pop += (fn[static_cast<std::size_t>(nidx)] - rtd(nidx, nidx).real()) * lx;
	}
	s.sigma_t = s.sigma_pop + s.sigma_env;

	s.energy_fluctuation = energy_fluctuation(rho, v);
	double sum_ext = 0.0;
	for (const double f : fn) sum_ext += std::abs(f);
	if (sum_ext > 2.0 * s.energy_fluctuation + 1e-9 * std::max(1.0, s.energy_fluctuation))
		throw InvariantViolation("coherent flows exceed the drive-fluctuation bound");
	double sum_edge = 0.0;
	for (const double f : s.flow.edge) sum_edge += std::abs(f);
	const double cap = std::sqrt(std::max(0.0, s.sigma_t * s.a_t) / 2.0);
	if (sum_edge > cap + 1e-9 * std::max(1.0, s.a_t))
		throw InvariantViolation("jump flows exceed the entropic bound");
	return s;
}

QuantumFlowSnapshot open_system_flows(const OpenSystemModel& model, const ComplexMatrix& v,
									  const DensityMatrix& rho) {
	return open_system_flows(model, v, rho.matrix());
}

// ---------------------------------------------------------------------------
// Trajectory drivers
// ---------------------------------------------------------------------------

namespace {

QuantumTrajectory run_trajectory(const QuantumModel& evolved, const Graph& graph,
								 const DensityMatrix& rho0, double tau, int steps,
								 const EvolutionOptions& opts,
								 const std::function<QuantumFlowSnapshot(double, const ComplexMatrix&)>& snap) {
	FlowTrajectory traj{graph, {}, {}, {}};
	std::vector<QuantumFlowSnapshot> snaps;
	traj.times.reserve(static_cast<std::size_t>(steps) + 1);
	snaps.reserve(static_cast<std::size_t>(steps) + 1);
	EvolutionReport rep = evolve_density(
		evolved, rho0, tau, steps,
		[&](int, double t, const ComplexMatrix& r) {
			QuantumFlowSnapshot s = snap(t, r);
			traj.times.push_back(t);
			traj.measures.push_back(s.measure);
			traj.flows.push_back(s.flow);
			snaps.push_back(std::move(s));
		},
		opts);
	return QuantumTrajectory{std::move(traj), std::move(snaps), std::move(rep)};
}

}  // namespace

QuantumTrajectory boson_trajectory(const QuantumModel& model, const DensityMatrix& rho0,
								   double tau, int steps, const EvolutionOptions& opts) {
	return run_trajectory(model, model.graph, rho0, tau, steps, opts,
						  [&](double, const ComplexMatrix& r) { return boson_flows(model, r); });
}

QuantumTrajectory spin_trajectory(const QuantumModel& model, const DensityMatrix& rho0,
								  double tau, int steps, const EvolutionOptions& opts) {
	return run_trajectory(model, model.graph, rho0, tau, steps, opts,
						  [&](double, const ComplexMatrix& r) { return spin_flows(model, r); });
}

QuantumTrajectory open_trajectory(const OpenSystemModel& model, const HamiltonianFn& drive,
								  const DensityMatrix& rho0, double tau, int steps,
								  const EvolutionOptions& opts) {
	QuantumModel evolved = model.base;
	if (drive) {
		const ComplexMatrix h0 = model.base.hamiltonian;
		evolved.hamiltonian_t = [h0, drive](double t) {
			ComplexMatrix ht = h0;
			ht += drive(t);
			return ht;
		};
	}
	const ComplexMatrix zero(model.dim);
	return run_trajectory(evolved, model.base.graph, rho0, tau, steps, opts,
						  [&model, drive, zero](double t, const ComplexMatrix& r) {
							  return open_system_flows(model, drive ? drive(t) : zero, r);
						  });
}

}  // namespace tsl
