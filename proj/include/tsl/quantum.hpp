#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "tsl/flow.hpp"
#include "tsl/graph.hpp"
#include "tsl/linalg.hpp"
#include "tsl/measure.hpp"

namespace tsl {

/** Hard cap on dense Hilbert-space dimension. */
inline constexpr int kDimensionCap = 4096;

/**
 * Dense density matrix.  Construction validates hermiticity and unit trace;
 * positivity is more expensive (a full eigendecomposition) and is therefore
 * probed explicitly via check_positive / min_eigenvalue at checkpoints rather
 * than on every construction.
 */
class DensityMatrix {
public:
	explicit DensityMatrix(ComplexMatrix rho, double herm_tol = 1e-9, double trace_tol = 1e-8);

	/** Projector onto a (normalized copy of a) state vector. */
	static DensityMatrix pure(const std::vector<cplx>& psi);
	static DensityMatrix maximally_mixed(int dim);

	int dim() const { return rho_.dim(); }
	const ComplexMatrix& matrix() const { return rho_; }

	/** Smallest eigenvalue (exact, via dense eigensolver). */
	double min_eigenvalue() const;
	/** Throws InvariantViolation when min eigenvalue < -tol. */
	void check_positive(double tol = 1e-8) const;

private:
	ComplexMatrix rho_;
};

/**
 * One jump operator plus its bookkeeping: the lattice site it acts on (-1
 * when not site-local), the transport direction (+1 gain, -1 loss, 0 n/a),
 * the environment entropy change s_k per jump, and the index of the declared
 * reverse partner (-1 when undeclared).  When a pair is declared the model
 * validator enforces L_k = e^{s_k/2} L_{k'}^dagger.
 */
struct JumpOperator {
	ComplexMatrix op;
	int site = -1;
	int direction = 0;
	double entropy = 0.0;
	int pair = -1;
};

using HamiltonianFn = std::function<ComplexMatrix(double t)>;
using MeasurementMap = std::function<Measure(const ComplexMatrix& rho)>;

enum class QuantumKind { generic, boson, spin };

/**
 * A dense quantum model mapped onto a vertex measure: Hamiltonian (static or
 * time-dependent via callback), jump operators, the measurement map that
 * turns a density matrix into the vertex measure, and the graph the measure
 * lives on.  site_observables/edge_flow_ops are the cached operators behind
 * the measurement map and the edge flows: the signed flow along edge
 * e = (u,v) from u toward v is Re tr(edge_flow_ops[e] * rho).
 */
struct QuantumModel {
	QuantumKind kind = QuantumKind::generic;
	int dim = 0;
	ComplexMatrix hamiltonian;
	HamiltonianFn hamiltonian_t;  // when set, overrides `hamiltonian`
	std::vector<JumpOperator> jumps;
	MeasurementMap measurement;
	Graph graph{1, {}};
	double gamma = 0.0;
	std::vector<ComplexMatrix> site_observables;
	std::vector<ComplexMatrix> edge_flow_ops;
	/** Projector whose population flags basis truncation; dim 0 when unused. */
	ComplexMatrix truncation_monitor;

	/** H(t): the callback when present, otherwise the static matrix. */
	ComplexMatrix hamiltonian_at(double t) const;
	Measure measure_of(const ComplexMatrix& rho) const;
};

/**
 * Structural validation: dimensions, cap, Hermitian static Hamiltonian, and
 * the declared jump pairings (reciprocal indices, opposite entropies, and
 * L_k = e^{s_k/2} L_{k'}^dagger within 1e-9).  Throws DimensionCap,
 * DimensionMismatch, NotHermitian, or UnpairedJump.
 */
void validate_model(const QuantumModel& model);

/**
 * Right-hand side of the master equation at time t:
 *   drho/dt = -i[H(t), rho] + sum_k (L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho}).
 * The result is traceless to rounding for any input.
 */
ComplexMatrix lindblad_rhs(const QuantumModel& model, const ComplexMatrix& rho, double t = 0.0);

struct EvolutionOptions {
	int positivity_checks = 8;      // eigen-probes spread across the run (plus final)
	double trace_tol = 1e-7;        // max tolerated |tr rho - 1|
	double positivity_tol = 1e-7;   // min eigenvalue must stay >= -tol at probes
	double truncation_tol = 1e-6;   // monitored top-level population flag threshold
};

struct EvolutionReport {
	DensityMatrix final_state;
	double max_trace_drift = 0.0;
	double min_eigenvalue = 0.0;  // smallest probed eigenvalue
	double max_truncation = 0.0;  // largest monitored truncation population
	bool truncation_flag = false;
};

/** Called at every grid point with the current state (hermitized). */
using StepCallback = std::function<void(int index, double t, const ComplexMatrix& rho)>;

/**
 * Classic RK4 on the master equation over a uniform grid of `steps` steps;
 * time-dependent Hamiltonians are evaluated at the standard stage times.
 * The state is re-hermitized after every step; the trace is monitored every
 * step and positivity is probed at spread-out checkpoints plus the final
 * state.  Throws InvariantViolation on drift/positivity failure and
 * NonFiniteState on overflow.
 */
EvolutionReport evolve_density(const QuantumModel& model, const DensityMatrix& rho0, double tau,
							   int steps, const StepCallback& on_step = {},
							   const EvolutionOptions& opts = {});

/**
 * Flow-level picture of one instant: the vertex measure, the flow field of
 * Eq-(1) form, and the thermodynamic quantities of the originating model
 * (fields not applicable to a model type stay 0).
 */
struct QuantumFlowSnapshot {
	Measure measure;
	FlowField flow;
	double sigma_t = 0.0;    // total entropy production rate
	double a_t = 0.0;        // dynamical activity (total jump rate)
	double sigma_env = 0.0;  // environment part
	double sigma_sys = 0.0;  // system part -tr(drho ln rho)
	double sigma_pop = 0.0;  // population part (open systems)
	double energy_fluctuation = 0.0;
};

/** sqrt(tr(A^2 rho) - tr(A rho)^2) for Hermitian A; throws NotHermitian. */
double energy_fluctuation(const DensityMatrix& rho, const ComplexMatrix& a);
double energy_fluctuation(const ComplexMatrix& rho, const ComplexMatrix& a);

// ---------------------------------------------------------------------------
// Interacting boson lattice
// ---------------------------------------------------------------------------

/**
 * Bose-Hubbard style lattice on graph g with per-site Fock truncation n_max:
 * hopping -gamma sum_E (b_i^dagger b_j + h.c.), on-site interaction
 * (u/2) sum n(n-1) - mu sum n, and per-site absorption/emission jumps
 * sqrt(absorb[i]) b_i^dagger / sqrt(emit[i]) b_i.  A site may have both rates
 * positive (paired, local detailed balance) or both zero (isolated site);
 * one-sided rates throw UnpairedJump.  Measurement x_i = tr(n_i rho).
 * Throws DimensionCap when (n_max+1)^|V| exceeds the cap.
 */
QuantumModel boson_lattice_model(const Graph& g, double gamma, double u, double mu,
								 const std::vector<double>& absorb,
								 const std::vector<double>& emit, int n_max);

/**
 * Boson snapshot: external flows f_i = tr(L_{i,+} rho L_{i,+}^dagger) -
 * tr(L_{i,-} rho L_{i,-}^dagger), edge flows 2 gamma Im tr(b_j^dagger b_i rho),
 * sigma_env with ln(absorb/emit) weights, sigma_sys = -tr(drho ln rho), and
 * activity a_t = sum_k tr(L_k rho L_k^dagger).  Internally asserts that the
 * flow field reproduces d/dt tr(n_i rho) within 1e-8.
 */
QuantumFlowSnapshot boson_flows(const QuantumModel& model, const ComplexMatrix& rho);
QuantumFlowSnapshot boson_flows(const QuantumModel& model, const DensityMatrix& rho);

/**
 * Velocity bound gamma * d_g * N_t + lambda * sqrt(sigma_t a_t / 2); the
 * infinite mode returns the bare topology term when sigma_t a_t vanishes and
 * +infinity otherwise.  Asserts velocity(flow, lambda) <= bound + 1e-9.
 */
double boson_velocity_bound(const QuantumFlowSnapshot& snap, double gamma, int d_g,
							const Lambda& lambda);

// ---------------------------------------------------------------------------
// Spin network (Heisenberg couplings, optional z-field control)
// ---------------------------------------------------------------------------

/**
 * Ferromagnetic Heisenberg chain of `sites` spins with coupling gamma and an
 * optional control field B_n(t) sigma_n^z (pass a null function for zero
 * field).  Measurement x_n = (tr(sigma_n^z rho) + 1)/2.
 */
QuantumModel spin_chain_model(int sites, double gamma,
							  const std::function<double(double t, int site)>& field = {});

/** Measure + exchange flows (gamma/2) tr((sigma_n^y sigma_m^x - sigma_n^x sigma_m^y) rho). */
QuantumFlowSnapshot spin_flows(const QuantumModel& model, const ComplexMatrix& rho);
QuantumFlowSnapshot spin_flows(const QuantumModel& model, const DensityMatrix& rho);

/** Velocity bound gamma * d_g * |x|_1 (the total spin is conserved). */
double spin_velocity_bound(const QuantumModel& model, const QuantumFlowSnapshot& snap);

// ---------------------------------------------------------------------------
// Isolated dynamics with projective populations
// ---------------------------------------------------------------------------

/** A complete orthogonal projector family plus the topology of allowed exchanges. */
struct ProjectiveFamily {
	std::vector<ComplexMatrix> projectors;
	Graph graph;
};

/**
 * Snapshot of isolated (unitary) dynamics measured through projectors:
 * x_n = tr(P_n rho), flows f_nm = -i (tr(P_n H P_m rho) - tr(P_m H P_n rho)),
 * and the energy fluctuation of the dephased state rho~ = sum P_n rho P_n
 * under the traceless gauge tr(H rho~) = 0 (applied internally; the
 * fluctuation itself is shift-invariant).  Asserts the velocity bound
 * velocity <= sqrt(d_g) * fluctuation + 1e-9 and that pairs outside the
 * declared graph carry no flow.  Throws IncompleteProjectors when the family
 * is not complete/orthogonal within 1e-9.
 */
QuantumFlowSnapshot isolated_projective(const ComplexMatrix& hamiltonian,
										const ProjectiveFamily& family, const ComplexMatrix& rho);
QuantumFlowSnapshot isolated_projective(const ComplexMatrix& hamiltonian,
										const ProjectiveFamily& family, const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Measurement-induced walk on a line lattice
// ---------------------------------------------------------------------------

struct WalkResult {
	FlowTrajectory trajectory;
	BoundReport report;                // master bound at lambda = infinity
	std::vector<double> fluctuations;  // sqrt(2) * fluctuation at each grid point
	double avg_fluctuation = 0.0;      // its time average
	double fluctuation_bound = 0.0;    // distance / avg_fluctuation
};

/**
 * Single excitation hopping on a line of `sites` vertices with couplings
 * gamma_n on the bonds (size sites-1), alternating unitary evolution over dt
 * with exact projective dephasing in the site basis after each of `segments`
 * windows.  x0_site selects the initial basis state.  The trajectory records
 * site populations and exchange flows on the shared grid; the report carries
 * both the transport bound and the weaker fluctuation-based bound.
 */
WalkResult measured_walk_simulate(int sites, const std::vector<double>& couplings, double dt,
								  int segments, int x0_site, int steps_per_segment = 32);

// ---------------------------------------------------------------------------
// Markovian open system in its energy eigenbasis
// ---------------------------------------------------------------------------

/**
 * An open system prepared for population-basis analysis: the Hamiltonian's
 * eigendecomposition (nondegenerate), jumps rewritten into the eigenbasis
 * (each must be energy-resolved: exactly one eigenbasis transition, with a
 * declared reverse partner), the per-jump rate tables r^k_{mn}, and the
 * transition graph over energy levels.
 */
struct OpenSystemModel {
	QuantumModel base;
	EigResult eigen;
	std::vector<std::vector<double>> rates;        // rates[k][m*dim+n] = |<e_m|L_k|e_n>|^2
	std::vector<std::pair<int, int>> transitions;  // jump k drives level .second -> .first
	int dim = 0;
};

OpenSystemModel open_system_model(const ComplexMatrix& hamiltonian,
								  std::vector<JumpOperator> jumps);

/**
 * Snapshot under external drive v (Hermitian, eigenbasis coordinates of the
 * original space): populations x_n = <e_n|rho|e_n>, coherent external flows
 * f_n = -i<e_n|[V,rho]|e_n>, jump flows f_nm = sum_k (r^k_nm x_m -
 * r^{k'}_mn x_n), entropy rates sigma_env = sum_k tr(L_k rho L_k^dagger) s_k
 * and sigma_pop = -sum_n dx_n ln x_n + sum_n f_n ln x_n, activity a_t, and
 * energy_fluctuation = fluctuation of v.  Asserts sum_n |f_n| <= 2 fluct(v)
 * and sum_E |f_nm| <= sqrt((sigma_pop+sigma_env) a_t / 2).
 */
QuantumFlowSnapshot open_system_flows(const OpenSystemModel& model, const ComplexMatrix& v,
									  const ComplexMatrix& rho);
QuantumFlowSnapshot open_system_flows(const OpenSystemModel& model, const ComplexMatrix& v,
									  const DensityMatrix& rho);

// ---------------------------------------------------------------------------
// Trajectory drivers (evolution + per-grid-point snapshots)
// ---------------------------------------------------------------------------

struct QuantumTrajectory {
	FlowTrajectory trajectory;
	std::vector<QuantumFlowSnapshot> snapshots;
	EvolutionReport report;
};

QuantumTrajectory boson_trajectory(const QuantumModel& model, const DensityMatrix& rho0,
								   double tau, int steps, const EvolutionOptions& opts = {});
QuantumTrajectory spin_trajectory(const QuantumModel& model, const DensityMatrix& rho0,
								  double tau, int steps, const EvolutionOptions& opts = {});
/** Evolves with H + V(t) and snapshots against the drive at each grid point. */
QuantumTrajectory open_trajectory(const OpenSystemModel& model, const HamiltonianFn& drive,
								  const DensityMatrix& rho0, double tau, int steps,
								  const EvolutionOptions& opts = {});

// ---------------------------------------------------------------------------
// Small operator helpers (building blocks for models and tests)
// ---------------------------------------------------------------------------

ComplexMatrix pauli_x();
ComplexMatrix pauli_y();
ComplexMatrix pauli_z();

/** Truncated annihilation operator, dimension n_max+1. */
ComplexMatrix boson_ladder(int n_max);

/** Embeds a local operator at `site` in a chain of `sites` factors of dimension local_dim. */
ComplexMatrix site_embed(const ComplexMatrix& local, int site, int sites, int local_dim);

}  // namespace tsl
