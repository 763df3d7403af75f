#pragma once

#include <span>
#include <string>
#include <vector>

#include "tsl/flow.hpp"
#include "tsl/graph.hpp"
#include "tsl/measure.hpp"

namespace tsl {

/** One reversible elementary channel with mass-action rate constants. */
struct ReactionChannel {
	std::vector<int> nu_plus;   // reactant stoichiometry per species
	std::vector<int> nu_minus;  // product stoichiometry per species
	double kappa_plus = 1.0;
	double kappa_minus = 1.0;
};

/**
 * Deterministic reaction network: species, reversible channels, mass-action
 * kinetics.  Channels must change at least one species count and carry
 * strictly positive rate constants in both directions.
 */
class ReactionNetwork {
public:
	ReactionNetwork(int species_count, std::vector<ReactionChannel> channels,
					std::vector<std::string> species_names = {});

	/** Linear chain X_1 <-> X_2 <-> ... <-> X_n with shared rate constants. */
	static ReactionNetwork cascade(int n, double kf, double kb);

	/**
	 * One reaction per line:  `2 X1 + X2 <-> X3 , kf=1.0 , kb=0.5`.
	 * Species are numbered in order of first appearance; '#' lines are
	 * comments.  Stoichiometric coefficients must be nonnegative integers.
	 */
	static ReactionNetwork from_text(const std::string& text);
	static ReactionNetwork from_file(const std::string& path);

	int species_count() const { return species_; }
	int channel_count() const { return static_cast<int>(channels_.size()); }
	const ReactionChannel& channel(int r) const { return channels_[r]; }
	const std::vector<ReactionChannel>& channels() const { return channels_; }
	const std::vector<std::string>& species_names() const { return names_; }

	/** True when every channel preserves the total species count. */
	bool conservative() const;

private:
	int species_ = 0;
	std::vector<ReactionChannel> channels_;
	std::vector<std::string> names_;
};

/** Mass-action fluxes of one channel; `net` is backward minus forward. */
struct ChannelFlux {
	double forward = 0.0;   // kappa_plus  * prod_i x_i^{nu_plus_i}
	double backward = 0.0;  // kappa_minus * prod_i x_i^{nu_minus_i}
	double net = 0.0;       // backward - forward
};

std::vector<ChannelFlux> fluxes(const ReactionNetwork& net, const Measure& x);
std::vector<ChannelFlux> fluxes(const ReactionNetwork& net, std::span<const double> x);

/** Rate equation dx_i/dt = sum_rho (nu_minus - nu_plus)_i (forward - backward). */
std::vector<double> rate_derivative(const ReactionNetwork& net, const Measure& x);
void rate_derivative_into(const ReactionNetwork& net, std::span<const double> x,
						  std::span<double> dx);

/**
 * Canonical nonnegative coupling between two positive vectors: Z has row sums
 * a_tilde <= a, column sums b_tilde <= b, total min(sum a, sum b), and at most
 * n + m - 1 nonzero entries.  Deterministic: indices are processed in
 * ascending order of value (stable on ties) and the smaller current head is
 * consumed first.
 */
struct GreedySplit {
	std::vector<std::vector<double>> z;  // rows follow a, columns follow b
	std::vector<double> a_tilde, b_tilde;
};

GreedySplit greedy_split(std::span<const double> a, std::span<const double> b);

/** Per-channel geometry extracted from the stoichiometric imbalance. */
struct ChannelGeometry {
	std::vector<int> s_plus;   // species produced by the forward direction
	std::vector<int> s_minus;  // species consumed by the forward direction
	std::vector<std::vector<double>> z;  // |s_plus| x |s_minus| coupling
	std::vector<double> mu;    // transported part of the imbalance, per species
	double eta = 0.0;          // untransportable imbalance total
	double chi = 0.0;          // transported imbalance total
	bool conservative = false;
};

/** Species graph plus per-channel transport decomposition data. */
struct TransportGraphData {
	Graph graph;
	std::vector<ChannelGeometry> channels;
};

TransportGraphData build_transport_graph(const ReactionNetwork& net);

/**
 * Express the instantaneous rate equation as a flow field on the transport
 * graph.  The induced state derivative reproduces rate_derivative exactly;
 * conservative channels contribute no external flow.
 */
FlowField decompose_flows(const ReactionNetwork& net, const TransportGraphData& tgd,
						  std::span<const double> x);
FlowField decompose_flows(const ReactionNetwork& net, const TransportGraphData& tgd,
						  const Measure& x);

/** Entropy production rate; infinite (with finite=false) when a flux is zero. */
struct EntropyRate {
	double value = 0.0;
	bool finite = true;
};

EntropyRate entropy_production_rate(const ReactionNetwork& net, const Measure& x);
EntropyRate entropy_production_rate(const ReactionNetwork& net, std::span<const double> x);

/**
 * Kinetic (Onsager) term: per channel, squared cost coefficient times the
 * logarithmic mean of the two fluxes.  The coefficient is lambda*eta + chi
 * for finite lambda; the infinite mode requires a conservative network and
 * uses chi alone.  Throws ZeroFlux when a flux vanishes.
 */
double kinetic_term(const ReactionNetwork& net, std::span<const double> x, const Lambda& lambda);

/** Channel-cost rate sum_rho (lambda*eta + chi) |J_rho|; bounds the flow velocity. */
double flow_cost_rate(const ReactionNetwork& net, std::span<const double> x, const Lambda& lambda);

/** Diffusion-style cost (|S|/8) sum_{rho,i} (nu_minus - nu_plus)_i^2 (J+ + J-). */
double diffusion_coefficient(const ReactionNetwork& net, std::span<const double> x);

/** Speed-limit hierarchy report for one simulated window. */
struct CrnBounds {
	double tau = 0.0;
	Lambda lambda = Lambda::finite(0.5);
	double tau1 = 0.0;  // distance / <cost rate>
	double tau2 = 0.0;  // distance / sqrt(<sigma><kinetic>)
	double tau3 = 0.0;  // total variation / sqrt(<sigma><diffusion>)
	double tau2_half = 0.0;  // tau2 evaluated with lambda = 1/2 (comparison point for tau3)
	double distance = 0.0;   // endpoint transport distance at `lambda`
	double tv = 0.0;         // endpoint total variation
	double avg_cost = 0.0;
	double avg_sigma = 0.0;
	double avg_kinetic = 0.0;
	double avg_kinetic_half = 0.0;
	double avg_diffusion = 0.0;
	bool sigma_finite = true;     // false => tau2/tau3/tau2_half degrade to 0
	bool perturbed_zeros = false; // zero initial concentrations nudged to 1e-12
};

/**
 * Integrate the rate equation over [0, tau] and evaluate the bound hierarchy
 * tau >= tau1 >= tau2 (>= tau3 at the half-weight comparison point).  The
 * infinite mode requires a conservative network.
 */
CrnBounds crn_bounds(const ReactionNetwork& net, const Measure& x0, double tau,
					 const Lambda& lambda, int steps = 10000);

/**
 * Rate-equation trajectory in flow form on the transport graph (states plus
 * decomposed flows at every grid point).
 */
FlowTrajectory simulate(const ReactionNetwork& net, const TransportGraphData& tgd,
						const Measure& x0, double tau, int steps);

}  // namespace tsl
