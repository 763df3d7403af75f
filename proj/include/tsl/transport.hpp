#pragma once

#include <span>
#include <vector>

#include "tsl/graph.hpp"
#include "tsl/measure.hpp"

namespace tsl {

/** One plan entry: `mass` units moved from vertex `source` to vertex `target`. */
struct TransportTriplet {
	int source = 0;
	int target = 0;
	double mass = 0.0;
};

/**
 * Sparse transport plan between two equally sized measures.  Diagonal entries
 * carry the mass that stays in place, so the marginals match exactly:
 * summing over targets recovers the source measure and vice versa.
 */
struct TransportPlan {
	int n = 0;
	std::vector<TransportTriplet> entries;

	std::vector<double> source_marginal() const;
	std::vector<double> target_marginal() const;
	/** sum of mass * hop distance, evaluated against the given metric. */
	double cost(const DistanceMatrix& d) const;
};

/** How to treat graphs with more than one connected component. */
enum class ComponentPolicy {
	require_connected,  // default: throw DisconnectedGraph up front
	per_component,      // opt-in: solve across components where well-defined
};

struct Wasserstein1Result {
	double value = 0.0;
	TransportPlan plan;
	/** Optimal Kantorovich potential (1-Lipschitz on edges, defined up to a constant). */
	std::vector<double> potential;
};

/**
 * Discrete L1 Wasserstein distance between balanced measures with the
 * hop-count metric, computed in Beckmann form: a real-valued min-cost flow on
 * the graph edges (unit cost per edge, divergence a - b) solved by successive
 * shortest paths with vertex potentials.  Inputs must balance to within
 * absolute tolerance 1e-9 (UnbalancedInput otherwise).
 */
Wasserstein1Result wasserstein1(const Graph& g, const Measure& a, const Measure& b,
								ComponentPolicy policy = ComponentPolicy::require_connected);

struct DualResult {
	double value = 0.0;
	std::vector<double> potential;
};

/**
 * Kantorovich-Rubinstein dual: max phi^T (a - b) over potentials with
 * |phi_i - phi_j| <= 1 on every edge.  The returned value is computed from
 * the returned feasible potential, so it certifies the primal from below.
 */
DualResult kantorovich_dual(const Graph& g, const Measure& a, const Measure& b,
							ComponentPolicy policy = ComponentPolicy::require_connected);

struct UnbalancedSolution {
	double value = 0.0;
	TransportPlan plan;        // between trimmed_a and trimmed_b
	Measure trimmed_a, trimmed_b;
	Measure removed_a, removed_b;  // a = trimmed_a + removed_a etc.
};

/**
 * Generalized (unbalanced) Wasserstein distance W_{1,lambda}: mass may be
 * created or destroyed at cost lambda per unit instead of being transported.
 * Implemented as the same Beckmann flow problem extended by one virtual
 * reservoir vertex connected to every real vertex by cost-lambda arcs.
 * With balanced inputs and lambda >= diameter the value equals wasserstein1;
 * at lambda = 1/2 it equals the total variation distance.
 */
UnbalancedSolution generalized_wasserstein(const Graph& g, const Measure& a, const Measure& b,
										   double lambda,
										   ComponentPolicy policy = ComponentPolicy::require_connected);

/** Total variation distance ||a - b||_1 / 2. */
double total_variation(const Measure& a, const Measure& b);

struct ObservableNorms {
	double sup = 0.0;  // max_i |o_i|
	double lip = 0.0;  // max over edges |o_u - o_v|
};

/** Sup and graph-Lipschitz norms of a vertex observable. */
ObservableNorms observable_norms(const Graph& g, std::span<const double> o);

}  // namespace tsl
