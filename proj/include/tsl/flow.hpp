#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tsl/graph.hpp"
#include "tsl/measure.hpp"
#include "tsl/transport.hpp"

namespace tsl {

/**
 * Weight of external (created/destroyed) mass relative to transported mass.
 * Either a positive finite number or the distinguished infinite mode, which
 * switches distances to the balanced Wasserstein metric and is only valid
 * when external flows vanish.  Represented as a mode flag rather than a huge
 * float so no overflow can sneak into the arithmetic.
 */
class Lambda {
public:
	static Lambda finite(double v);
	static Lambda infinite();

	bool is_infinite() const { return infinite_; }
	/** Finite value; throws NonPositiveLambda when called in infinite mode. */
	double value() const;
	std::string str() const;

private:
	Lambda(double v, bool inf) : value_(v), infinite_(inf) {}
	double value_ = 1.0;
	bool infinite_ = false;
};

/**
 * Instantaneous flow configuration on a graph: one external flow per vertex
 * and one exchange flow per edge.  Edge flow is signed: positive values move
 * mass from the edge's lower endpoint u toward the higher endpoint v.
 */
struct FlowField {
	std::vector<double> external;  // per vertex
	std::vector<double> edge;      // per edge index

	static FlowField zero(const Graph& g);
};

/**
 * Total speed lambda * sum_i |f_i| + sum_E |f_ij|.  lambda = 0 weighs the
 * exchange flows only; the infinite mode also counts exchange flows only
 * (callers must separately ensure external flows vanish in that mode).
 */
double velocity(const FlowField& f, double lambda);
double velocity(const FlowField& f, const Lambda& lambda);

/** Produces the flow configuration for a given time and state. */
using FlowGenerator = std::function<FlowField(double t, std::span<const double> x)>;

/** Time-resolved simulation output: states and flows on a shared grid. */
struct FlowTrajectory {
	Graph graph;
	std::vector<double> times;
	std::vector<Measure> measures;
	std::vector<FlowField> flows;

	int sample_count() const { return static_cast<int>(times.size()); }
	double duration() const { return times.empty() ? 0.0 : times.back() - times.front(); }
	const Measure& initial() const { return measures.front(); }
	const Measure& final_state() const { return measures.back(); }
};

/**
 * Integrate dx_i/dt = f_i + sum_j f_ij with classic RK4 on a uniform grid
 * and record the state and flow at every grid point.  Throws
 * NegativeMassBlowup when any recorded state dips below -1e-6 (a physically
 * invalid generator) and NonFiniteState on overflow.
 */
FlowTrajectory evolve(const Graph& g, const FlowGenerator& generator, const Measure& x0,
					  double tau, int steps);

/**
 * Consistency check used by the test harness: finite-difference d/dt of the
 * recorded states must match the recorded flows, and with vanishing external
 * flows the total mass must stay constant.  Throws InvariantViolation.
 */
void validate_trajectory(const FlowTrajectory& traj, double tolerance_scale = 1e-6);

/** Speed-limit evaluation of one trajectory. */
struct BoundReport {
	double tau = 0.0;
	Lambda lambda = Lambda::finite(1.0);
	double distance = 0.0;      // endpoint transport distance (or observable change)
	double avg_velocity = 0.0;  // time average of velocity(flow, lambda)
	double tau_bound = 0.0;     // distance / avg_velocity
	double saturation_ratio = 0.0;  // tau_bound / tau
};

/**
 * The master bound: any trajectory obeying the continuity equation needs
 * tau >= distance(x_0, x_tau) / <velocity>.  Infinite lambda requires all
 * recorded external flows below 1e-10 (ExternalFlowsPresent otherwise) and
 * uses the balanced distance.
 */
BoundReport speed_limit_report(const FlowTrajectory& traj, const Lambda& lambda,
							   ComponentPolicy policy = ComponentPolicy::require_connected);

/**
 * Observable version: the numerator is |sum_i o_i (x_tau - x_0)_i| and the
 * denominator carries max(sup_norm(o)/lambda, lip_norm(o)); infinite lambda
 * keeps only the Lipschitz norm (external flows must vanish).
 */
BoundReport observable_bound(const FlowTrajectory& traj, std::span<const double> o,
							 const Lambda& lambda);

struct TransportCheck {
	double chain_sum = 0.0;         // sum_k distance(x_k, x_{k+1})
	double velocity_integral = 0.0; // integral of velocity over the grid
};

/**
 * Evaluates the two sides of the grid-level transport estimate: the chained
 * step distances are bounded by the velocity integral (up to discretization
 * error) and bounded below by the endpoint distance (triangle inequality).
 */
TransportCheck discretized_transport_check(const FlowTrajectory& traj, const Lambda& lambda,
										   ComponentPolicy policy = ComponentPolicy::require_connected);

}  // namespace tsl
