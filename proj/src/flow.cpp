#include "tsl/flow.hpp"

#include <cmath>
#include <cstdio>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"
#include "tsl/numerics.hpp"

namespace tsl {

Lambda Lambda::finite(double v) {
	if (!(v > 0.0) || !std::isfinite(v))
		throw NonPositiveLambda("lambda must be a positive finite number");
	return Lambda(v, false);
}

Lambda Lambda::infinite() { return Lambda(0.0, true); }

double Lambda::value() const {
	if (infinite_) throw NonPositiveLambda("infinite lambda has no finite value");
	return value_;
}

std::string Lambda::str() const {
	if (infinite_) return "inf";
	char buf[32];
	std::snprintf(buf, sizeof buf, "%g", value_);
	return buf;
}

FlowField FlowField::zero(const Graph& g) {
	FlowField f;
	f.external.assign(g.vertex_count(), 0.0);
	f.edge.assign(g.edge_count(), 0.0);
	return f;
}

double velocity(const FlowField& f, double lambda) {
	if (lambda < 0.0 || !std::isfinite(lambda))
		throw NonPositiveLambda("velocity weight must be a finite nonnegative number");
	return lambda * kernels::sum_abs(f.external.size(), f.external.data()) +
		   kernels::sum_abs(f.edge.size(), f.edge.data());
}

double velocity(const FlowField& f, const Lambda& lambda) {
	if (lambda.is_infinite()) return kernels::sum_abs(f.edge.size(), f.edge.data());
	return velocity(f, lambda.value());
}

namespace {

void check_field_shape(const Graph& g, const FlowField& f) {
	if (static_cast<int>(f.external.size()) != g.vertex_count() ||
		static_cast<int>(f.edge.size()) != g.edge_count())
		throw LengthMismatch("flow field does not match the graph layout");
}

/** dx_i/dt induced by a flow field. */
void apply_flow(const Graph& g, const FlowField& f, std::span<double> dx) {
	for (int i = 0; i < g.vertex_count(); ++i) dx[i] = f.external[i];
	for (int e = 0; e < g.edge_count(); ++e) {
		dx[g.edge(e).u] -= f.edge[e];
		dx[g.edge(e).v] += f.edge[e];
	}
}

double max_abs_external(const FlowTrajectory& traj) {
	double m = 0.0;
	for (const FlowField& f : traj.flows)
		for (double v : f.external) m = std::max(m, std::abs(v));
	return m;
}

double endpoint_distance(const FlowTrajectory& traj, const Lambda& lambda,
						 ComponentPolicy policy, const Measure& a, const Measure& b) {
	if (lambda.is_infinite()) {
		if (max_abs_external(traj) > 1e-10)
			throw ExternalFlowsPresent(
				"infinite lambda requires vanishing external flows (max |f_i| <= 1e-10)");
		return wasserstein1(traj.graph, a, b, policy).value;
	}
	return generalized_wasserstein(traj.graph, a, b, lambda.value(), policy).value;
}

}  // namespace

FlowTrajectory evolve(const Graph& g, const FlowGenerator& generator, const Measure& x0,
					  double tau, int steps) {
	if (x0.size() != g.vertex_count())
		throw LengthMismatch("initial measure does not match vertex count");

	FlowField scratch;
	const OdeRhs rhs = [&](double t, std::span<const double> y, std::span<double> dy) {
		scratch = generator(t, y);
		check_field_shape(g, scratch);
		apply_flow(g, scratch, dy);
	};

	const TimeSeries series = rk4_integrate(rhs, x0.span(), 0.0, tau, steps);

	FlowTrajectory traj;
	traj.graph = g;
	traj.times = series.times;
	traj.measures.reserve(series.values.size());
	traj.flows.reserve(series.values.size());
	for (std::size_t k = 0; k < series.values.size(); ++k) {
		const std::vector<double>& y = series.values[k];
		for (double v : y)
			if (v < -1e-6)
				throw NegativeMassBlowup("state went negative beyond tolerance; generator invalid");
		traj.measures.emplace_back(y, 1e-6);
		FlowField f = generator(series.times[k], y);
		check_field_shape(g, f);
		traj.flows.push_back(std::move(f));
	}
	return traj;
}

void validate_trajectory(const FlowTrajectory& traj, double tolerance_scale) {
	const int n = traj.graph.vertex_count();
	const int samples = traj.sample_count();
	if (samples < 2) throw InvariantViolation("trajectory needs at least two samples");

	double scale = 1.0;
	for (const Measure& m : traj.measures) scale = std::max(scale, m.total());
	const double tol = tolerance_scale * scale;

	// The central difference carries an O(h^2 x''') truncation term.  Estimate
	// it per point from the second difference of the recorded derivatives so
	// the check stays sharp on fine grids without rejecting honest
	// trajectories on coarse ones.
	std::vector<double> prev(n), cur(n), next(n);
	for (int k = 1; k + 1 < samples; ++k) {
		const double dt = traj.times[k + 1] - traj.times[k - 1];
		apply_flow(traj.graph, traj.flows[k - 1], prev);
		apply_flow(traj.graph, traj.flows[k], cur);
		apply_flow(traj.graph, traj.flows[k + 1], next);
		for (int i = 0; i < n; ++i) {
			const double fd = (traj.measures[k + 1][i] - traj.measures[k - 1][i]) / dt;
			const double truncation = std::abs(next[i] - 2.0 * cur[i] + prev[i]);
			if (std::abs(fd - cur[i]) > tol + truncation)
				throw InvariantViolation("recorded flows disagree with the state derivative");
		}
	}

	if (max_abs_external(traj) <= 1e-12) {
		const double m0 = traj.measures.front().total();
		for (const Measure& m : traj.measures)
			if (std::abs(m.total() - m0) > 1e-8)
				throw InvariantViolation("total mass drifted despite vanishing external flows");
	}
}

BoundReport speed_limit_report(const FlowTrajectory& traj, const Lambda& lambda,
							   ComponentPolicy policy) {
	if (traj.sample_count() < 2) throw TooFewSamples("trajectory needs at least two samples");

	BoundReport rep;
	rep.tau = traj.duration();
	rep.lambda = lambda;
	rep.distance = endpoint_distance(traj, lambda, policy, traj.initial(), traj.final_state());

	std::vector<double> v(traj.sample_count());
	for (int k = 0; k < traj.sample_count(); ++k) v[k] = velocity(traj.flows[k], lambda);
	rep.avg_velocity = time_average(traj.times, v);

	if (rep.distance <= 0.0) {
		rep.tau_bound = 0.0;
	} else if (rep.avg_velocity <= 0.0) {
		throw InvariantViolation("nonzero displacement with zero average velocity");
	} else {
		rep.tau_bound = rep.distance / rep.avg_velocity;
	}
	rep.saturation_ratio = rep.tau > 0.0 ? rep.tau_bound / rep.tau : 0.0;
	return rep;
}

BoundReport observable_bound(const FlowTrajectory& traj, std::span<const double> o,
							 const Lambda& lambda) {
	if (traj.sample_count() < 2) throw TooFewSamples("trajectory needs at least two samples");
	const int n = traj.graph.vertex_count();
	if (static_cast<int>(o.size()) != n)
		throw LengthMismatch("observable size does not match vertex count");

	const ObservableNorms norms = observable_norms(traj.graph, o);
	double factor;
	if (lambda.is_infinite()) {
		if (max_abs_external(traj) > 1e-10)
			throw ExternalFlowsPresent(
				"infinite lambda requires vanishing external flows (max |f_i| <= 1e-10)");
		factor = norms.lip;
	} else {
		factor = std::max(norms.sup / lambda.value(), norms.lip);
	}

	const double o0 = kernels::dot(o.size(), o.data(), traj.initial().values().data());
	const double o1 = kernels::dot(o.size(), o.data(), traj.final_state().values().data());

	BoundReport rep;
	rep.tau = traj.duration();
	rep.lambda = lambda;
	rep.distance = std::abs(o1 - o0);

	std::vector<double> v(traj.sample_count());
	for (int k = 0; k < traj.sample_count(); ++k) v[k] = velocity(traj.flows[k], lambda);
	rep.avg_velocity = time_average(traj.times, v);

	const double denom = factor * rep.avg_velocity;
	if (rep.distance <= 0.0) {
		rep.tau_bound = 0.0;
	} else if (denom <= 0.0) {
		throw InvariantViolation("observable changed with zero denominator");
	} else {
		rep.tau_bound = rep.distance / denom;
	}
	rep.saturation_ratio = rep.tau > 0.0 ? rep.tau_bound / rep.tau : 0.0;
	return rep;
}

TransportCheck discretized_transport_check(const FlowTrajectory& traj, const Lambda& lambda,
										   ComponentPolicy policy) {
	if (traj.sample_count() < 2) throw TooFewSamples("trajectory needs at least two samples");

	TransportCheck check;
	for (int k = 0; k + 1 < traj.sample_count(); ++k)
		check.chain_sum +=
			endpoint_distance(traj, lambda, policy, traj.measures[k], traj.measures[k + 1]);

	std::vector<double> v(traj.sample_count());
	for (int k = 0; k < traj.sample_count(); ++k) v[k] = velocity(traj.flows[k], lambda);
	check.velocity_integral = trapezoid(traj.times, v);
	return check;
}

}  // namespace tsl
