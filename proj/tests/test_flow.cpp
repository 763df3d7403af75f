#include "tsl/flow.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "test_support.hpp"
#include "tsl/errors.hpp"
#include "tsl/graph.hpp"
#include "tsl/measure.hpp"
#include "tsl/numerics.hpp"
#include "tsl/transport.hpp"

using namespace tsl;

namespace {

/** Sinusoidal bounded generator with per-edge/per-vertex random phases. */
FlowGenerator random_smooth_generator(tsltest::Rng& rng, const Graph& g, bool with_external,
									  double edge_amp, double ext_amp) {
	struct Wave {
		double amp, freq, phase;
	};
	std::vector<Wave> edge_waves, ext_waves;
	for (int e = 0; e < g.edge_count(); ++e) {
		edge_waves.push_back({tsltest::urand(rng, -edge_amp, edge_amp),
							  tsltest::urand(rng, 0.5, 3.0), tsltest::urand(rng, 0.0, 6.28)});
	}
	for (int v = 0; v < g.vertex_count(); ++v) {
		double a = with_external ? tsltest::urand(rng, -ext_amp, ext_amp) : 0.0;
		ext_waves.push_back({a, tsltest::urand(rng, 0.5, 3.0), tsltest::urand(rng, 0.0, 6.28)});
	}
	return [&g, edge_waves, ext_waves](double t, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		for (int e = 0; e < g.edge_count(); ++e) {
			f.edge[e] = edge_waves[e].amp * std::sin(edge_waves[e].freq * t + edge_waves[e].phase);
		}
		for (int v = 0; v < g.vertex_count(); ++v) {
			f.external[v] =
				ext_waves[v].amp * std::cos(ext_waves[v].freq * t + ext_waves[v].phase);
		}
		return f;
	};
}

FlowTrajectory coarsen_by_two(const FlowTrajectory& traj) {
	FlowTrajectory out;
	out.graph = traj.graph;
	for (int k = 0; k < traj.sample_count(); k += 2) {
		out.times.push_back(traj.times[k]);
		out.measures.push_back(traj.measures[k]);
		out.flows.push_back(traj.flows[k]);
	}
	if ((traj.sample_count() - 1) % 2 != 0) {  // keep the right endpoint
		out.times.push_back(traj.times.back());
		out.measures.push_back(traj.measures.back());
		out.flows.push_back(traj.flows.back());
	}
	return out;
}

}  // namespace

TEST_CASE("lambda mode wrapper") {
	Lambda l = Lambda::finite(2.0);
	CHECK(!l.is_infinite());
	CHECK(l.value() == doctest::Approx(2.0));
	CHECK(Lambda::infinite().is_infinite());
	CHECK(Lambda::infinite().str() == "inf");
	CHECK_THROWS_AS(Lambda::infinite().value(), NonPositiveLambda);
	CHECK_THROWS_AS(Lambda::finite(0.0), NonPositiveLambda);
	CHECK_THROWS_AS(Lambda::finite(-1.0), NonPositiveLambda);
	CHECK_THROWS_AS(Lambda::finite(std::numeric_limits<double>::infinity()), NonPositiveLambda);
}

TEST_CASE("velocity combines external and exchange terms") {
	Graph g = Graph::chain(2);
	FlowField f = FlowField::zero(g);
	CHECK(velocity(f, 1.0) == 0.0);

	f.external = {0.1, -0.1};
	f.edge = {0.2};
	CHECK(velocity(f, 2.0) == doctest::Approx(0.6).epsilon(1e-12));
	CHECK(velocity(f, 0.0) == doctest::Approx(0.2));
	CHECK(velocity(f, Lambda::finite(2.0)) == doctest::Approx(0.6));
	// infinite mode counts exchange flows only
	CHECK(velocity(f, Lambda::infinite()) == doctest::Approx(0.2));

	FlowField single = FlowField::zero(g);
	single.edge = {-0.3};
	CHECK(velocity(single, 1.0) == doctest::Approx(0.3));

	CHECK_THROWS_AS(velocity(f, -1.0), NonPositiveLambda);
}

TEST_CASE("evolve reproduces the exponential drain across one edge") {
	Graph g = Graph::chain(2);
	// positive edge flow moves mass from vertex 0 to vertex 1
	FlowGenerator gen = [&g](double, std::span<const double> x) {
		FlowField f = FlowField::zero(g);
		f.edge[0] = x[0];
		return f;
	};
	FlowTrajectory traj = evolve(g, gen, Measure::delta(2, 0), 1.0, 1000);
	REQUIRE(traj.sample_count() == 1001);
	CHECK(traj.duration() == doctest::Approx(1.0));
	CHECK(traj.final_state()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-8));
	// interior samples follow e^{-t} too
	int mid = 500;
	CHECK(traj.measures[mid][0] == doctest::Approx(std::exp(-traj.times[mid])).epsilon(1e-8));
	// exchange flows conserve total mass
	for (const Measure& m : traj.measures) {
		CHECK(m.total() == doctest::Approx(1.0).epsilon(1e-12));
	}
	validate_trajectory(traj);
}

TEST_CASE("evolve with a zero generator holds the state constant") {
	Graph g = Graph::complete(3);
	FlowGenerator gen = [&g](double, std::span<const double>) { return FlowField::zero(g); };
	Measure x0({0.3, 0.5, 0.2});
	FlowTrajectory traj = evolve(g, gen, x0, 2.0, 50);
	for (const Measure& m : traj.measures) {
		CHECK(l1_distance(m, x0) == doctest::Approx(0.0));
	}
	validate_trajectory(traj);
}

TEST_CASE("evolve rejects trajectories that drive mass negative") {
	Graph g = Graph::chain(2);
	FlowGenerator gen = [&g](double, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		f.external[0] = -1.0;
		return f;
	};
	CHECK_THROWS_AS(evolve(g, gen, Measure({0.5, 0.0}), 1.0, 100), NegativeMassBlowup);
}

TEST_CASE("validate_trajectory flags tampered states") {
	Graph g = Graph::chain(3);
	FlowGenerator gen = [&g](double t, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		f.edge[0] = 0.1 * std::sin(t);
		f.edge[1] = 0.05;
		return f;
	};
	FlowTrajectory traj = evolve(g, gen, Measure::uniform(3, 3.0), 1.0, 200);
	validate_trajectory(traj);

	FlowTrajectory broken = traj;
	std::vector<double> vals = broken.measures[100].values();
	vals[0] += 0.05;
	vals[1] -= 0.05;  // keeps the total so only the derivative check can catch it
	broken.measures[100] = Measure(vals);
	CHECK_THROWS_AS(validate_trajectory(broken), InvariantViolation);

	FlowTrajectory leaking = traj;
	vals = leaking.measures[150].values();
	vals[2] += 0.5;  // breaks mass conservation
	leaking.measures[150] = Measure(vals);
	CHECK_THROWS_AS(validate_trajectory(leaking), InvariantViolation);
}

TEST_CASE("constant unit flow across one edge saturates the speed limit") {
	Graph g = Graph::chain(2);
	FlowGenerator gen = [&g](double, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		f.edge[0] = 1.0;
		return f;
	};
	FlowTrajectory traj = evolve(g, gen, Measure({1.0, 0.0}), 1.0, 100);
	for (Lambda lambda : {Lambda::finite(1.0), Lambda::infinite()}) {
		BoundReport r = speed_limit_report(traj, lambda);
		CHECK(r.tau == doctest::Approx(1.0));
		CHECK(r.distance == doctest::Approx(1.0).epsilon(1e-10));
		CHECK(r.avg_velocity == doctest::Approx(1.0).epsilon(1e-12));
		CHECK(r.tau_bound == doctest::Approx(1.0).epsilon(1e-10));
		CHECK(r.saturation_ratio == doctest::Approx(1.0).epsilon(1e-10));
	}
}

TEST_CASE("constant trajectory reports zero distance and zero bound") {
	Graph g = Graph::chain(2);
	FlowGenerator gen = [&g](double, std::span<const double>) { return FlowField::zero(g); };
	FlowTrajectory traj = evolve(g, gen, Measure({0.5, 0.5}), 1.0, 10);
	BoundReport r = speed_limit_report(traj, Lambda::finite(1.0));
	CHECK(r.distance == 0.0);
	CHECK(r.tau_bound == 0.0);
	CHECK(r.saturation_ratio == 0.0);
}

TEST_CASE("infinite lambda rejects external flows") {
	Graph g = Graph::chain(2);
	FlowGenerator gen = [&g](double, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		f.external = {0.05, -0.05};
		return f;
	};
	FlowTrajectory traj = evolve(g, gen, Measure({1.0, 1.0}), 1.0, 50);
	CHECK_THROWS_AS(speed_limit_report(traj, Lambda::infinite()), ExternalFlowsPresent);
	std::vector<double> o{1.0, 0.0};
	CHECK_THROWS_AS(observable_bound(traj, o, Lambda::infinite()), ExternalFlowsPresent);
	// the finite mode handles the same trajectory
	BoundReport r = speed_limit_report(traj, Lambda::finite(1.0));
	CHECK(r.tau_bound <= r.tau * (1.0 + 1e-6));
}

TEST_CASE("master inequality holds on random smooth flow systems") {
	tsltest::Rng rng(20240811);
	const std::vector<Lambda> lambdas{Lambda::finite(0.5), Lambda::finite(1.0),
									  Lambda::finite(2.0)};
	for (int trial = 0; trial < 40; ++trial) {
		int n = tsltest::irand(rng, 2, 10);
		Graph g = tsltest::random_connected_graph(rng, n);
		bool with_external = trial % 2 == 0;
		double edge_amp = 0.25 / std::max(1, g.max_degree());
		FlowGenerator gen = random_smooth_generator(rng, g, with_external, edge_amp, 0.1);
		double tau = tsltest::urand(rng, 0.4, 1.5);
		FlowTrajectory traj = evolve(g, gen, Measure::uniform(n, 2.0 * n), tau, 250);
		validate_trajectory(traj);

		for (const Lambda& lambda : lambdas) {
			BoundReport r = speed_limit_report(traj, lambda);
			CHECK(r.tau_bound <= tau * (1.0 + 1e-6));
			// random observable: also a valid lower bound, and never beats the
			// transport bound
			std::vector<double> o(n);
			for (double& v : o) v = tsltest::urand(rng, -2.0, 2.0);
			BoundReport ob = observable_bound(traj, o, lambda);
			CHECK(ob.tau_bound <= tau * (1.0 + 1e-6));
			CHECK(ob.tau_bound <= r.tau_bound + 1e-9);
		}
		if (!with_external) {
			BoundReport r = speed_limit_report(traj, Lambda::infinite());
			CHECK(r.tau_bound <= tau * (1.0 + 1e-6));
		}
	}
}

TEST_CASE("observable bound examples") {
	Graph g = Graph::chain(2);
	FlowGenerator gen = [&g](double, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		f.edge[0] = 1.0;
		return f;
	};
	FlowTrajectory traj = evolve(g, gen, Measure({1.0, 0.0}), 1.0, 100);

	// constant observable of a mass-conserving flow never moves
	std::vector<double> constant{3.0, 3.0};
	BoundReport flat = observable_bound(traj, constant, Lambda::finite(1.0));
	CHECK(flat.distance <= 1e-12);
	CHECK(flat.tau_bound <= 1e-12);

	// indicator of the target vertex: numerator is exactly the arriving mass
	std::vector<double> indicator{0.0, 1.0};
	BoundReport ind = observable_bound(traj, indicator, Lambda::finite(1.0));
	CHECK(ind.distance == doctest::Approx(1.0).epsilon(1e-10));
	CHECK(ind.tau_bound == doctest::Approx(1.0).epsilon(1e-10));
	CHECK_THROWS_AS(observable_bound(traj, std::vector<double>{1.0}, Lambda::finite(1.0)),
					LengthMismatch);
}

TEST_CASE("discretized transport check on degenerate and exact cases") {
	Graph g = Graph::chain(2);
	FlowGenerator zero_gen = [&g](double, std::span<const double>) { return FlowField::zero(g); };
	FlowTrajectory still = evolve(g, zero_gen, Measure({1.0, 1.0}), 1.0, 20);
	TransportCheck tc = discretized_transport_check(still, Lambda::finite(1.0));
	CHECK(tc.chain_sum == doctest::Approx(0.0));
	CHECK(tc.velocity_integral == doctest::Approx(0.0));

	FlowGenerator unit = [&g](double, std::span<const double>) {
		FlowField f = FlowField::zero(g);
		f.edge[0] = 1.0;
		return f;
	};
	FlowTrajectory moving = evolve(g, unit, Measure({1.0, 0.0}), 1.0, 200);
	tc = discretized_transport_check(moving, Lambda::finite(1.0));
	CHECK(tc.chain_sum == doctest::Approx(1.0).epsilon(1e-8));
	CHECK(tc.velocity_integral == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("chain sums are sandwiched and monotone under refinement") {
	tsltest::Rng rng(77);
	for (int trial = 0; trial < 8; ++trial) {
		int n = tsltest::irand(rng, 3, 8);
		Graph g = tsltest::random_connected_graph(rng, n);
		double edge_amp = 0.25 / std::max(1, g.max_degree());
		FlowGenerator gen = random_smooth_generator(rng, g, trial % 2 == 0, edge_amp, 0.08);
		FlowTrajectory fine = evolve(g, gen, Measure::uniform(n, 2.0 * n), 1.0, 256);
		Lambda lambda = Lambda::finite(trial % 2 == 0 ? 1.0 : 0.5);

		TransportCheck tf = discretized_transport_check(fine, lambda);
		BoundReport r = speed_limit_report(fine, lambda);
		// triangle inequality from below, velocity estimate from above
		CHECK(tf.chain_sum >= r.distance - 1e-9);
		CHECK(tf.chain_sum <= tf.velocity_integral + 1e-3);

		FlowTrajectory coarse = coarsen_by_two(fine);
		FlowTrajectory coarser = coarsen_by_two(coarse);
		TransportCheck tm = discretized_transport_check(coarse, lambda);
		TransportCheck tc = discretized_transport_check(coarser, lambda);
		CHECK(tm.chain_sum <= tf.chain_sum + 1e-9);
		CHECK(tc.chain_sum <= tm.chain_sum + 1e-9);
		CHECK(tc.chain_sum >= r.distance - 1e-9);
	}
}
