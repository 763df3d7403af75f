#pragma once

#include <doctest.h>

#include <random>
#include <utility>
#include <vector>

#include "tsl/graph.hpp"
#include "tsl/measure.hpp"

namespace tsltest {

using Rng = std::mt19937_64;

inline double urand(Rng& rng, double lo, double hi) {
	return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int irand(Rng& rng, int lo, int hi) {
	return std::uniform_int_distribution<int>(lo, hi)(rng);
}

/** Random connected simple graph: random spanning tree plus extra edges. */
inline tsl::Graph random_connected_graph(Rng& rng, int n, double extra_edge_prob = 0.25) {
	std::vector<tsl::Edge> edges;
	for (int v = 1; v < n; ++v) edges.push_back({irand(rng, 0, v - 1), v});
	for (int u = 0; u < n; ++u)
		for (int v = u + 1; v < n; ++v)
			if (urand(rng, 0.0, 1.0) < extra_edge_prob) edges.push_back({u, v});
	return tsl::Graph(n, edges);
}

inline tsl::Measure random_measure(Rng& rng, int n, double lo = 0.0, double hi = 1.0) {
	std::vector<double> x(n);
	for (double& v : x) v = urand(rng, lo, hi);
	return tsl::Measure(x);
}

/** Two random measures rescaled to share the same total mass. */
inline std::pair<tsl::Measure, tsl::Measure> random_balanced_pair(Rng& rng, int n) {
	std::vector<double> a(n), b(n);
	double ta = 0.0, tb = 0.0;
	for (int i = 0; i < n; ++i) {
		a[i] = urand(rng, 0.0, 1.0);
		b[i] = urand(rng, 0.0, 1.0);
		ta += a[i];
		tb += b[i];
	}
	for (double& v : b) v *= ta / tb;
	return {tsl::Measure(a), tsl::Measure(b)};
}

}  // namespace tsltest
