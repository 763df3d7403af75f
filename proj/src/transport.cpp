#include "tsl/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

namespace {

constexpr double kInfCap = 1e300;

/**
 * Minimal real-valued min-cost flow solver: successive shortest paths with
 * vertex potentials (Dijkstra on reduced costs).  All arc costs must be
 * nonnegative, which holds for every network built here, so no Bellman-Ford
 * bootstrap is needed.  Capacities and excesses are plain doubles; epsilon
 * hygiene is scaled to the total supplied mass.
 */
class MinCostFlow {
public:
	explicit MinCostFlow(int node_count)
		: n_(node_count), adj_(node_count), excess_(node_count, 0.0), pot_(node_count, 0.0) {}

	int add_arc(int from, int to, double cap, double cost) {
		const int id = static_cast<int>(arcs_.size());
		arcs_.push_back({to, cap, 0.0, cost});
		adj_[from].push_back(id);
		arcs_.push_back({from, 0.0, 0.0, -cost});
		adj_[to].push_back(id + 1);
		return id;
	}

	void add_excess(int v, double e) { excess_[v] += e; }

	/** Routes all excess; returns false when some surplus cannot reach a deficit. */
	bool solve() {
		double scale = 0.0;
		for (double e : excess_) scale += std::abs(e);
		eps_ = 1e-13 * std::max(1.0, scale);

		while (true) {
			int source_seed = -1;
			for (int v = 0; v < n_; ++v)
				if (excess_[v] > eps_) {
					source_seed = v;
					break;
				}
			if (source_seed < 0) return true;  // nothing left to route

			if (!dijkstra()) return false;
			const int target = pick_target();
			if (target < 0) return false;
			augment(target);
		}
	}

	double flow(int arc_id) const { return arcs_[arc_id].flow; }

	double total_cost() const {
		double c = 0.0;
		for (std::size_t i = 0; i < arcs_.size(); i += 2) c += arcs_[i].flow * arcs_[i].cost;
		return c;
	}

	const std::vector<double>& potentials() const { return pot_; }

private:
	struct Arc {
		int to;
		double cap;
		double flow;
		double cost;
	};

	double residual(int arc_id) const { return arcs_[arc_id].cap - arcs_[arc_id].flow; }

	/** Multi-source Dijkstra from every surplus node over the residual graph. */
	bool dijkstra() {
		const double inf = std::numeric_limits<double>::infinity();
		dist_.assign(n_, inf);
		parent_arc_.assign(n_, -1);
		using Item = std::pair<double, int>;
		std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
		bool any_source = false;
		for (int v = 0; v < n_; ++v)
			if (excess_[v] > eps_) {
				dist_[v] = 0.0;
				heap.push({0.0, v});
				any_source = true;
			}
		if (!any_source) return false;
		std::vector<char> done(n_, 0);
		while (!heap.empty()) {
			auto [d, u] = heap.top();
			heap.pop();
			if (done[u]) continue;
			done[u] = 1;
			for (int id : adj_[u]) {
				if (residual(id) <= eps_) continue;
				const int v = arcs_[id].to;
				if (done[v]) continue;
				const double rc = std::max(0.0, arcs_[id].cost + pot_[u] - pot_[v]);
				if (d + rc < dist_[v] - 1e-15) {
					dist_[v] = d + rc;
					parent_arc_[v] = id;
					heap.push({dist_[v], v});
				}
			}
		}
		for (int v = 0; v < n_; ++v)
			if (dist_[v] < inf) pot_[v] += dist_[v];
		return true;
	}

	int pick_target() const {
		int best = -1;
		for (int v = 0; v < n_; ++v) {
			if (excess_[v] < -eps_ && dist_[v] < std::numeric_limits<double>::infinity()) {
				if (best < 0 || dist_[v] < dist_[best]) best = v;
			}
		}
		return best;
	}

	void augment(int target) {
		// walk back to the source this path grew from
		double bottleneck = -excess_[target];
		int v = target;
		while (parent_arc_[v] >= 0) {
			const int id = parent_arc_[v];
			bottleneck = std::min(bottleneck, residual(id));
			v = arcs_[id ^ 1].to;
		}
		const int source = v;
		const double delta = std::min(bottleneck, excess_[source]);
		v = target;
		while (parent_arc_[v] >= 0) {
			const int id = parent_arc_[v];
			arcs_[id].flow += delta;
			arcs_[id ^ 1].flow -= delta;
			v = arcs_[id ^ 1].to;
		}
		excess_[source] -= delta;
		excess_[target] += delta;
		if (std::abs(excess_[source]) <= eps_) excess_[source] = 0.0;
		if (std::abs(excess_[target]) <= eps_) excess_[target] = 0.0;
	}

	int n_;
	std::vector<Arc> arcs_;
	std::vector<std::vector<int>> adj_;
	std::vector<double> excess_, pot_;
	std::vector<double> dist_;
	std::vector<int> parent_arc_;
	double eps_ = 1e-13;
};

void check_sizes(const Graph& g, const Measure& a, const Measure& b) {
	if (a.size() != g.vertex_count() || b.size() != g.vertex_count())
		throw LengthMismatch("measure size does not match vertex count");
}

double mass_scale(const Measure& a, const Measure& b) {
	return std::max(1.0, std::max(a.total(), b.total()));
}

/**
 * Path-decompose a set of directed edge flows into a transport plan.
 * `edge_flow[e]` is the net flow across graph edge e, positive from u to v.
 * `src` / `dst` are the measures whose difference the flow balances; the
 * untransported remainder lands on the plan diagonal.
 */
TransportPlan decompose_plan(const Graph& g, std::span<const double> src,
							 std::span<const double> dst, std::span<const double> edge_flow) {
	const int n = g.vertex_count();
	const double eps = 1e-12 * std::max(1.0, kernels::sum_abs(src.size(), src.data()));

	struct DArc {
		int to;
		double amount;
	};
	std::vector<std::vector<DArc>> out(n);
	for (int e = 0; e < g.edge_count(); ++e) {
		const double f = edge_flow[e];
		if (f > eps)
			out[g.edge(e).u].push_back({g.edge(e).v, f});
		else if (f < -eps)
			out[g.edge(e).v].push_back({g.edge(e).u, -f});
	}
	std::vector<std::size_t> cursor(n, 0);

	std::vector<double> surplus(n), deficit(n);
	for (int i = 0; i < n; ++i) {
		const double d = src[i] - dst[i];
		surplus[i] = std::max(d, 0.0);
		deficit[i] = std::max(-d, 0.0);
	}

	TransportPlan plan;
	plan.n = n;
	std::vector<double> moved_out(n, 0.0);

	std::vector<int> path_arcs;      // indices into out[...] along the walk
	std::vector<int> path_vertices;  // visited vertices, path_vertices[0] = start
	for (int start = 0; start < n; ++start) {
		while (surplus[start] > eps) {
			// greedy walk along positive residual arcs until a deficit vertex
			path_arcs.clear();
			path_vertices.assign(1, start);
			int v = start;
			const int step_cap = 2 * (n + g.edge_count()) + 8;
			int steps = 0;
			while (deficit[v] <= eps) {
				while (cursor[v] < out[v].size() && out[v][cursor[v]].amount <= eps) ++cursor[v];
				if (cursor[v] >= out[v].size() || ++steps > step_cap) break;
				path_arcs.push_back(static_cast<int>(cursor[v]));
				v = out[v][cursor[v]].to;
				path_vertices.push_back(v);
			}
			if (deficit[v] <= eps) {
				// numerical dust with no completable path; drop the remainder
				surplus[start] = 0.0;
				break;
			}
			double delta = std::min(surplus[start], deficit[v]);
			for (std::size_t k = 0; k < path_arcs.size(); ++k)
				delta = std::min(delta, out[path_vertices[k]][path_arcs[k]].amount);
			for (std::size_t k = 0; k < path_arcs.size(); ++k)
				out[path_vertices[k]][path_arcs[k]].amount -= delta;
			surplus[start] -= delta;
			deficit[v] -= delta;
			moved_out[start] += delta;
			plan.entries.push_back({start, v, delta});
		}
	}
	// in-place remainder on the diagonal
	for (int i = 0; i < n; ++i) {
		const double stay = src[i] - moved_out[i];
		if (stay > eps) plan.entries.push_back({i, i, stay});
	}
	return plan;
}

struct BeckmannSolution {
	double value = 0.0;
	std::vector<double> edge_flow;  // net flow per edge, positive u -> v
	std::vector<double> potential;  // phi = -pot, normalized to phi[0] = 0
};

/** Balanced Beckmann problem on the graph alone (no reservoir). */
BeckmannSolution solve_beckmann(const Graph& g, std::span<const double> a,
								std::span<const double> b) {
	const int n = g.vertex_count();
	MinCostFlow mcf(n);
	std::vector<int> fwd(g.edge_count()), bwd(g.edge_count());
	for (int e = 0; e < g.edge_count(); ++e) {
		fwd[e] = mcf.add_arc(g.edge(e).u, g.edge(e).v, kInfCap, 1.0);
		bwd[e] = mcf.add_arc(g.edge(e).v, g.edge(e).u, kInfCap, 1.0);
	}
	for (int i = 0; i < n; ++i) mcf.add_excess(i, a[i] - b[i]);
	if (!mcf.solve())
		throw DisconnectedGraph("mass would have to cross between graph components");

	BeckmannSolution sol;
	sol.value = mcf.total_cost();
	sol.edge_flow.resize(g.edge_count());
	for (int e = 0; e < g.edge_count(); ++e) sol.edge_flow[e] = mcf.flow(fwd[e]) - mcf.flow(bwd[e]);
	sol.potential.resize(n);
	for (int i = 0; i < n; ++i) sol.potential[i] = -mcf.potentials()[i];
	const double ref = sol.potential.empty() ? 0.0 : sol.potential[0];
	for (double& p : sol.potential) p -= ref;
	return sol;
}

void check_balance(const Measure& a, const Measure& b) {
	if (std::abs(a.total() - b.total()) > 1e-9)
		throw UnbalancedInput("measures must carry equal total mass (abs tol 1e-9)");
}

}  // namespace

std::vector<double> TransportPlan::source_marginal() const {
	std::vector<double> m(n, 0.0);
	for (const auto& t : entries) m[t.source] += t.mass;
	return m;
}

std::vector<double> TransportPlan::target_marginal() const {
	std::vector<double> m(n, 0.0);
	for (const auto& t : entries) m[t.target] += t.mass;
	return m;
}

double TransportPlan::cost(const DistanceMatrix& d) const {
	double c = 0.0;
	for (const auto& t : entries) c += t.mass * d(t.source, t.target);
	return c;
}

Wasserstein1Result wasserstein1(const Graph& g, const Measure& a, const Measure& b,
								ComponentPolicy policy) {
	check_sizes(g, a, b);
	check_balance(a, b);
	if (policy == ComponentPolicy::require_connected && !g.connected())
		throw DisconnectedGraph("wasserstein1 requires a connected graph");

	BeckmannSolution sol = solve_beckmann(g, a.span(), b.span());
	Wasserstein1Result res;
	res.value = sol.value;
	res.plan = decompose_plan(g, a.span(), b.span(), sol.edge_flow);
	res.potential = std::move(sol.potential);
	return res;
}

DualResult kantorovich_dual(const Graph& g, const Measure& a, const Measure& b,
							ComponentPolicy policy) {
	check_sizes(g, a, b);
	check_balance(a, b);
	if (policy == ComponentPolicy::require_connected && !g.connected())
		throw DisconnectedGraph("kantorovich_dual requires a connected graph");

	BeckmannSolution sol = solve_beckmann(g, a.span(), b.span());
	DualResult res;
	res.potential = std::move(sol.potential);
	res.value = 0.0;
	for (int i = 0; i < g.vertex_count(); ++i) res.value += res.potential[i] * (a[i] - b[i]);
	return res;
}

UnbalancedSolution generalized_wasserstein(const Graph& g, const Measure& a, const Measure& b,
										   double lambda, ComponentPolicy policy) {
	check_sizes(g, a, b);
	if (!(lambda > 0.0) || !std::isfinite(lambda))
		throw NonPositiveLambda("lambda must be a positive finite number");
	if (policy == ComponentPolicy::require_connected && !g.connected())
		throw DisconnectedGraph("generalized_wasserstein requires a connected graph");

	const int n = g.vertex_count();
	const int reservoir = n;
	MinCostFlow mcf(n + 1);
	std::vector<int> fwd(g.edge_count()), bwd(g.edge_count());
	for (int e = 0; e < g.edge_count(); ++e) {
		fwd[e] = mcf.add_arc(g.edge(e).u, g.edge(e).v, kInfCap, 1.0);
		bwd[e] = mcf.add_arc(g.edge(e).v, g.edge(e).u, kInfCap, 1.0);
	}
	std::vector<int> to_res(n), from_res(n);
	for (int i = 0; i < n; ++i) {
		to_res[i] = mcf.add_arc(i, reservoir, kInfCap, lambda);
		from_res[i] = mcf.add_arc(reservoir, i, kInfCap, lambda);
	}
	double net = 0.0;
	for (int i = 0; i < n; ++i) {
		mcf.add_excess(i, a[i] - b[i]);
		net += a[i] - b[i];
	}
	mcf.add_excess(reservoir, -net);
	if (!mcf.solve()) throw Error("internal: reservoir network must always be feasible");

	UnbalancedSolution res;
	res.value = mcf.total_cost();

	std::vector<double> removed_a(n, 0.0), removed_b(n, 0.0);
	for (int i = 0; i < n; ++i) {
		const double r = mcf.flow(to_res[i]) - mcf.flow(from_res[i]);
		if (r > 0.0)
			removed_a[i] = r;
		else
			removed_b[i] = -r;
	}
	const double tol = 1e-9 * mass_scale(a, b);
	std::vector<double> ta(n), tb(n);
	for (int i = 0; i < n; ++i) {
		ta[i] = a[i] - removed_a[i];
		tb[i] = b[i] - removed_b[i];
	}
	res.trimmed_a = Measure(ta, tol);
	res.trimmed_b = Measure(tb, tol);
	res.removed_a = Measure(std::move(removed_a), tol);
	res.removed_b = Measure(std::move(removed_b), tol);

	std::vector<double> edge_flow(g.edge_count());
	for (int e = 0; e < g.edge_count(); ++e) edge_flow[e] = mcf.flow(fwd[e]) - mcf.flow(bwd[e]);
	res.plan = decompose_plan(g, res.trimmed_a.span(), res.trimmed_b.span(), edge_flow);
	return res;
}

double total_variation(const Measure& a, const Measure& b) { return 0.5 * l1_distance(a, b); }

ObservableNorms observable_norms(const Graph& g, std::span<const double> o) {
	if (static_cast<int>(o.size()) != g.vertex_count())
		throw LengthMismatch("observable size does not match vertex count");
	ObservableNorms norms;
	for (double v : o) norms.sup = std::max(norms.sup, std::abs(v));
	for (const Edge& e : g.edges()) norms.lip = std::max(norms.lip, std::abs(o[e.u] - o[e.v]));
	return norms;
}

}  // namespace tsl
