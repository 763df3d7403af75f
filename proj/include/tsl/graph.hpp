#pragma once

#include <string>
#include <utility>
#include <vector>

namespace tsl {

/** Undirected edge between two vertices, stored with u < v. */
struct Edge {
	int u = 0;
	int v = 0;
};

/** Dense matrix of hop-count distances between all vertex pairs. */
class DistanceMatrix {
public:
	DistanceMatrix() = default;
	DistanceMatrix(int n, std::vector<int> d) : n_(n), d_(std::move(d)) {}

	int size() const { return n_; }
	int operator()(int i, int j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
	int max() const;

private:
	int n_ = 0;
	std::vector<int> d_;
};

/**
 * Finite undirected simple graph.  Edges are deduplicated and stored sorted,
 * so edge indices are stable and flow fields can address edges by index.
 * Construction rejects self-loops and out-of-range endpoints, and by default
 * requires the graph to be connected; pass allow_disconnected=true for the
 * opt-in multi-component mode.
 */
class Graph {
public:
	Graph() = default;
	Graph(int vertex_count, std::vector<Edge> edges, bool allow_disconnected = false);

	static Graph chain(int n);
	static Graph cycle(int n);
	static Graph complete(int n);
	static Graph star(int n);

	/**
	 * Text format: first line "N M", then M lines "i j" with 1-based vertex
	 * indices.  Comment lines starting with '#' are skipped.
	 */
	static Graph from_file(const std::string& path, bool allow_disconnected = false);
	static Graph from_text(const std::string& text, bool allow_disconnected = false);

	int vertex_count() const { return n_; }
	int edge_count() const { return static_cast<int>(edges_.size()); }
	const std::vector<Edge>& edges() const { return edges_; }
	const Edge& edge(int e) const { return edges_[e]; }

	/** Index of edge {u,v} (order-insensitive), or -1 when absent. */
	int edge_index(int u, int v) const;
	bool has_edge(int u, int v) const { return edge_index(u, v) >= 0; }

	struct Neighbor {
		int vertex;
		int edge;  // index into edges()
	};
	const std::vector<Neighbor>& neighbors(int v) const { return adj_[v]; }

	int degree(int v) const { return static_cast<int>(adj_[v].size()); }
	int max_degree() const;

	bool connected() const { return component_count_ == 1; }
	int component_count() const { return component_count_; }
	/** Component id per vertex, ids are 0..component_count()-1. */
	const std::vector<int>& component_ids() const { return component_; }

	/** All-pairs hop distances via BFS from every vertex.  Requires connectivity. */
	DistanceMatrix shortest_path_matrix() const;

	/** Hop distances from a single source; unreachable vertices get -1. */
	std::vector<int> distances_from(int source) const;

	/** Longest shortest path.  Requires connectivity. */
	int diameter() const;

private:
	int n_ = 0;
	std::vector<Edge> edges_;
	std::vector<std::vector<Neighbor>> adj_;
	std::vector<int> component_;
	int component_count_ = 0;
};

}  // namespace tsl
