#include "tsl/graph.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "tsl/errors.hpp"

namespace tsl {

int DistanceMatrix::max() const {
	int m = 0;
	for (int d : d_) m = std::max(m, d);
	return m;
}

Graph::Graph(int vertex_count, std::vector<Edge> edges, bool allow_disconnected)
	: n_(vertex_count) {
	if (vertex_count <= 0) throw InvalidGraph("graph needs at least one vertex");
	for (Edge& e : edges) {
		if (e.u == e.v) throw InvalidGraph("self-loops are not allowed");
		if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_)
			throw InvalidGraph("edge endpoint out of range");
		if (e.u > e.v) std::swap(e.u, e.v);
	}
	std::sort(edges.begin(), edges.end(),
			  [](const Edge& a, const Edge& b) { return a.u < b.u || (a.u == b.u && a.v < b.v); });
	edges.erase(std::unique(edges.begin(), edges.end(),
							[](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
				edges.end());
	edges_ = std::move(edges);

	adj_.assign(n_, {});
	for (int e = 0; e < edge_count(); ++e) {
		adj_[edges_[e].u].push_back({edges_[e].v, e});
		adj_[edges_[e].v].push_back({edges_[e].u, e});
	}

	component_.assign(n_, -1);
	component_count_ = 0;
	for (int s = 0; s < n_; ++s) {
		if (component_[s] >= 0) continue;
		component_[s] = component_count_;
		std::deque<int> queue{s};
		while (!queue.empty()) {
			int v = queue.front();
			queue.pop_front();
			for (const Neighbor& nb : adj_[v]) {
				if (component_[nb.vertex] < 0) {
					component_[nb.vertex] = component_count_;
					queue.push_back(nb.vertex);
				}
			}
		}
		++component_count_;
	}
	if (!allow_disconnected && component_count_ != 1)
		throw DisconnectedGraph("graph is not connected");
}

Graph Graph::chain(int n) {
	std::vector<Edge> edges;
	for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
	return Graph(n, std::move(edges));
}

Graph Graph::cycle(int n) {
	if (n < 3) throw InvalidGraph("cycle needs at least three vertices");
	std::vector<Edge> edges;
	for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
	edges.push_back({0, n - 1});
	return Graph(n, std::move(edges));
}

Graph Graph::complete(int n) {
	std::vector<Edge> edges;
	for (int i = 0; i < n; ++i)
		for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
	return Graph(n, std::move(edges));
}

Graph Graph::star(int n) {
	std::vector<Edge> edges;
	for (int i = 1; i < n; ++i) edges.push_back({0, i});
	return Graph(n, std::move(edges));
}

Graph Graph::from_text(const std::string& text, bool allow_disconnected) {
	std::istringstream in(text);
	std::string line;
	auto next_data_line = [&](std::string& out) {
		while (std::getline(in, line)) {
			auto pos = line.find_first_not_of(" \t\r");
			if (pos == std::string::npos || line[pos] == '#') continue;
			out = line;
			return true;
		}
		return false;
	};
	std::string header;
	if (!next_data_line(header)) throw ParseError("graph text is empty");
	std::istringstream hs(header);
	int n = 0, m = 0;
	if (!(hs >> n >> m)) throw ParseError("graph header must be 'N M'");
	std::vector<Edge> edges;
	edges.reserve(static_cast<std::size_t>(std::max(m, 0)));
	for (int e = 0; e < m; ++e) {
		std::string row;
		if (!next_data_line(row)) throw ParseError("graph text ended before all edges were read");
		std::istringstream rs(row);
		int i = 0, j = 0;
		if (!(rs >> i >> j)) throw ParseError("graph edge line must be 'i j'");
		// file format is 1-based
		edges.push_back({i - 1, j - 1});
	}
	return Graph(n, std::move(edges), allow_disconnected);
}

Graph Graph::from_file(const std::string& path, bool allow_disconnected) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open graph file: " + path);
	std::ostringstream buf;
	buf << in.rdbuf();
	return from_text(buf.str(), allow_disconnected);
}

int Graph::edge_index(int u, int v) const {
	if (u == v || u < 0 || v < 0 || u >= n_ || v >= n_) return -1;
	if (u > v) std::swap(u, v);
	for (const Neighbor& nb : adj_[u])
		if (nb.vertex == v) return nb.edge;
	return -1;
}

int Graph::max_degree() const {
	int d = 0;
	for (int v = 0; v < n_; ++v) d = std::max(d, degree(v));
	return d;
}

std::vector<int> Graph::distances_from(int source) const {
	if (source < 0 || source >= n_) throw InvalidGraph("BFS source out of range");
	std::vector<int> dist(n_, -1);
	dist[source] = 0;
	std::deque<int> queue{source};
	while (!queue.empty()) {
		int v = queue.front();
		queue.pop_front();
		for (const Neighbor& nb : adj_[v]) {
			if (dist[nb.vertex] < 0) {
				dist[nb.vertex] = dist[v] + 1;
				queue.push_back(nb.vertex);
			}
		}
	}
	return dist;
}

DistanceMatrix Graph::shortest_path_matrix() const {
	if (!connected()) throw DisconnectedGraph("distance matrix requires a connected graph");
	std::vector<int> d(static_cast<std::size_t>(n_) * n_, 0);
	for (int s = 0; s < n_; ++s) {
		std::vector<int> row = distances_from(s);
		std::copy(row.begin(), row.end(), d.begin() + static_cast<std::size_t>(s) * n_);
	}
	return DistanceMatrix(n_, std::move(d));
}

int Graph::diameter() const { return shortest_path_matrix().max(); }

}  // namespace tsl
