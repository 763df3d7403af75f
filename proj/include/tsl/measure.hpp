#pragma once

#include <span>
#include <string>
#include <vector>

namespace tsl {

/**
 * Nonnegative mass distribution over the vertices of a graph.  Entries within
 * `tolerance` below zero are clamped to zero; anything more negative is
 * rejected.  Masses are plain doubles, no normalization is implied.
 */
class Measure {
public:
	Measure() = default;
	explicit Measure(std::vector<double> x, double tolerance = 1e-12);

	static Measure zero(int n);
	static Measure delta(int n, int vertex, double mass = 1.0);
	static Measure uniform(int n, double total = 1.0);

	int size() const { return static_cast<int>(x_.size()); }
	double operator[](int i) const { return x_[i]; }
	const std::vector<double>& values() const { return x_; }
	std::span<const double> span() const { return {x_.data(), x_.size()}; }

	/** Total mass (== l1 norm, entries are nonnegative). */
	double total() const;

	/** Optional display names, one per vertex; empty when unused. */
	std::vector<std::string> labels;

private:
	std::vector<double> x_;
};

/** l1 distance between two equally sized measures. */
double l1_distance(const Measure& a, const Measure& b);

}  // namespace tsl
