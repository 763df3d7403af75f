#include "tsl/measure.hpp"

#include <cmath>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

Measure::Measure(std::vector<double> x, double tolerance) : x_(std::move(x)) {
	for (double& v : x_) {
		if (!std::isfinite(v)) throw InvalidMeasure("measure entry is not finite");
		if (v < -tolerance) throw InvalidMeasure("measure entry is negative");
		if (v < 0.0) v = 0.0;
	}
}

Measure Measure::zero(int n) { return Measure(std::vector<double>(n, 0.0)); }

Measure Measure::delta(int n, int vertex, double mass) {
	if (vertex < 0 || vertex >= n) throw InvalidMeasure("delta vertex out of range");
	std::vector<double> x(n, 0.0);
	x[vertex] = mass;
	return Measure(std::move(x));
}

Measure Measure::uniform(int n, double total) {
	if (n <= 0) throw InvalidMeasure("uniform measure needs at least one vertex");
	return Measure(std::vector<double>(n, total / n));
}

double Measure::total() const {
	double s = 0.0;
	for (double v : x_) s += v;
	return s;
}

double l1_distance(const Measure& a, const Measure& b) {
	if (a.size() != b.size()) throw LengthMismatch("measures have different sizes");
	return kernels::sum_abs_diff(a.values().size(), a.values().data(), b.values().data());
}

}  // namespace tsl
