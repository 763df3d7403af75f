#include "tsl/numerics.hpp"

#include <algorithm>
#include <cmath>

#include "tsl/errors.hpp"
#include "tsl/kernels.hpp"

namespace tsl {

std::vector<double> TimeSeries::channel(int c) const {
	std::vector<double> out;
	out.reserve(times.size());
	for (const auto& row : values) out.push_back(row.at(c));
	return out;
}

double trapezoid(std::span<const double> t, std::span<const double> v) {
	if (t.size() != v.size()) throw LengthMismatch("time and value grids differ in size");
	if (t.size() < 2) throw TooFewSamples("trapezoid needs at least two samples");
	double s = 0.0;
	for (std::size_t k = 0; k + 1 < t.size(); ++k) {
		const double h = t[k + 1] - t[k];
		if (h <= 0.0) throw Error("time grid must be strictly increasing");
		s += 0.5 * h * (v[k] + v[k + 1]);
	}
	return s;
}

double trapezoid(const TimeSeries& series, int channel) {
	std::vector<double> v = series.channel(channel);
	return trapezoid(series.times, v);
}

double time_average(std::span<const double> t, std::span<const double> v) {
	const double integral = trapezoid(t, v);
	return integral / (t.back() - t.front());
}

double time_average(const TimeSeries& series, int channel) {
	std::vector<double> v = series.channel(channel);
	return time_average(series.times, v);
}

void Rk4Workspace::resize(std::size_t n) {
	k1.resize(n);
	k2.resize(n);
	k3.resize(n);
	k4.resize(n);
	ytmp.resize(n);
}

void rk4_step(const OdeRhs& rhs, double t, double h, std::span<double> y, Rk4Workspace& w) {
	const std::size_t n = y.size();
	w.resize(n);
	auto stage = [&](const std::vector<double>& k, double frac, std::vector<double>& out) {
		std::copy(y.begin(), y.end(), out.begin());
		kernels::axpy(n, frac * h, k.data(), out.data());
	};
	rhs(t, y, w.k1);
	stage(w.k1, 0.5, w.ytmp);
	rhs(t + 0.5 * h, w.ytmp, w.k2);
	stage(w.k2, 0.5, w.ytmp);
	rhs(t + 0.5 * h, w.ytmp, w.k3);
	stage(w.k3, 1.0, w.ytmp);
	rhs(t + h, w.ytmp, w.k4);
	kernels::axpy(n, h / 6.0, w.k1.data(), y.data());
	kernels::axpy(n, h / 3.0, w.k2.data(), y.data());
	kernels::axpy(n, h / 3.0, w.k3.data(), y.data());
	kernels::axpy(n, h / 6.0, w.k4.data(), y.data());
}

TimeSeries rk4_integrate(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
						 int steps) {
	if (steps < 1) throw Error("rk4_integrate needs at least one step");
	if (!(t1 > t0)) throw Error("rk4_integrate needs t1 > t0");
	TimeSeries out;
	out.times.reserve(steps + 1);
	out.values.reserve(steps + 1);

	std::vector<double> y(y0.begin(), y0.end());
	Rk4Workspace w;
	const double h = (t1 - t0) / steps;

	auto record = [&](double t) {
		for (double v : y)
			if (!std::isfinite(v)) throw NonFiniteState("integrator state is not finite");
		out.times.push_back(t);
		out.values.push_back(y);
	};

	record(t0);
	for (int k = 0; k < steps; ++k) {
		const double t = t0 + k * h;
		rk4_step(rhs, t, h, y, w);
		record(k + 1 == steps ? t1 : t + h);
	}
	return out;
}

double log_mean(double x, double y) {
	if (!(x > 0.0) || !(y > 0.0)) throw ZeroFlux("logarithmic mean needs positive arguments");
	if (std::abs(x - y) <= 1e-9 * (x + y)) return 0.5 * (x + y);
	return (x - y) / std::log(x / y);
}

double safe_log_ratio(double x, double y) {
	if (!(x > 0.0) || !(y > 0.0)) throw ZeroFlux("log ratio needs positive arguments");
	return std::log(x / y);
}

double safe_log(double x) { return std::log(std::max(x, 1e-300)); }

}  // namespace tsl
