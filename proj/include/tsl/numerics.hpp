#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tsl {

/** Sampled multi-channel signal on a strictly increasing time grid. */
struct TimeSeries {
	std::vector<double> times;
	std::vector<std::vector<double>> values;  // values[k] = all channels at times[k]
	std::vector<std::string> names;           // optional channel names

	int sample_count() const { return static_cast<int>(times.size()); }
	int channel_count() const { return times.empty() ? 0 : static_cast<int>(values.front().size()); }

	/** Single channel as a contiguous vector. */
	std::vector<double> channel(int c) const;
};

/** Composite trapezoid integral of samples v on grid t.  Needs >= 2 samples. */
double trapezoid(std::span<const double> t, std::span<const double> v);
double trapezoid(const TimeSeries& series, int channel = 0);

/** Trapezoid integral divided by the window length t.back() - t.front(). */
double time_average(std::span<const double> t, std::span<const double> v);
double time_average(const TimeSeries& series, int channel = 0);

/** Right-hand side callback: fills dy with d/dt y at (t, y). */
using OdeRhs = std::function<void(double t, std::span<const double> y, std::span<double> dy)>;

/**
 * Classic fixed-step fourth-order Runge-Kutta over [t0, t1] with `steps`
 * uniform steps.  Records the state at every grid point (steps+1 samples).
 * Throws NonFiniteState when a recorded state stops being finite.
 */
TimeSeries rk4_integrate(const OdeRhs& rhs, std::span<const double> y0, double t0, double t1,
						 int steps);

/** Scratch buffers for in-place RK4 stepping. */
struct Rk4Workspace {
	std::vector<double> k1, k2, k3, k4, ytmp;
	void resize(std::size_t n);
};

/** Advance y in place by one RK4 step of size h starting at time t. */
void rk4_step(const OdeRhs& rhs, double t, double h, std::span<double> y, Rk4Workspace& w);

/**
 * Logarithmic mean (x - y) / log(x / y) for x, y > 0, with the removable
 * singularity handled by a midpoint fallback when |x - y| <= 1e-9 (x + y).
 */
double log_mean(double x, double y);

/** log(x / y) for positive x, y; throws ZeroFlux when either is not positive. */
double safe_log_ratio(double x, double y);

/** Natural log with the argument clamped to at least 1e-300. */
double safe_log(double x);

}  // namespace tsl
