#include "scenario.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tsl/crn.hpp"
#include "tsl/errors.hpp"
#include "tsl/flow.hpp"
#include "tsl/graph.hpp"
#include "tsl/io.hpp"
#include "tsl/measure.hpp"
#include "tsl/quantum.hpp"
#include "tsl/transport.hpp"

namespace tsl::cli {

namespace {

using njson = nlohmann::ordered_json;

std::string fmt(double v) {
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.17g", v);
	return buf;
}

njson json_number(double v) {
	if (std::isfinite(v)) return v;
	if (std::isnan(v)) return "nan";
	return v > 0 ? "inf" : "-inf";
}

njson json_lambda(const Lambda& lambda) {
	return lambda.is_infinite() ? njson("inf") : json_number(lambda.value());
}

std::string resolve_path(const std::string& base, const std::string& path) {
	if (path.empty() || path.front() == '/') return path;
	if (base.empty() || base == ".") return path;
	return base + "/" + path;
}

// ---------------------------------------------------------------------------
// Config reading: typed accessors plus unknown-key rejection
// ---------------------------------------------------------------------------

/**
 * One object of the config document.  Accessors mark keys as consumed;
 * finish() rejects anything left over, naming the offending key.  A null
 * object behaves as empty (all defaults, required keys missing).
 */
class Section {
public:
	Section(const njson* obj, std::string name) : obj_(obj), name_(std::move(name)) {
		if (obj_ && !obj_->is_object())
			throw ConfigError("'" + name_ + "' must be an object");
	}

	const std::string& name() const { return name_; }
	std::string qualify(const std::string& key) const { return name_ + "." + key; }
	bool has(const std::string& key) const { return obj_ && obj_->contains(key); }

	const njson& get(const std::string& key) {
		seen_.insert(key);
		return obj_->at(key);
	}

	double require_number(const std::string& key) {
		if (!has(key)) throw ConfigError("missing key '" + qualify(key) + "'");
		const njson& v = get(key);
		if (!v.is_number()) throw ConfigError("'" + qualify(key) + "' must be a number");
		return v.get<double>();
	}
	double number(const std::string& key, double def) {
		return has(key) ? require_number(key) : def;
	}

	int require_integer(const std::string& key) {
		if (!has(key)) throw ConfigError("missing key '" + qualify(key) + "'");
		const njson& v = get(key);
		if (!v.is_number_integer()) throw ConfigError("'" + qualify(key) + "' must be an integer");
		return v.get<int>();
	}
	int integer(const std::string& key, int def) {
		return has(key) ? require_integer(key) : def;
	}

	std::string require_text(const std::string& key) {
		if (!has(key)) throw ConfigError("missing key '" + qualify(key) + "'");
		const njson& v = get(key);
		if (!v.is_string()) throw ConfigError("'" + qualify(key) + "' must be a string");
		return v.get<std::string>();
	}
	std::string text(const std::string& key, const std::string& def) {
		return has(key) ? require_text(key) : def;
	}

	bool flag(const std::string& key, bool def) {
		if (!has(key)) return def;
		const njson& v = get(key);
		if (!v.is_boolean()) throw ConfigError("'" + qualify(key) + "' must be true or false");
		return v.get<bool>();
	}

	/** Array of numbers; a bare number promotes to a one-element list. */
	std::vector<double> number_list(const std::string& key) {
		const njson& v = get(key);
		std::vector<double> out;
		if (v.is_number()) {
			out.push_back(v.get<double>());
			return out;
		}
		if (!v.is_array()) throw ConfigError("'" + qualify(key) + "' must be a number list");
		for (const njson& item : v) {
			if (!item.is_number())
				throw ConfigError("'" + qualify(key) + "' must contain only numbers");
			out.push_back(item.get<double>());
		}
		return out;
	}

	std::vector<std::string> text_list(const std::string& key) {
		const njson& v = get(key);
		std::vector<std::string> out;
		if (v.is_string()) {
			out.push_back(v.get<std::string>());
			return out;
		}
		if (!v.is_array()) throw ConfigError("'" + qualify(key) + "' must be a string list");
		for (const njson& item : v) {
			if (!item.is_string())
				throw ConfigError("'" + qualify(key) + "' must contain only strings");
			out.push_back(item.get<std::string>());
		}
		return out;
	}

	/** Weights: a number, or the string "inf". */
	std::vector<Lambda> lambda_list(const std::string& key) {
		const njson& v = get(key);
		std::vector<Lambda> out;
		const auto one = [this, &key](const njson& item) {
			if (item.is_number()) return Lambda::finite(item.get<double>());
			if (item.is_string() && item.get<std::string>() == "inf") return Lambda::infinite();
			throw ConfigError("'" + qualify(key) + "' entries must be positive numbers or \"inf\"");
		};
		if (v.is_array())
			for (const njson& item : v) out.push_back(one(item));
		else
			out.push_back(one(v));
		return out;
	}

	void finish() {
		if (!obj_) return;
		for (const auto& item : obj_->items())
			if (!seen_.count(item.key()))
				throw ConfigError("unknown key '" + qualify(item.key()) + "'");
	}

private:
	const njson* obj_;
	std::string name_;
	std::set<std::string> seen_;
};

struct GridSpec {
	int steps = 0;  // 0 = kind default
	std::vector<double> taus;
	std::vector<Lambda> lambdas;
};

GridSpec read_grid(Section& top) {
	GridSpec g;
	if (!top.has("grid")) return g;
	Section sec(&top.get("grid"), top.qualify("grid"));
	if (sec.has("steps")) {
		g.steps = sec.require_integer("steps");
		if (g.steps < 1) throw ConfigError("'" + sec.qualify("steps") + "' must be >= 1");
	}
	if (sec.has("tau")) {
		g.taus = sec.number_list("tau");
		for (const double t : g.taus)
			if (!(t > 0.0)) throw ConfigError("'" + sec.qualify("tau") + "' must be positive");
	}
	if (sec.has("lambda")) g.lambdas = sec.lambda_list("lambda");
	sec.finish();
	return g;
}

struct ScenarioContext {
	std::string base_dir;
	std::string out_dir;
	bool has_out = false;
	std::uint64_t seed = 1;
	GridSpec grid;
};

/** "csv:" measure descriptions carry paths that resolve against base_dir. */
std::string resolve_measure_spec(const std::string& spec, const ScenarioContext& ctx) {
	if (spec.rfind("csv:", 0) == 0) return "csv:" + resolve_path(ctx.base_dir, spec.substr(4));
	return spec;
}

Graph parse_graph_spec(const std::string& spec, const std::string& base_dir) {
	const auto builtin = [&spec](const char* prefix) -> int {
		const std::string p = std::string(prefix) + ":";
		if (spec.rfind(p, 0) != 0) return -1;
		const int n = std::atoi(spec.c_str() + p.size());
		if (n < 1) throw ConfigError("bad vertex count in graph '" + spec + "'");
		return n;
	};
	if (int n = builtin("chain"); n > 0) return Graph::chain(n);
	if (int n = builtin("cycle"); n > 0) return Graph::cycle(n);
	if (int n = builtin("complete"); n > 0) return Graph::complete(n);
	if (int n = builtin("star"); n > 0) return Graph::star(n);
	return Graph::from_file(resolve_path(base_dir, spec));
}

// ---------------------------------------------------------------------------
// Artifact emission
// ---------------------------------------------------------------------------

struct Artifacts {
	std::string trajectory;  // empty = no trajectory.csv
	std::string bounds;      // empty = no bounds.json
	std::string summary;     // always written
};

void emit(const std::string& out_dir, const Artifacts& art) {
	std::error_code ec;
	std::filesystem::create_directories(out_dir, ec);
	if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());
	if (!art.trajectory.empty()) write_text_file(out_dir + "/trajectory.csv", art.trajectory);
	if (!art.bounds.empty()) write_text_file(out_dir + "/bounds.json", art.bounds);
	write_text_file(out_dir + "/summary.txt", art.summary);
}

/**
 * Re-check a master bound before it is emitted; throws InvariantViolation.
 * The sampled velocity integral carries an O(h^2) trapezoid error, so the
 * allowed overshoot shrinks quadratically with the step count.
 */
void revalidate_report(const BoundReport& r, int steps) {
	const double slack =
		std::max(1e-6, 2.0 / (static_cast<double>(steps) * static_cast<double>(steps)));
	if (r.tau_bound > r.tau * (1.0 + slack))
		throw InvariantViolation("emitted bound " + fmt(r.tau_bound) + " exceeds the duration " +
								 fmt(r.tau) + " at lambda=" + r.lambda.str());
}

std::string report_line(const BoundReport& r) {
	return "lambda=" + r.lambda.str() + "  distance=" + fmt(r.distance) + "  avg_velocity=" +
		   fmt(r.avg_velocity) + "  tau_bound=" + fmt(r.tau_bound) + "  saturation=" +
		   fmt(r.saturation_ratio) + "\n";
}

std::string quantum_housekeeping(const QuantumTrajectory& run) {
	std::string s;
	s += "trace_drift=" + fmt(run.report.max_trace_drift) + "  min_eigenvalue=" +
		 fmt(run.report.min_eigenvalue) + "\n";
	if (run.report.truncation_flag)
		s += "warning: truncation monitor saw population " + fmt(run.report.max_truncation) +
			 " in the top Fock level; raise n_max\n";
	return s;
}

// ---------------------------------------------------------------------------
// Kind runners
// ---------------------------------------------------------------------------

void run_transport(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const Graph g = parse_graph_spec(params.require_text("graph"), ctx.base_dir);
	const Measure a =
		parse_measure(resolve_measure_spec(params.require_text("a"), ctx), g.vertex_count());
	const Measure b =
		parse_measure(resolve_measure_spec(params.require_text("b"), ctx), g.vertex_count());
	const bool per_component = params.flag("per_component", false);
	params.finish();
	const ComponentPolicy policy =
		per_component ? ComponentPolicy::per_component : ComponentPolicy::require_connected;

	std::vector<Lambda> lambdas = ctx.grid.lambdas;
	if (lambdas.empty()) lambdas.push_back(Lambda::infinite());

	njson arr = njson::array();
	std::string summary = "transport distances\n";
	summary += "graph: " + std::to_string(g.vertex_count()) + " vertices, " +
			   std::to_string(g.edge_count()) + " edges\n";
	bool first = true;
	for (const Lambda& lambda : lambdas) {
		const double value = lambda.is_infinite()
								 ? wasserstein1(g, a, b, policy).value
								 : generalized_wasserstein(g, a, b, lambda.value(), policy).value;
		njson entry;
		entry["lambda"] = json_lambda(lambda);
		entry["value"] = json_number(value);
		arr.push_back(std::move(entry));
		summary += "lambda=" + lambda.str() + "  value=" + fmt(value) + "\n";
		if (first) out.output += fmt(value) + "\n";
		first = false;
	}

	if (ctx.has_out) {
		njson doc;
		doc["distances"] = std::move(arr);
		emit(ctx.out_dir, Artifacts{"", doc.dump(2) + "\n", summary});
	}
}

std::vector<double> default_crn_ramp(int species) {
	std::vector<double> x(static_cast<std::size_t>(species));
	for (int i = 0; i < species; ++i)
		x[static_cast<std::size_t>(i)] =
			species > 1 ? 1.0 - 0.9 * i / (species - 1) : 1.0;
	return x;
}

void run_crn(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const std::string builtin = params.text("builtin", "");
	const std::string file = params.text("file", "");
	if (builtin.empty() == file.empty())
		throw ConfigError("exactly one of '" + params.qualify("builtin") + "' and '" +
						  params.qualify("file") + "' must be given");

	ReactionNetwork net = [&]() -> ReactionNetwork {
		if (!builtin.empty()) {
			if (builtin != "cascade")
				throw ConfigError("unknown value '" + builtin + "' for '" +
								  params.qualify("builtin") + "' (supported: cascade)");
			const int n = params.integer("n", 10);
			const double kf = params.number("kf", 2.0);
			const double kb = params.number("kb", 1.0);
			return ReactionNetwork::cascade(n, kf, kb);
		}
		return ReactionNetwork::from_file(resolve_path(ctx.base_dir, file));
	}();

	const std::string x0_spec = params.text("x0", "");
	params.finish();
	const Measure x0 = x0_spec.empty()
						   ? Measure(default_crn_ramp(net.species_count()))
						   : parse_measure(resolve_measure_spec(x0_spec, ctx), net.species_count());

	if (ctx.grid.taus.empty())
		throw ConfigError("crn scenarios need 'scenario.grid.tau' (a list of horizons)");
	std::vector<Lambda> lambdas = ctx.grid.lambdas;
	if (lambdas.empty()) lambdas.push_back(Lambda::finite(0.5));
	const int steps = ctx.grid.steps > 0 ? ctx.grid.steps : 2000;

	std::string summary = "reaction-network bound hierarchy\n";
	summary += "species=" + std::to_string(net.species_count()) + "  channels=" +
			   std::to_string(static_cast<int>(net.channels().size())) + "  conservative=" +
			   (net.conservative() ? "yes" : "no") + "  steps=" + std::to_string(steps) + "\n";

	std::vector<CrnBounds> sweep;
	for (const Lambda& lambda : lambdas) {
		for (const double tau : ctx.grid.taus) {
			CrnBounds b = crn_bounds(net, x0, tau, lambda, steps);
			// Re-validate the hierarchy before emitting it.
			if (b.tau1 > b.tau * (1.0 + 1e-6) + 1e-9 || b.tau2 > b.tau1 + 1e-9 ||
				(b.sigma_finite && b.tau3 > b.tau2_half + 1e-9))
				throw InvariantViolation("emitted hierarchy violated at tau=" + fmt(tau) +
										 " lambda=" + lambda.str());
			summary += "tau=" + fmt(b.tau) + "  lambda=" + lambda.str() + "  tau1=" +
					   fmt(b.tau1) + "  tau2=" + fmt(b.tau2) + "  tau3=" + fmt(b.tau3) +
					   "  saturation=" + fmt(b.tau > 0 ? b.tau1 / b.tau : 0.0) + "\n";
			sweep.push_back(std::move(b));
		}
	}

	const double tau_max = *std::max_element(ctx.grid.taus.begin(), ctx.grid.taus.end());
	const TransportGraphData tgd = build_transport_graph(net);
	const FlowTrajectory traj = simulate(net, tgd, x0, tau_max, steps);

	emit(ctx.out_dir, Artifacts{trajectory_csv(traj), crn_sweep_json_text(sweep), summary});
	out.output += summary;
}

void run_boson(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const int sites = params.require_integer("sites");
	if (sites < 1) throw ConfigError("'" + params.qualify("sites") + "' must be >= 1");
	const int n_max = params.integer("n_max", 1);
	const double gamma = params.number("gamma", 1.0);
	const double u = params.number("u", 0.0);
	const double mu = params.number("mu", 0.0);

	const auto site_rates = [&params, sites](const std::string& key) {
		std::vector<double> r(static_cast<std::size_t>(sites), 0.0);
		if (!params.has(key)) return r;
		r = params.number_list(key);
		if (static_cast<int>(r.size()) == 1) r.assign(static_cast<std::size_t>(sites), r[0]);
		if (static_cast<int>(r.size()) != sites)
			throw ConfigError("'" + params.qualify(key) + "' must list one rate per site");
		return r;
	};
	const std::vector<double> absorb = site_rates("absorb");
	const std::vector<double> emit_rates = site_rates("emit");

	const std::string graph_spec = params.text("graph", "chain:" + std::to_string(sites));
	const Graph g = parse_graph_spec(graph_spec, ctx.base_dir);
	if (g.vertex_count() != sites)
		throw ConfigError("'" + params.qualify("graph") + "' has " +
						  std::to_string(g.vertex_count()) + " vertices but '" +
						  params.qualify("sites") + "' is " + std::to_string(sites));

	const std::string x0_spec = params.text("x0", "");
	params.finish();

	const QuantumModel model = boson_lattice_model(g, gamma, u, mu, absorb, emit_rates, n_max);
	const int local = n_max + 1;

	DensityMatrix rho0 = [&]() -> DensityMatrix {
		if (x0_spec == "mixed") return DensityMatrix::maximally_mixed(model.dim);
		std::vector<int> counts(static_cast<std::size_t>(sites), 0);
		counts[0] = 1;
		if (!x0_spec.empty()) {
			if (x0_spec.rfind("fock:", 0) != 0)
				throw ConfigError("'" + params.qualify("x0") +
								  "' must be \"mixed\" or \"fock:<n per site>\"");
			std::vector<double> vals;
			std::string tok;
			for (const char c : x0_spec.substr(5) + ",") {
				if (c == ',') {
					if (!tok.empty()) vals.push_back(std::atof(tok.c_str()));
					tok.clear();
				} else {
					tok.push_back(c);
				}
			}
			if (static_cast<int>(vals.size()) != sites)
				throw ConfigError("'" + params.qualify("x0") + "' must list one count per site");
			for (int i = 0; i < sites; ++i) {
				const int c = static_cast<int>(vals[static_cast<std::size_t>(i)]);
				if (c < 0 || c > n_max)
					throw ConfigError("'" + params.qualify("x0") + "' counts must lie in 0.." +
									  std::to_string(n_max));
				counts[static_cast<std::size_t>(i)] = c;
			}
		}
		long long index = 0;
		for (int i = 0; i < sites; ++i) index = index * local + counts[static_cast<std::size_t>(i)];
		std::vector<cplx> psi(static_cast<std::size_t>(model.dim));
		psi[static_cast<std::size_t>(index)] = 1.0;
		return DensityMatrix::pure(psi);
	}();

	const double tau = ctx.grid.taus.empty() ? 1.0 : ctx.grid.taus.front();
	const int steps = ctx.grid.steps > 0 ? ctx.grid.steps : 800;
	std::vector<Lambda> lambdas = ctx.grid.lambdas;
	if (lambdas.empty()) lambdas.push_back(Lambda::finite(1.0));

	const QuantumTrajectory run = boson_trajectory(model, rho0, tau, steps);

	std::vector<BoundReport> reports;
	std::string summary = "boson lattice run\n";
	summary += "sites=" + std::to_string(sites) + "  n_max=" + std::to_string(n_max) +
			   "  gamma=" + fmt(gamma) + "  tau=" + fmt(tau) + "  steps=" +
			   std::to_string(steps) + "\n";
	for (const Lambda& lambda : lambdas) {
		BoundReport r = speed_limit_report(run.trajectory, lambda);
		revalidate_report(r, steps);
		summary += report_line(r);
		reports.push_back(std::move(r));
	}
	double max_sigma = 0.0, max_activity = 0.0;
	for (const QuantumFlowSnapshot& s : run.snapshots) {
		max_sigma = std::max(max_sigma, s.sigma_t);
		max_activity = std::max(max_activity, s.a_t);
	}
	summary += "max_sigma=" + fmt(max_sigma) + "  max_activity=" + fmt(max_activity) + "\n";
	summary += quantum_housekeeping(run);

	emit(ctx.out_dir, Artifacts{trajectory_csv(run.trajectory),
								bound_reports_json_text(reports), summary});
	out.output += summary;
}

void run_spin(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const int sites = params.require_integer("sites");
	const double gamma = params.number("gamma", 1.0);
	const int x0_site = params.integer("x0_site", 1);
	if (x0_site < 1 || x0_site > sites)
		throw ConfigError("'" + params.qualify("x0_site") + "' must lie in 1.." +
						  std::to_string(sites));

	const double tau =
		ctx.grid.taus.empty() ? (sites - 1) / (2.0 * gamma) : ctx.grid.taus.front();

	std::function<double(double, int)> field;
	bool has_field = false;
	if (params.has("field")) {
		Section fsec(&params.get("field"), params.qualify("field"));
		const double amplitude = fsec.require_number("amplitude");
		const int segments = fsec.require_integer("segments");
		if (segments < 1) throw ConfigError("'" + fsec.qualify("segments") + "' must be >= 1");
		fsec.finish();
		std::mt19937_64 rng(ctx.seed);
		std::uniform_real_distribution<double> dist(-amplitude, amplitude);
		std::vector<std::vector<double>> values(static_cast<std::size_t>(segments));
		for (auto& row : values) {
			row.resize(static_cast<std::size_t>(sites));
			for (double& v : row) v = dist(rng);
		}
		const double seg_len = tau / segments;
		field = [values, seg_len, segments](double t, int site) {
			int seg = static_cast<int>(t / seg_len);
			seg = std::clamp(seg, 0, segments - 1);
			return values[static_cast<std::size_t>(seg)][static_cast<std::size_t>(site)];
		};
		has_field = true;
	}
	params.finish();
	const int steps = ctx.grid.steps > 0 ? ctx.grid.steps : (has_field ? 600 * sites : 800);

	const QuantumModel model = spin_chain_model(sites, gamma, field);
	std::vector<cplx> psi(static_cast<std::size_t>(model.dim));
	const long long all_down = (1LL << sites) - 1;
	psi[static_cast<std::size_t>(all_down & ~(1LL << (sites - x0_site)))] = 1.0;

	EvolutionOptions opts;
	// Discontinuous drives cost the integrator an O(h^2) eigenvalue defect at
	// each segment boundary; budget for it.
	if (has_field) opts.positivity_tol = 1e-5;
	const QuantumTrajectory run = spin_trajectory(model, DensityMatrix::pure(psi), tau, steps, opts);

	std::vector<Lambda> lambdas = ctx.grid.lambdas;
	if (lambdas.empty()) lambdas.push_back(Lambda::infinite());

	std::vector<BoundReport> reports;
	std::string summary = "spin chain run\n";
	summary += "sites=" + std::to_string(sites) + "  gamma=" + fmt(gamma) + "  x0_site=" +
			   std::to_string(x0_site) + "  tau=" + fmt(tau) + "  steps=" +
			   std::to_string(steps) + (has_field ? "  field=piecewise" : "  field=none") + "\n";
	for (const Lambda& lambda : lambdas) {
		BoundReport r = speed_limit_report(run.trajectory, lambda);
		revalidate_report(r, steps);
		summary += report_line(r);
		reports.push_back(std::move(r));
	}

	const double m0 = run.trajectory.measures.front().total();
	double drift = 0.0;
	for (const Measure& m : run.trajectory.measures)
		drift = std::max(drift, std::abs(m.total() - m0));
	if (drift > 1e-8)
		throw InvariantViolation("magnetization drifted by " + fmt(drift) + " during the run");
	summary += "magnetization=" + fmt(m0) + "  drift=" + fmt(drift) + "\n";
	summary += quantum_housekeeping(run);

	emit(ctx.out_dir, Artifacts{trajectory_csv(run.trajectory),
								bound_reports_json_text(reports), summary});
	out.output += summary;
}

void run_qwalk(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const int sites = params.require_integer("sites");
	const int segments = params.require_integer("segments");
	const double dt = params.number("dt", 0.5);
	const int x0_site = params.integer("x0_site", 1);
	if (x0_site < 1 || x0_site > std::max(1, sites))
		throw ConfigError("'" + params.qualify("x0_site") + "' must lie in 1.." +
						  std::to_string(std::max(1, sites)));

	std::vector<double> couplings;
	if (params.has("couplings")) {
		couplings = params.number_list("couplings");
	} else {
		const double c = params.number("coupling", 1.0);
		couplings.assign(static_cast<std::size_t>(std::max(0, sites - 1)), c);
	}
	params.finish();
	const int steps = ctx.grid.steps > 0 ? ctx.grid.steps : 32;

	const WalkResult walk =
		measured_walk_simulate(sites, couplings, dt, segments, x0_site - 1, steps);
	revalidate_report(walk.report, std::max(1, segments) * steps);
	if (walk.fluctuation_bound > walk.report.tau_bound + 1e-9)
		throw InvariantViolation("fluctuation bound exceeds the transport bound");

	njson rep = njson::parse(bound_report_json_text(walk.report));
	njson doc;
	doc["report"] = std::move(rep);
	doc["avg_fluctuation"] = json_number(walk.avg_fluctuation);
	doc["fluctuation_bound"] = json_number(walk.fluctuation_bound);

	std::string summary = "measured walk run\n";
	summary += "sites=" + std::to_string(sites) + "  segments=" + std::to_string(segments) +
			   "  dt=" + fmt(dt) + "  x0_site=" + std::to_string(x0_site) + "\n";
	summary += report_line(walk.report);
	summary += "avg_fluctuation=" + fmt(walk.avg_fluctuation) + "  fluctuation_bound=" +
			   fmt(walk.fluctuation_bound) + "\n";

	emit(ctx.out_dir,
		 Artifacts{trajectory_csv(walk.trajectory), doc.dump(2) + "\n", summary});
	out.output += summary;
}

void run_open(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const std::vector<double> energies = params.number_list("energies");
	const int levels = static_cast<int>(energies.size());
	if (levels < 2) throw ConfigError("'" + params.qualify("energies") + "' needs >= 2 levels");
	for (int i = 1; i < levels; ++i)
		if (!(energies[static_cast<std::size_t>(i)] > energies[static_cast<std::size_t>(i - 1)]))
			throw ConfigError("'" + params.qualify("energies") + "' must be strictly ascending");

	if (!params.has("transitions"))
		throw ConfigError("missing key '" + params.qualify("transitions") + "'");
	const njson& tl = params.get("transitions");
	if (!tl.is_array() || tl.empty())
		throw ConfigError("'" + params.qualify("transitions") + "' must be a non-empty list");

	std::vector<JumpOperator> jumps;
	for (std::size_t i = 0; i < tl.size(); ++i) {
		Section tsec(&tl[i], params.qualify("transitions[" + std::to_string(i) + "]"));
		const int lower = tsec.require_integer("lower");
		const int upper = tsec.require_integer("upper");
		const double rate = tsec.require_number("rate");
		const double entropy = tsec.number("entropy", 0.0);
		tsec.finish();
		if (lower < 1 || upper > levels || lower >= upper)
			throw ConfigError("'" + tsec.name() + "' needs 1 <= lower < upper <= " +
							  std::to_string(levels));
		if (!(rate > 0.0)) throw ConfigError("'" + tsec.qualify("rate") + "' must be positive");
		ComplexMatrix down(levels), up(levels);
		down(lower - 1, upper - 1) = std::sqrt(rate);
		up(upper - 1, lower - 1) = std::sqrt(rate) * std::exp(-entropy / 2.0);
		const int base = static_cast<int>(jumps.size());
		jumps.push_back(JumpOperator{std::move(down), -1, -1, entropy, base + 1});
		jumps.push_back(JumpOperator{std::move(up), -1, +1, -entropy, base});
	}

	HamiltonianFn drive;
	double drive_amp = 0.0, drive_freq = 0.0;
	if (params.has("drive")) {
		Section dsec(&params.get("drive"), params.qualify("drive"));
		drive_amp = dsec.require_number("amplitude");
		drive_freq = dsec.number("frequency", 1.0);
		dsec.finish();
		ComplexMatrix coupling(levels);
		for (int n = 0; n + 1 < levels; ++n) {
			coupling(n, n + 1) = 1.0;
			coupling(n + 1, n) = 1.0;
		}
		drive = [coupling, drive_amp, drive_freq](double t) {
			return cplx(drive_amp * std::cos(drive_freq * t)) * coupling;
		};
	}

	const std::string x0_spec = params.text("x0", "mixed");
	const bool per_component = params.flag("per_component", false);
	params.finish();

	const OpenSystemModel model =
		open_system_model(ComplexMatrix::diagonal(energies), std::move(jumps));

	DensityMatrix rho0 = [&]() -> DensityMatrix {
		if (x0_spec == "mixed") return DensityMatrix::maximally_mixed(levels);
		if (x0_spec.rfind("level:", 0) == 0) {
			const int level = std::atoi(x0_spec.c_str() + 6);
			if (level < 1 || level > levels)
				throw ConfigError("'" + params.qualify("x0") + "' level must lie in 1.." +
								  std::to_string(levels));
			std::vector<cplx> psi(static_cast<std::size_t>(levels));
			psi[static_cast<std::size_t>(level - 1)] = 1.0;
			return DensityMatrix::pure(psi);
		}
		throw ConfigError("'" + params.qualify("x0") + "' must be \"mixed\" or \"level:<k>\"");
	}();

	const double tau = ctx.grid.taus.empty() ? 1.0 : ctx.grid.taus.front();
	const int steps = ctx.grid.steps > 0 ? ctx.grid.steps : 800;
	std::vector<Lambda> lambdas = ctx.grid.lambdas;
	if (lambdas.empty()) lambdas.push_back(Lambda::finite(1.0));
	const ComponentPolicy policy =
		per_component ? ComponentPolicy::per_component : ComponentPolicy::require_connected;

	const QuantumTrajectory run = open_trajectory(model, drive, rho0, tau, steps);

	for (const QuantumFlowSnapshot& s : run.snapshots)
		if (s.sigma_pop + s.sigma_env < -1e-9)
			throw InvariantViolation("entropy combination went negative: " +
									 fmt(s.sigma_pop + s.sigma_env));

	std::vector<BoundReport> reports;
	std::string summary = "open system run\n";
	summary += "levels=" + std::to_string(levels) + "  tau=" + fmt(tau) + "  steps=" +
			   std::to_string(steps);
	if (drive) summary += "  drive_amplitude=" + fmt(drive_amp) + "  drive_frequency=" +
						  fmt(drive_freq);
	summary += "\n";
	for (const Lambda& lambda : lambdas) {
		BoundReport r = speed_limit_report(run.trajectory, lambda, policy);
		revalidate_report(r, steps);
		summary += report_line(r);
		reports.push_back(std::move(r));
	}
	summary += quantum_housekeeping(run);

	emit(ctx.out_dir, Artifacts{trajectory_csv(run.trajectory),
								bound_reports_json_text(reports), summary});
	out.output += summary;
}

void run_verify(Section& params, const ScenarioContext& ctx, RunOutcome& out) {
	const bool quick = params.flag("quick", false);
	std::vector<std::string> filter;
	if (params.has("suites")) filter = params.text_list("suites");
	params.finish();

	const std::vector<SuiteResult> all = run_verification(quick, ctx.seed);
	for (const std::string& name : filter) {
		const bool known = std::any_of(all.begin(), all.end(),
									   [&name](const SuiteResult& s) { return s.name == name; });
		if (!known)
			throw ConfigError("unknown suite '" + name + "' in '" + params.qualify("suites") +
							  "'");
	}

	std::vector<const SuiteResult*> picked;
	for (const SuiteResult& s : all)
		if (filter.empty() ||
			std::find(filter.begin(), filter.end(), s.name) != filter.end())
			picked.push_back(&s);

	int passed = 0;
	std::string summary = "verification: " + std::to_string(picked.size()) + " suites\n";
	for (const SuiteResult* s : picked) {
		summary += std::string(s->pass ? "PASS" : "FAIL") + " " + s->name + " — " + s->detail +
				   "\n";
		out.output += std::string(s->pass ? "PASS" : "FAIL") + " " + s->name + " — " + s->detail +
					  "  [" + fmt(s->seconds) + "s]\n";
		if (s->pass) ++passed;
	}
	summary += std::to_string(passed) + "/" + std::to_string(picked.size()) + " passed\n";
	out.output += std::to_string(passed) + "/" + std::to_string(picked.size()) + " passed\n";

	if (ctx.has_out) emit(ctx.out_dir, Artifacts{"", "", summary});
	if (passed != static_cast<int>(picked.size())) out.code = kExitInvariant;
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

const std::set<std::string> kKinds{"transport", "crn", "boson", "spin",
								   "qwalk", "open", "verify"};

RunOutcome run_scenario_object(const njson& obj, const std::string& base_dir,
							   const std::string& label) {
	RunOutcome out;
	try {
		Section top(&obj, "scenario");
		const std::string kind = top.require_text("kind");
		if (!kKinds.count(kind))
			throw ConfigError("unknown value '" + kind + "' for 'scenario.kind'");

		ScenarioContext ctx;
		ctx.base_dir = base_dir;
		ctx.has_out = top.has("out");
		ctx.out_dir = resolve_path(base_dir, top.text("out", "."));
		if (top.has("seed")) {
			const njson& s = top.get("seed");
			if (!s.is_number_unsigned() && !s.is_number_integer())
				throw ConfigError("'scenario.seed' must be a non-negative integer");
			ctx.seed = s.get<std::uint64_t>();
		}
		ctx.grid = read_grid(top);

		const njson* pblock = top.has(kind) ? &top.get(kind) : nullptr;
		Section params(pblock, kind);
		top.finish();

		if (kind == "transport")
			run_transport(params, ctx, out);
		else if (kind == "crn")
			run_crn(params, ctx, out);
		else if (kind == "boson")
			run_boson(params, ctx, out);
		else if (kind == "spin")
			run_spin(params, ctx, out);
		else if (kind == "qwalk")
			run_qwalk(params, ctx, out);
		else if (kind == "open")
			run_open(params, ctx, out);
		else
			run_verify(params, ctx, out);
	} catch (const std::exception& e) {
		out.code = classify_error(e);
		const ScenarioError wrapped(label + ": " + e.what());
		out.error = std::string(wrapped.what()) + "\n";
	}
	return out;
}

}  // namespace

int classify_error(const std::exception& e) {
	if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
		dynamic_cast<const IoError*>(&e))
		return kExitConfig;
	if (dynamic_cast<const NonFiniteState*>(&e) || dynamic_cast<const NoConvergence*>(&e) ||
		dynamic_cast<const NegativeMassBlowup*>(&e) || dynamic_cast<const TooFewSamples*>(&e))
		return kExitNumeric;
	if (dynamic_cast<const Error*>(&e)) return kExitInvariant;
	return kExitNumeric;
}

RunOutcome run_config_text(const std::string& json_text, const std::string& base_dir) {
	njson doc;
	try {
		doc = njson::parse(json_text);
	} catch (const nlohmann::json::parse_error& e) {
		return RunOutcome{kExitConfig, "", std::string("config is not valid JSON: ") + e.what() +
											   "\n"};
	}
	if (!doc.is_object())
		return RunOutcome{kExitConfig, "", "config root must be a JSON object\n"};

	if (!doc.contains("scenarios")) return run_scenario_object(doc, base_dir, "scenario");

	RunOutcome combined;
	try {
		Section top(&doc, "config");
		const njson& list = top.get("scenarios");
		if (!list.is_array()) throw ConfigError("'config.scenarios' must be a list");
		int jobs = top.integer("jobs", static_cast<int>(std::thread::hardware_concurrency()));
		top.finish();
		jobs = std::max(1, jobs);

		const int n = static_cast<int>(list.size());
		std::vector<RunOutcome> results(static_cast<std::size_t>(n));
		std::atomic<int> next{0};
		const auto worker = [&]() {
			for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
				const std::string label =
					"scenario[" + std::to_string(i) + "]" +
					(list[static_cast<std::size_t>(i)].is_object() &&
							 list[static_cast<std::size_t>(i)].contains("kind") &&
							 list[static_cast<std::size_t>(i)]["kind"].is_string()
						 ? " (" +
							   list[static_cast<std::size_t>(i)]["kind"].get<std::string>() + ")"
						 : "");
				results[static_cast<std::size_t>(i)] =
					run_scenario_object(list[static_cast<std::size_t>(i)], base_dir, label);
			}
		};
		std::vector<std::thread> pool;
		const int workers = std::min(jobs, std::max(1, n));
		pool.reserve(static_cast<std::size_t>(workers > 1 ? workers : 0));
		if (workers > 1) {
			for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
			for (std::thread& t : pool) t.join();
		} else {
			worker();
		}

		for (int i = 0; i < n; ++i) {
			const RunOutcome& r = results[static_cast<std::size_t>(i)];
			if (n > 1) combined.output += "-- scenario " + std::to_string(i) + " --\n";
			combined.output += r.output;
			combined.error += r.error;
			combined.code = std::max(combined.code, r.code);
		}
		if (n == 0) combined.output = "0 scenarios\n";
	} catch (const std::exception& e) {
		combined.code = classify_error(e);
		combined.error += std::string(e.what()) + "\n";
	}
	return combined;
}

RunOutcome run_config_file(const std::string& path) {
	std::string text;
	try {
		text = read_text_file(path);
	} catch (const std::exception& e) {
		return RunOutcome{kExitConfig, "", std::string(e.what()) + "\n"};
	}
	const std::filesystem::path p(path);
	const std::string base = p.has_parent_path() ? p.parent_path().string() : ".";
	return run_config_text(text, base.empty() ? "." : base);
}

}  // namespace tsl::cli
