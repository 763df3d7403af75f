#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace {

using njson = nlohmann::ordered_json;

/** "inf" stays a string; anything else should be a finite number. */
njson lambda_json(const std::string& s) {
	if (s == "inf") return s;
	char* end = nullptr;
	const double v = std::strtod(s.c_str(), &end);
	if (!s.empty() && end != nullptr && *end == '\0') return v;
	return s;  // let the config layer name the offending value
}

struct GridOpts {
	std::vector<double> tau;
	std::vector<std::string> lambda;
	int steps = 0;
};

void add_grid_options(CLI::App* sub, GridOpts& g, bool with_tau = true) {
	if (with_tau)
		sub->add_option("--tau", g.tau, "time horizon(s) for the run")->delimiter(',');
	sub->add_option("--lambda", g.lambda,
					"weight(s) for external flows: positive numbers or 'inf'")
		->delimiter(',');
	sub->add_option("--steps", g.steps, "integration steps (0 = kind default)");
}

void apply_grid(njson& doc, const GridOpts& g) {
	njson grid = njson::object();
	if (!g.tau.empty()) grid["tau"] = g.tau;
	if (!g.lambda.empty()) {
		njson arr = njson::array();
		for (const std::string& s : g.lambda) arr.push_back(lambda_json(s));
		grid["lambda"] = arr;
	}
	if (g.steps > 0) grid["steps"] = g.steps;
	if (!grid.empty()) doc["grid"] = std::move(grid);
}

struct CommonOpts {
	std::string out;
	std::uint64_t seed = 1;
};

void add_common_options(CLI::App* sub, CommonOpts& c) {
	sub->add_option("--out", c.out, "directory for trajectory.csv / bounds.json / summary.txt");
	sub->add_option("--seed", c.seed, "random seed for randomized pieces");
}

void apply_common(njson& doc, const CommonOpts& c, bool seed_given) {
	if (!c.out.empty()) doc["out"] = c.out;
	if (seed_given) doc["seed"] = c.seed;
}

int finish(const tsl::cli::RunOutcome& out) {
	if (!out.output.empty()) std::fputs(out.output.c_str(), stdout);
	if (!out.error.empty()) std::fputs(out.error.c_str(), stderr);
	return out.code;
}

}  // namespace

int main(int argc, char** argv) {
	CLI::App app{"speed-limit toolkit: graph transport distances, flow bounds, and dynamics"};
	app.require_subcommand(0, 1);

	std::string config_path;
	app.add_option("--config", config_path, "run scenarios from a structured config file");

	tsl::cli::RunOutcome outcome;
	bool ran = false;

	// ---- transport ------------------------------------------------------
	auto* transport = app.add_subcommand("transport", "distances between two measures on a graph");
	struct {
		std::string graph, a, b;
		bool per_component = false;
		CommonOpts common;
		GridOpts grid;
	} tr;
	transport->add_option("--graph", tr.graph, "chain:<n>, cycle:<n>, complete:<n>, star:<n>, or an edge-list file")
		->required();
	transport->add_option("--a", tr.a, "source measure: delta:<v>, uniform, or csv:<path>")->required();
	transport->add_option("--b", tr.b, "target measure")->required();
	transport->add_flag("--per-component", tr.per_component,
						"balance each connected component separately");
	add_common_options(transport, tr.common);
	add_grid_options(transport, tr.grid, /*with_tau=*/false);
	transport->callback([&] {
		njson doc{{"kind", "transport"}};
		apply_common(doc, tr.common, transport->count("--seed") > 0);
		apply_grid(doc, tr.grid);
		njson p{{"graph", tr.graph}, {"a", tr.a}, {"b", tr.b}};
		if (tr.per_component) p["per_component"] = true;
		doc["transport"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	// ---- crn --------------------------------------------------------------
	auto* crn = app.add_subcommand("crn", "reaction-network bound hierarchy over a horizon sweep");
	struct {
		std::string builtin, file, x0;
		int n = 0;
		double kf = 0.0, kb = 0.0;
		double tau_max = 0.0;
		int tau_points = 20;
		CommonOpts common;
		GridOpts grid;
	} cr;
	crn->add_option("--builtin", cr.builtin, "builtin network (cascade)");
	crn->add_option("--file", cr.file, "network description file");
	crn->add_option("--N", cr.n, "species count for the builtin");
	crn->add_option("--kf", cr.kf, "forward rate for the builtin");
	crn->add_option("--kb", cr.kb, "backward rate for the builtin");
	crn->add_option("--x0", cr.x0, "initial concentrations (measure syntax)");
	crn->add_option("--tau-max", cr.tau_max, "sweep horizons over [0.05, tau-max]");
	crn->add_option("--tau-points", cr.tau_points, "number of sweep points")->check(CLI::PositiveNumber);
	add_common_options(crn, cr.common);
	add_grid_options(crn, cr.grid);
	crn->callback([&] {
		njson doc{{"kind", "crn"}};
		apply_common(doc, cr.common, crn->count("--seed") > 0);
		GridOpts grid = cr.grid;
		if (grid.tau.empty() && cr.tau_max > 0.0) {
			if (cr.tau_max <= 0.05 || cr.tau_points < 2) {
				grid.tau.push_back(cr.tau_max);
			} else {
				for (int k = 0; k < cr.tau_points; ++k)
					grid.tau.push_back(0.05 + (cr.tau_max - 0.05) * k / (cr.tau_points - 1));
			}
		}
		apply_grid(doc, grid);
		njson p = njson::object();
		if (!cr.builtin.empty()) p["builtin"] = cr.builtin;
		if (!cr.file.empty()) p["file"] = cr.file;
		if (crn->count("--N") > 0) p["n"] = cr.n;
		if (crn->count("--kf") > 0) p["kf"] = cr.kf;
		if (crn->count("--kb") > 0) p["kb"] = cr.kb;
		if (!cr.x0.empty()) p["x0"] = cr.x0;
		doc["crn"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	// ---- boson -------------------------------------------------------------
	auto* boson = app.add_subcommand("boson", "bosonic lattice with local gain and loss");
	struct {
		int sites = 0, nmax = 1;
		double gamma = 1.0, u = 0.0, mu = 0.0;
		std::vector<double> absorb, emit;
		std::string graph, x0;
		CommonOpts common;
		GridOpts grid;
	} bo;
	boson->add_option("--sites", bo.sites, "lattice sites")->required();
	boson->add_option("--nmax", bo.nmax, "per-site occupation cutoff");
	boson->add_option("--gamma", bo.gamma, "hopping rate");
	boson->add_option("--u", bo.u, "on-site interaction strength");
	boson->add_option("--mu", bo.mu, "chemical potential");
	boson->add_option("--absorb", bo.absorb, "per-site absorption rates")->delimiter(',');
	boson->add_option("--emit", bo.emit, "per-site emission rates")->delimiter(',');
	boson->add_option("--graph", bo.graph, "lattice graph (default chain:<sites>)");
	boson->add_option("--x0", bo.x0, "initial state: fock:<counts> or mixed");
	add_common_options(boson, bo.common);
	add_grid_options(boson, bo.grid);
	boson->callback([&] {
		njson doc{{"kind", "boson"}};
		apply_common(doc, bo.common, boson->count("--seed") > 0);
		apply_grid(doc, bo.grid);
		njson p{{"sites", bo.sites}};
		if (boson->count("--nmax") > 0) p["n_max"] = bo.nmax;
		if (boson->count("--gamma") > 0) p["gamma"] = bo.gamma;
		if (boson->count("--u") > 0) p["u"] = bo.u;
		if (boson->count("--mu") > 0) p["mu"] = bo.mu;
		if (!bo.absorb.empty()) p["absorb"] = bo.absorb;
		if (!bo.emit.empty()) p["emit"] = bo.emit;
		if (!bo.graph.empty()) p["graph"] = bo.graph;
		if (!bo.x0.empty()) p["x0"] = bo.x0;
		doc["boson"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	// ---- spin -------------------------------------------------------------
	auto* spin = app.add_subcommand("spin", "exchange spin chain transfer run");
	struct {
		int sites = 0, x0_site = 1, field_segments = 0;
		double gamma = 1.0, field_amplitude = 0.0;
		CommonOpts common;
		GridOpts grid;
	} sp;
	spin->add_option("--sites", sp.sites, "chain length")->required();
	spin->add_option("--gamma", sp.gamma, "exchange rate");
	spin->add_option("--x0-site", sp.x0_site, "site carrying the initial up spin (1-based)");
	spin->add_option("--field-amplitude", sp.field_amplitude,
					 "amplitude of a random piecewise-constant field");
	spin->add_option("--field-segments", sp.field_segments, "number of field segments");
	add_common_options(spin, sp.common);
	add_grid_options(spin, sp.grid);
	spin->callback([&] {
		njson doc{{"kind", "spin"}};
		apply_common(doc, sp.common, spin->count("--seed") > 0);
		apply_grid(doc, sp.grid);
		njson p{{"sites", sp.sites}};
		if (spin->count("--gamma") > 0) p["gamma"] = sp.gamma;
		if (spin->count("--x0-site") > 0) p["x0_site"] = sp.x0_site;
		const bool has_amp = spin->count("--field-amplitude") > 0;
		const bool has_seg = spin->count("--field-segments") > 0;
		if (has_amp != has_seg)
			throw CLI::ValidationError(
				"--field-amplitude and --field-segments must be given together");
		if (has_amp)
			p["field"] = njson{{"amplitude", sp.field_amplitude},
							   {"segments", sp.field_segments}};
		doc["spin"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	// ---- qwalk ------------------------------------------------------------
	auto* qwalk = app.add_subcommand("qwalk", "repeatedly measured single-particle walk");
	struct {
		int sites = 0, segments = 0, x0_site = 1;
		double dt = 0.5, coupling = 1.0;
		std::vector<double> couplings;
		CommonOpts common;
		GridOpts grid;
	} qw;
	qwalk->add_option("--sites", qw.sites, "walk sites")->required();
	qwalk->add_option("--segments", qw.segments, "number of measured segments")->required();
	qwalk->add_option("--dt", qw.dt, "segment duration");
	qwalk->add_option("--coupling", qw.coupling, "uniform hop coupling");
	qwalk->add_option("--couplings", qw.couplings, "per-bond hop couplings")->delimiter(',');
	qwalk->add_option("--x0-site", qw.x0_site, "starting site (1-based)");
	add_common_options(qwalk, qw.common);
	add_grid_options(qwalk, qw.grid, /*with_tau=*/false);
	qwalk->callback([&] {
		njson doc{{"kind", "qwalk"}};
		apply_common(doc, qw.common, qwalk->count("--seed") > 0);
		apply_grid(doc, qw.grid);
		njson p{{"sites", qw.sites}, {"segments", qw.segments}};
		if (qwalk->count("--dt") > 0) p["dt"] = qw.dt;
		if (!qw.couplings.empty())
			p["couplings"] = qw.couplings;
		else if (qwalk->count("--coupling") > 0)
			p["coupling"] = qw.coupling;
		if (qwalk->count("--x0-site") > 0) p["x0_site"] = qw.x0_site;
		doc["qwalk"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	// ---- open -------------------------------------------------------------
	auto* open = app.add_subcommand("open", "few-level system with paired thermal jumps");
	struct {
		std::vector<double> energies;
		std::vector<std::string> transitions;
		double drive_amplitude = 0.0, drive_frequency = 1.0;
		std::string x0;
		bool per_component = false;
		CommonOpts common;
		GridOpts grid;
	} op;
	open->add_option("--energies", op.energies, "level energies, strictly ascending")
		->required()
		->delimiter(',');
	open->add_option("--transition", op.transitions,
					 "jump pair '<lower>:<upper>:<rate>[:<entropy>]' (repeatable)")
		->required();
	open->add_option("--drive-amplitude", op.drive_amplitude, "coherent drive amplitude");
	open->add_option("--drive-frequency", op.drive_frequency, "coherent drive frequency");
	open->add_option("--x0", op.x0, "initial state: mixed or level:<k>");
	open->add_flag("--per-component", op.per_component,
				   "balance each connected level group separately");
	add_common_options(open, op.common);
	add_grid_options(open, op.grid);
	open->callback([&] {
		njson doc{{"kind", "open"}};
		apply_common(doc, op.common, open->count("--seed") > 0);
		apply_grid(doc, op.grid);
		njson p{{"energies", op.energies}};
		njson list = njson::array();
		for (const std::string& spec : op.transitions) {
			std::vector<std::string> parts;
			std::string tok;
			for (const char c : spec + ":") {
				if (c == ':') {
					parts.push_back(tok);
					tok.clear();
				} else {
					tok.push_back(c);
				}
			}
			if (parts.size() < 3 || parts.size() > 4)
				throw CLI::ValidationError("--transition needs '<lower>:<upper>:<rate>[:<entropy>]'");
			njson entry{{"lower", std::atoi(parts[0].c_str())},
						{"upper", std::atoi(parts[1].c_str())},
						{"rate", std::atof(parts[2].c_str())}};
			if (parts.size() == 4) entry["entropy"] = std::atof(parts[3].c_str());
			list.push_back(std::move(entry));
		}
		p["transitions"] = std::move(list);
		if (open->count("--drive-amplitude") > 0)
			p["drive"] = njson{{"amplitude", op.drive_amplitude},
							   {"frequency", op.drive_frequency}};
		if (!op.x0.empty()) p["x0"] = op.x0;
		if (op.per_component) p["per_component"] = true;
		doc["open"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	// ---- verify -------------------------------------------------------------
	auto* verify = app.add_subcommand("verify", "run the built-in verification suites");
	struct {
		bool quick = false;
		std::vector<std::string> suites;
		CommonOpts common;
	} ve;
	verify->add_flag("--quick", ve.quick, "smaller sample counts");
	verify->add_option("--suites", ve.suites, "run only the named suites")->delimiter(',');
	add_common_options(verify, ve.common);
	verify->callback([&] {
		njson doc{{"kind", "verify"}};
		apply_common(doc, ve.common, verify->count("--seed") > 0);
		njson p = njson::object();
		if (ve.quick) p["quick"] = true;
		if (!ve.suites.empty()) p["suites"] = ve.suites;
		doc["verify"] = std::move(p);
		outcome = tsl::cli::run_config_text(doc.dump(), ".");
		ran = true;
	});

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError& e) {
		const int code = app.exit(e);
		return code == 0 ? 0 : tsl::cli::kExitConfig;
	}

	if (!ran) {
		if (!config_path.empty()) {
			outcome = tsl::cli::run_config_file(config_path);
			return finish(outcome);
		}
		std::fputs(app.help().c_str(), stdout);
		return tsl::cli::kExitConfig;
	}
	return finish(outcome);
}
