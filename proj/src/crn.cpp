#include "tsl/crn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "tsl/errors.hpp"
#include "tsl/numerics.hpp"
#include "tsl/transport.hpp"

namespace tsl {

namespace {

std::string trim(const std::string& s) {
	std::size_t b = s.find_first_not_of(" \t\r\n");
	if (b == std::string::npos) return {};
	std::size_t e = s.find_last_not_of(" \t\r\n");
	return s.substr(b, e - b + 1);
}

bool is_integer_token(const std::string& s) {
	if (s.empty()) return false;
	return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

/** Positive and negative totals of the per-species stoichiometric change. */
struct ImbalanceTotals {
	double produced = 0.0;  // sum of (nu_minus - nu_plus) over species gaining mass
	double consumed = 0.0;  // same magnitude over species losing mass
	double eta() const { return std::abs(produced - consumed); }
	double chi() const { return std::min(produced, consumed); }
};

ImbalanceTotals imbalance_totals(const ReactionChannel& ch) {
	ImbalanceTotals t;
	for (std::size_t i = 0; i < ch.nu_plus.size(); ++i) {
		double d = static_cast<double>(ch.nu_minus[i] - ch.nu_plus[i]);
		if (d > 0) {
			t.produced += d;
		} else {
			t.consumed -= d;
		}
	}
	return t;
}

/** Cost per unit of net current for one channel at the given mode. */
double cost_coefficient(const ReactionChannel& ch, const Lambda& lambda) {
	ImbalanceTotals t = imbalance_totals(ch);
	if (lambda.is_infinite()) {
		if (t.eta() != 0.0) {
			throw ExternalFlowsPresent(
				"infinite lambda requires every channel to conserve total mass");
		}
		return t.chi();
	}
	return lambda.value() * t.eta() + t.chi();
}

void check_species_vector(const ReactionNetwork& net, std::span<const double> x) {
	if (static_cast<int>(x.size()) != net.species_count()) {
		throw LengthMismatch("state vector length does not match the species count");
	}
}

/** x^k for small integer k >= 0 with the convention 0^0 = 1. */
double int_pow(double x, int k) {
	double r = 1.0;
	for (int i = 0; i < k; ++i) r *= x;
	return r;
}

}  // namespace

ReactionNetwork::ReactionNetwork(int species_count, std::vector<ReactionChannel> channels,
								 std::vector<std::string> species_names)
	: species_(species_count), channels_(std::move(channels)), names_(std::move(species_names)) {
	if (species_ < 1) {
		throw NonPositiveEntry("a reaction network needs at least one species");
	}
	for (const ReactionChannel& ch : channels_) {
		if (static_cast<int>(ch.nu_plus.size()) != species_ ||
			static_cast<int>(ch.nu_minus.size()) != species_) {
			throw LengthMismatch("stoichiometry vectors must list every species");
		}
		for (int c : ch.nu_plus) {
			if (c < 0) throw NonPositiveEntry("stoichiometric coefficients must be nonnegative");
		}
		for (int c : ch.nu_minus) {
			if (c < 0) throw NonPositiveEntry("stoichiometric coefficients must be nonnegative");
		}
		if (!(ch.kappa_plus > 0.0) || !std::isfinite(ch.kappa_plus) || !(ch.kappa_minus > 0.0) ||
			!std::isfinite(ch.kappa_minus)) {
			throw NonPositiveEntry("rate constants must be positive and finite");
		}
		if (ch.nu_plus == ch.nu_minus) {
			throw EmptyImbalance("channel does not change any species count");
		}
	}
	if (names_.empty()) {
		names_.reserve(species_);
		for (int i = 0; i < species_; ++i) names_.push_back("X" + std::to_string(i + 1));
	} else if (static_cast<int>(names_.size()) != species_) {
		throw LengthMismatch("species name list does not match the species count");
	}
}

ReactionNetwork ReactionNetwork::cascade(int n, double kf, double kb) {
	if (n < 2) throw NonPositiveEntry("a cascade needs at least two species");
	std::vector<ReactionChannel> channels;
	channels.reserve(n - 1);
	for (int i = 0; i + 1 < n; ++i) {
		ReactionChannel ch;
		ch.nu_plus.assign(n, 0);
		ch.nu_minus.assign(n, 0);
		ch.nu_plus[i] = 1;
		ch.nu_minus[i + 1] = 1;
		ch.kappa_plus = kf;
		ch.kappa_minus = kb;
		channels.push_back(std::move(ch));
	}
	return ReactionNetwork(n, std::move(channels));
}

namespace {

/** Parse "2 X1 + X2" into sparse (species, coefficient) pairs. */
std::vector<std::pair<std::string, int>> parse_side(const std::string& side, int line_no) {
	std::vector<std::pair<std::string, int>> out;
	std::string text = trim(side);
	if (text.empty()) return out;  // empty side = no reactants / no products
	std::size_t start = 0;
	while (start <= text.size()) {
		std::size_t plus = text.find('+', start);
		std::string term =
			trim(plus == std::string::npos ? text.substr(start) : text.substr(start, plus - start));
		if (term.empty()) {
			throw ParseError("line " + std::to_string(line_no) + ": empty reaction term");
		}
		std::istringstream ts(term);
		std::vector<std::string> tokens;
		std::string tok;
		while (ts >> tok) tokens.push_back(tok);
		int coeff = 1;
		std::string name;
		if (tokens.size() == 1) {
			name = tokens[0];
		} else if (tokens.size() == 2 && is_integer_token(tokens[0])) {
			coeff = std::stoi(tokens[0]);
			name = tokens[1];
		} else {
			throw ParseError("line " + std::to_string(line_no) + ": cannot parse term '" + term +
							 "'");
		}
		if (is_integer_token(name)) {
			throw ParseError("line " + std::to_string(line_no) + ": species name '" + name +
							 "' must not be a bare number");
		}
		out.emplace_back(name, coeff);
		if (plus == std::string::npos) break;
		start = plus + 1;
	}
	return out;
}

}  // namespace

ReactionNetwork ReactionNetwork::from_text(const std::string& text) {
	struct SparseChannel {
		std::vector<std::pair<int, int>> plus, minus;  // (species index, coefficient)
		double kf = 0.0, kb = 0.0;
	};
	std::vector<SparseChannel> sparse;
	std::vector<std::string> names;
	std::unordered_map<std::string, int> index;
	auto species_id = [&](const std::string& name) {
		auto it = index.find(name);
		if (it != index.end()) return it->second;
		int id = static_cast<int>(names.size());
		names.push_back(name);
		index.emplace(name, id);
		return id;
	};

	std::istringstream in(text);
	std::string line;
	int line_no = 0;
	while (std::getline(in, line)) {
		++line_no;
		std::string body = trim(line);
		if (body.empty() || body[0] == '#') continue;
		std::size_t arrow = body.find("<->");
		if (arrow == std::string::npos) {
			throw ParseError("line " + std::to_string(line_no) + ": missing '<->'");
		}
		std::string lhs = body.substr(0, arrow);
		std::string rest = body.substr(arrow + 3);

		// The products end at the first comma; the remaining comma-separated
		// fields are key=value rate settings.
		std::vector<std::string> fields;
		std::size_t start = 0;
		while (true) {
			std::size_t comma = rest.find(',', start);
			fields.push_back(
				trim(comma == std::string::npos ? rest.substr(start) : rest.substr(start, comma - start)));
			if (comma == std::string::npos) break;
			start = comma + 1;
		}
		SparseChannel ch;
		bool have_kf = false, have_kb = false;
		for (std::size_t f = 1; f < fields.size(); ++f) {
			const std::string& kv = fields[f];
			std::size_t eq = kv.find('=');
			if (eq == std::string::npos) {
				throw ParseError("line " + std::to_string(line_no) + ": expected key=value, got '" +
								 kv + "'");
			}
			std::string key = trim(kv.substr(0, eq));
			std::string val = trim(kv.substr(eq + 1));
			double parsed = 0.0;
			try {
				std::size_t used = 0;
				parsed = std::stod(val, &used);
				if (used != val.size()) throw std::invalid_argument("trailing characters");
			} catch (const std::exception&) {
				throw ParseError("line " + std::to_string(line_no) + ": invalid numeric value '" +
								 val + "'");
			}
			if (key == "kf") {
				if (have_kf) throw ParseError("line " + std::to_string(line_no) + ": duplicate kf");
				ch.kf = parsed;
				have_kf = true;
			} else if (key == "kb") {
				if (have_kb) throw ParseError("line " + std::to_string(line_no) + ": duplicate kb");
				ch.kb = parsed;
				have_kb = true;
			} else {
				throw ParseError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
			}
		}
		if (!have_kf || !have_kb) {
			throw ParseError("line " + std::to_string(line_no) + ": every reaction needs kf and kb");
		}
		for (const auto& [name, coeff] : parse_side(lhs, line_no)) {
			ch.plus.emplace_back(species_id(name), coeff);
		}
		for (const auto& [name, coeff] : parse_side(fields[0], line_no)) {
			ch.minus.emplace_back(species_id(name), coeff);
		}
		sparse.push_back(std::move(ch));
	}
	if (sparse.empty()) {
		throw ParseError("no reactions found");
	}

	int n = static_cast<int>(names.size());
	std::vector<ReactionChannel> channels;
	channels.reserve(sparse.size());
	for (const SparseChannel& sc : sparse) {
		ReactionChannel ch;
		ch.nu_plus.assign(n, 0);
		ch.nu_minus.assign(n, 0);
		for (const auto& [id, coeff] : sc.plus) ch.nu_plus[id] += coeff;
		for (const auto& [id, coeff] : sc.minus) ch.nu_minus[id] += coeff;
		ch.kappa_plus = sc.kf;
		ch.kappa_minus = sc.kb;
		channels.push_back(std::move(ch));
	}
	return ReactionNetwork(n, std::move(channels), std::move(names));
}

ReactionNetwork ReactionNetwork::from_file(const std::string& path) {
	std::ifstream in(path);
	if (!in) throw IoError("cannot open reaction file: " + path);
	std::ostringstream buf;
	buf << in.rdbuf();
	return from_text(buf.str());
}

bool ReactionNetwork::conservative() const {
	for (const ReactionChannel& ch : channels_) {
		if (imbalance_totals(ch).eta() != 0.0) return false;
	}
	return true;
}

std::vector<ChannelFlux> fluxes(const ReactionNetwork& net, std::span<const double> x) {
	check_species_vector(net, x);
	for (double xi : x) {
		if (!(xi >= -1e-9) || !std::isfinite(xi)) {
			throw NegativeConcentration("concentrations must be nonnegative and finite");
		}
	}
	std::vector<ChannelFlux> out(net.channel_count());
	for (int r = 0; r < net.channel_count(); ++r) {
		const ReactionChannel& ch = net.channel(r);
		double fwd = ch.kappa_plus;
		double bwd = ch.kappa_minus;
		for (int i = 0; i < net.species_count(); ++i) {
			double xi = std::max(x[i], 0.0);
			if (ch.nu_plus[i] > 0) fwd *= int_pow(xi, ch.nu_plus[i]);
			if (ch.nu_minus[i] > 0) bwd *= int_pow(xi, ch.nu_minus[i]);
		}
		out[r] = ChannelFlux{fwd, bwd, bwd - fwd};
	}
	return out;
}

std::vector<ChannelFlux> fluxes(const ReactionNetwork& net, const Measure& x) {
	return fluxes(net, x.span());
}

void rate_derivative_into(const ReactionNetwork& net, std::span<const double> x,
						  std::span<double> dx) {
	check_species_vector(net, x);
	if (dx.size() != x.size()) {
		throw LengthMismatch("derivative buffer length does not match the species count");
	}
	std::fill(dx.begin(), dx.end(), 0.0);
	std::vector<ChannelFlux> flx = fluxes(net, x);
	for (int r = 0; r < net.channel_count(); ++r) {
		const ReactionChannel& ch = net.channel(r);
		double drive = flx[r].forward - flx[r].backward;
		for (int i = 0; i < net.species_count(); ++i) {
			dx[i] += static_cast<double>(ch.nu_minus[i] - ch.nu_plus[i]) * drive;
		}
	}
}

std::vector<double> rate_derivative(const ReactionNetwork& net, const Measure& x) {
	std::vector<double> dx(x.size(), 0.0);
	rate_derivative_into(net, x.span(), dx);
	return dx;
}

GreedySplit greedy_split(std::span<const double> a, std::span<const double> b) {
	for (double v : a) {
		if (!(v > 0.0) || !std::isfinite(v)) {
			throw NonPositiveEntry("greedy_split inputs must be strictly positive");
		}
	}
	for (double v : b) {
		if (!(v > 0.0) || !std::isfinite(v)) {
			throw NonPositiveEntry("greedy_split inputs must be strictly positive");
		}
	}
	const int n = static_cast<int>(a.size());
	const int m = static_cast<int>(b.size());
	GreedySplit out;
	out.z.assign(n, std::vector<double>(m, 0.0));
	out.a_tilde.assign(n, 0.0);
	out.b_tilde.assign(m, 0.0);

	std::vector<int> ia(n), ib(m);
	std::iota(ia.begin(), ia.end(), 0);
	std::iota(ib.begin(), ib.end(), 0);
	std::stable_sort(ia.begin(), ia.end(), [&](int p, int q) { return a[p] < a[q]; });
	std::stable_sort(ib.begin(), ib.end(), [&](int p, int q) { return b[p] < b[q]; });

	int pa = 0, pb = 0;
	double rem_a = n > 0 ? a[ia[0]] : 0.0;
	double rem_b = m > 0 ? b[ib[0]] : 0.0;
	while (pa < n && pb < m) {
		double moved = std::min(rem_a, rem_b);
		out.z[ia[pa]][ib[pb]] += moved;
		rem_a -= moved;
		rem_b -= moved;
		if (rem_a <= 0.0) {
			++pa;
			if (pa < n) rem_a = a[ia[pa]];
		}
		if (rem_b <= 0.0) {
			++pb;
			if (pb < m) rem_b = b[ib[pb]];
		}
	}
	for (int i = 0; i < n; ++i) {
		for (int j = 0; j < m; ++j) {
			out.a_tilde[i] += out.z[i][j];
			out.b_tilde[j] += out.z[i][j];
		}
	}
	return out;
}

TransportGraphData build_transport_graph(const ReactionNetwork& net) {
	const int n = net.species_count();
	std::vector<Edge> edges;
	std::vector<ChannelGeometry> geoms;
	geoms.reserve(net.channel_count());
	for (int r = 0; r < net.channel_count(); ++r) {
		const ReactionChannel& ch = net.channel(r);
		ChannelGeometry g;
		g.mu.assign(n, 0.0);
		std::vector<double> a, b;
		for (int i = 0; i < n; ++i) {
			int d = ch.nu_minus[i] - ch.nu_plus[i];
			if (d > 0) {
				g.s_plus.push_back(i);
				a.push_back(static_cast<double>(d));
			} else if (d < 0) {
				g.s_minus.push_back(i);
				b.push_back(static_cast<double>(-d));
			}
		}
		ImbalanceTotals t = imbalance_totals(ch);
		g.eta = t.eta();
		g.chi = t.chi();
		g.conservative = g.eta == 0.0;
		if (!a.empty() && !b.empty()) {
			GreedySplit gs = greedy_split(a, b);
			g.z = std::move(gs.z);
			for (std::size_t p = 0; p < g.s_plus.size(); ++p) g.mu[g.s_plus[p]] = gs.a_tilde[p];
			for (std::size_t q = 0; q < g.s_minus.size(); ++q) g.mu[g.s_minus[q]] = -gs.b_tilde[q];
			for (std::size_t p = 0; p < g.s_plus.size(); ++p) {
				for (std::size_t q = 0; q < g.s_minus.size(); ++q) {
					if (g.z[p][q] > 0.0) {
						int u = std::min(g.s_plus[p], g.s_minus[q]);
						int v = std::max(g.s_plus[p], g.s_minus[q]);
						edges.push_back(Edge{u, v});
					}
				}
			}
		} else {
			g.z.assign(g.s_plus.size(), std::vector<double>(g.s_minus.size(), 0.0));
		}

		// Cheap structural audit of the decomposition before anything
		// downstream trusts it.
		double chi_check = 0.0;
		int nonzeros = 0;
		for (std::size_t p = 0; p < g.s_plus.size(); ++p) {
			double row = 0.0;
			for (std::size_t q = 0; q < g.s_minus.size(); ++q) {
				if (g.z[p][q] < 0.0) throw InvariantViolation("negative coupling entry");
				if (g.z[p][q] > 0.0) ++nonzeros;
				row += g.z[p][q];
			}
			int i = g.s_plus[p];
			double cap = static_cast<double>(ch.nu_minus[i] - ch.nu_plus[i]);
			if (std::abs(row - g.mu[i]) > 1e-12 || row > cap + 1e-12) {
				throw InvariantViolation("coupling row sums break the imbalance budget");
			}
			chi_check += row;
		}
		for (std::size_t q = 0; q < g.s_minus.size(); ++q) {
			double col = 0.0;
			for (std::size_t p = 0; p < g.s_plus.size(); ++p) col += g.z[p][q];
			int j = g.s_minus[q];
			double cap = static_cast<double>(ch.nu_plus[j] - ch.nu_minus[j]);
			if (std::abs(col + g.mu[j]) > 1e-12 || col > cap + 1e-12) {
				throw InvariantViolation("coupling column sums break the imbalance budget");
			}
		}
		if (!g.s_plus.empty() && !g.s_minus.empty()) {
			if (std::abs(chi_check - g.chi) > 1e-12) {
				throw InvariantViolation("transported total does not match chi");
			}
			int cap = static_cast<int>(g.s_plus.size() + g.s_minus.size()) - 1;
			if (nonzeros > cap) {
				throw InvariantViolation("coupling uses more edges than allowed");
			}
		}
		if (g.conservative) {
			for (int i = 0; i < n; ++i) {
				if (std::abs(g.mu[i] - static_cast<double>(ch.nu_minus[i] - ch.nu_plus[i])) >
					1e-12) {
					throw InvariantViolation("conservative channel must transport everything");
				}
			}
		}
		geoms.push_back(std::move(g));
	}
	TransportGraphData out{Graph(n, std::move(edges), /*allow_disconnected=*/true),
						   std::move(geoms)};
	return out;
}

FlowField decompose_flows(const ReactionNetwork& net, const TransportGraphData& tgd,
						  std::span<const double> x) {
	if (static_cast<int>(tgd.channels.size()) != net.channel_count() ||
		tgd.graph.vertex_count() != net.species_count()) {
		throw LengthMismatch("transport graph does not match the reaction network");
	}
	FlowField f = FlowField::zero(tgd.graph);
	std::vector<ChannelFlux> flx = fluxes(net, x);
	for (int r = 0; r < net.channel_count(); ++r) {
		const ReactionChannel& ch = net.channel(r);
		const ChannelGeometry& g = tgd.channels[r];
		double drive = flx[r].forward - flx[r].backward;  // net forward current
		for (int i = 0; i < net.species_count(); ++i) {
			double d = static_cast<double>(ch.nu_minus[i] - ch.nu_plus[i]);
			double residual = d - g.mu[i];
			if (residual != 0.0) f.external[i] += residual * drive;
		}
		for (std::size_t p = 0; p < g.s_plus.size(); ++p) {
			for (std::size_t q = 0; q < g.s_minus.size(); ++q) {
				if (g.z[p][q] <= 0.0) continue;
				// The forward direction moves z[p][q] units from the consumed
				// species to the produced one.
				int from = g.s_minus[q];
				int to = g.s_plus[p];
				int e = tgd.graph.edge_index(from, to);
				double amount = g.z[p][q] * drive;
				if (tgd.graph.edge(e).u == from) {
					f.edge[e] += amount;
				} else {
					f.edge[e] -= amount;
				}
			}
		}
	}
	return f;
}

FlowField decompose_flows(const ReactionNetwork& net, const TransportGraphData& tgd,
						  const Measure& x) {
	return decompose_flows(net, tgd, x.span());
}

EntropyRate entropy_production_rate(const ReactionNetwork& net, std::span<const double> x) {
	std::vector<ChannelFlux> flx = fluxes(net, x);
	EntropyRate out;
	for (const ChannelFlux& f : flx) {
		if (!(f.forward > 0.0) || !(f.backward > 0.0)) {
			return EntropyRate{std::numeric_limits<double>::infinity(), false};
		}
		out.value += (f.backward - f.forward) * std::log(f.backward / f.forward);
	}
	return out;
}

EntropyRate entropy_production_rate(const ReactionNetwork& net, const Measure& x) {
	return entropy_production_rate(net, x.span());
}

double kinetic_term(const ReactionNetwork& net, std::span<const double> x, const Lambda& lambda) {
	std::vector<ChannelFlux> flx = fluxes(net, x);
	double total = 0.0;
	for (int r = 0; r < net.channel_count(); ++r) {
		double c = cost_coefficient(net.channel(r), lambda);
		total += c * c * log_mean(flx[r].backward, flx[r].forward);
	}
	return total;
}

double flow_cost_rate(const ReactionNetwork& net, std::span<const double> x,
					  const Lambda& lambda) {
	std::vector<ChannelFlux> flx = fluxes(net, x);
	double total = 0.0;
	for (int r = 0; r < net.channel_count(); ++r) {
		double c = cost_coefficient(net.channel(r), lambda);
		total += c * std::abs(flx[r].net);
	}
	return total;
}

double diffusion_coefficient(const ReactionNetwork& net, std::span<const double> x) {
	std::vector<ChannelFlux> flx = fluxes(net, x);
	double total = 0.0;
	for (int r = 0; r < net.channel_count(); ++r) {
		const ReactionChannel& ch = net.channel(r);
		double sq = 0.0;
		for (int i = 0; i < net.species_count(); ++i) {
			double d = static_cast<double>(ch.nu_minus[i] - ch.nu_plus[i]);
			sq += d * d;
		}
		total += sq * (flx[r].forward + flx[r].backward);
	}
	return total * static_cast<double>(net.species_count()) / 8.0;
}

CrnBounds crn_bounds(const ReactionNetwork& net, const Measure& x0, double tau,
					 const Lambda& lambda, int steps) {
	check_species_vector(net, x0.span());
	if (!(tau > 0.0) || !std::isfinite(tau)) {
		throw NonPositiveEntry("the time window must be positive and finite");
	}
	if (steps < 1) throw NonPositiveEntry("the integration needs at least one step");
	if (lambda.is_infinite() && !net.conservative()) {
		throw ExternalFlowsPresent("infinite lambda requires a conservative network");
	}

	CrnBounds out;
	out.tau = tau;
	out.lambda = lambda;

	// Zero concentrations put the entropy terms on the boundary of their
	// domain; nudge them so the hierarchy stays evaluable, and say so.
	std::vector<double> start = x0.values();
	for (double& v : start) {
		if (v == 0.0) {
			v = 1e-12;
			out.perturbed_zeros = true;
		}
	}

	OdeRhs rhs = [&net](double, std::span<const double> y, std::span<double> dy) {
		rate_derivative_into(net, y, dy);
	};
	TimeSeries ts = rk4_integrate(rhs, start, 0.0, tau, steps);

	const int samples = ts.sample_count();
	std::vector<double> cost(samples), sigma(samples), kin(samples), kin_half(samples),
		diff(samples);
	const Lambda half = Lambda::finite(0.5);
	out.sigma_finite = true;
	for (int k = 0; k < samples; ++k) {
		std::span<const double> xk{ts.values[k]};
		cost[k] = flow_cost_rate(net, xk, lambda);
		diff[k] = diffusion_coefficient(net, xk);
		EntropyRate s = entropy_production_rate(net, xk);
		if (!s.finite) {
			out.sigma_finite = false;
			sigma[k] = 0.0;
			kin[k] = 0.0;
			kin_half[k] = 0.0;
		} else {
			sigma[k] = s.value;
			kin[k] = kinetic_term(net, xk, lambda);
			kin_half[k] = kinetic_term(net, xk, half);
		}
	}

	TransportGraphData tgd = build_transport_graph(net);
	Measure a(start);
	Measure b(ts.values.back(), 1e-6);
	if (lambda.is_infinite()) {
		out.distance = wasserstein1(tgd.graph, a, b, ComponentPolicy::per_component).value;
	} else {
		out.distance =
			generalized_wasserstein(tgd.graph, a, b, lambda.value(), ComponentPolicy::per_component)
				.value;
	}
	out.tv = total_variation(a, b);

	out.avg_cost = time_average(ts.times, cost);
	out.avg_sigma = time_average(ts.times, sigma);
	out.avg_kinetic = time_average(ts.times, kin);
	out.avg_kinetic_half = time_average(ts.times, kin_half);
	out.avg_diffusion = time_average(ts.times, diff);

	if (out.distance > 0.0) {
		if (!(out.avg_cost > 0.0)) {
			throw InvariantViolation("endpoints moved apart with zero average current cost");
		}
		out.tau1 = out.distance / out.avg_cost;
	}
	if (out.sigma_finite && out.avg_sigma > 0.0) {
		if (out.distance > 0.0 && out.avg_kinetic > 0.0) {
			out.tau2 = out.distance / std::sqrt(out.avg_sigma * out.avg_kinetic);
		}
		if (out.tv > 0.0 && out.avg_kinetic_half > 0.0) {
			out.tau2_half = out.tv / std::sqrt(out.avg_sigma * out.avg_kinetic_half);
		}
		if (out.tv > 0.0 && out.avg_diffusion > 0.0) {
			out.tau3 = out.tv / std::sqrt(out.avg_sigma * out.avg_diffusion);
		}
	}
	return out;
}

FlowTrajectory simulate(const ReactionNetwork& net, const TransportGraphData& tgd,
						const Measure& x0, double tau, int steps) {
	FlowGenerator gen = [&net, &tgd](double, std::span<const double> x) {
		return decompose_flows(net, tgd, x);
	};
	return evolve(tgd.graph, gen, x0, tau, steps);
}

}  // namespace tsl
