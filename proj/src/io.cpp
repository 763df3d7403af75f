#include "tsl/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tsl/errors.hpp"

namespace tsl {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt_double(double v) {
	char buf[40];
	std::snprintf(buf, sizeof(buf), "%.17g", v);
	return buf;
}

/** JSON never carries inf/nan numbers; encode them as strings instead. */
ordered_json json_number(double v) {
	if (std::isfinite(v)) return v;
	if (std::isnan(v)) return "nan";
	return v > 0 ? "inf" : "-inf";
}

ordered_json json_lambda(const Lambda& lambda) {
	return lambda.is_infinite() ? ordered_json("inf") : json_number(lambda.value());
}

double parse_double_token(const std::string& tok) {
	const char* s = tok.c_str();
	char* end = nullptr;
	const double v = std::strtod(s, &end);
	if (end == s || *end != '\0')
		throw ParseError("bad numeric value '" + tok + "' in measure data");
	return v;
}

}  // namespace

Measure parse_measure(const std::string& text, int n) {
	if (n <= 0) throw ParseError("measure length must be positive");
	if (text == "uniform")
		return Measure(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));

	if (text.rfind("delta:", 0) == 0) {
		const std::string num = text.substr(6);
		int vertex = 0;
		const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), vertex);
		if (ec != std::errc{} || ptr != num.data() + num.size())
			throw ParseError("bad vertex number in measure '" + text + "'");
		if (vertex < 1 || vertex > n)
			throw ParseError("measure '" + text + "' addresses a vertex outside 1.." +
							 std::to_string(n));
		return Measure::delta(n, vertex - 1);
	}

	if (text.rfind("csv:", 0) == 0) {
		const std::string content = read_text_file(text.substr(4));
		std::vector<double> values;
		std::string tok;
		for (const char c : content) {
			if (c == ',' || c == '\n' || c == '\r' || c == ' ' || c == '\t') {
				if (!tok.empty()) values.push_back(parse_double_token(tok));
				tok.clear();
			} else {
				tok.push_back(c);
			}
		}
		if (!tok.empty()) values.push_back(parse_double_token(tok));
		if (static_cast<int>(values.size()) != n)
			throw ParseError("measure file for '" + text + "' holds " +
							 std::to_string(values.size()) + " values, expected " +
							 std::to_string(n));
		return Measure(values);
	}

	throw ParseError("unrecognized measure description '" + text +
					 "' (expected delta:<vertex>, uniform, or csv:<path>)");
}

std::string trajectory_csv(const FlowTrajectory& traj) {
	const std::size_t samples = traj.times.size();
	if (traj.measures.size() != samples || traj.flows.size() != samples)
		throw LengthMismatch("trajectory grids disagree: " + std::to_string(samples) +
							 " times vs " + std::to_string(traj.measures.size()) +
							 " measures and " + std::to_string(traj.flows.size()) + " flows");
	const int n = traj.graph.vertex_count();
	const int m = traj.graph.edge_count();

	std::string out = "t";
	for (int i = 0; i < n; ++i) out += ",x" + std::to_string(i);
	for (int i = 0; i < n; ++i) out += ",fext" + std::to_string(i);
	for (int e = 0; e < m; ++e) {
		const Edge ed = traj.graph.edge(e);
		out += ",f" + std::to_string(ed.u) + "_" + std::to_string(ed.v);
	}
	out += "\n";

	for (std::size_t k = 0; k < samples; ++k) {
		out += fmt_double(traj.times[k]);
		for (int i = 0; i < n; ++i) out += "," + fmt_double(traj.measures[k][i]);
		for (int i = 0; i < n; ++i)
			out += "," + fmt_double(traj.flows[k].external[static_cast<std::size_t>(i)]);
		for (int e = 0; e < m; ++e)
			out += "," + fmt_double(traj.flows[k].edge[static_cast<std::size_t>(e)]);
		out += "\n";
	}
	return out;
}

namespace {

ordered_json bound_report_object(const BoundReport& report) {
	ordered_json j;
	j["tau"] = json_number(report.tau);
	j["lambda"] = json_lambda(report.lambda);
	j["distance"] = json_number(report.distance);
	j["avg_velocity"] = json_number(report.avg_velocity);
	j["tau_bound"] = json_number(report.tau_bound);
	j["saturation_ratio"] = json_number(report.saturation_ratio);
	return j;
}

}  // namespace

std::string bound_report_json_text(const BoundReport& report) {
	return bound_report_object(report).dump(2) + "\n";
}

std::string bound_reports_json_text(const std::vector<BoundReport>& reports) {
	ordered_json arr = ordered_json::array();
	for (const BoundReport& r : reports) arr.push_back(bound_report_object(r));
	ordered_json doc;
	doc["reports"] = std::move(arr);
	return doc.dump(2) + "\n";
}

std::string crn_sweep_json_text(const std::vector<CrnBounds>& sweep) {
	ordered_json arr = ordered_json::array();
	for (const CrnBounds& b : sweep) {
		ordered_json j;
		j["tau"] = json_number(b.tau);
		j["lambda"] = json_lambda(b.lambda);
		j["tau1"] = json_number(b.tau1);
		j["tau2"] = json_number(b.tau2);
		j["tau3"] = json_number(b.tau3);
		j["tau2_half"] = json_number(b.tau2_half);
		j["distance"] = json_number(b.distance);
		j["tv"] = json_number(b.tv);
		j["avg_cost"] = json_number(b.avg_cost);
		j["avg_sigma"] = json_number(b.avg_sigma);
		j["avg_kinetic"] = json_number(b.avg_kinetic);
		j["avg_kinetic_half"] = json_number(b.avg_kinetic_half);
		j["avg_diffusion"] = json_number(b.avg_diffusion);
		j["sigma_finite"] = b.sigma_finite;
		j["perturbed_zeros"] = b.perturbed_zeros;
		arr.push_back(std::move(j));
	}
	ordered_json doc;
	doc["bounds"] = std::move(arr);
	return doc.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) throw IoError("cannot open '" + path + "' for reading");
	std::ostringstream ss;
	ss << in.rdbuf();
	if (in.bad()) throw IoError("read failure on '" + path + "'");
	return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
	std::ofstream out(path, std::ios::binary | std::ios::trunc);
	if (!out) throw IoError("cannot open '" + path + "' for writing");
	out << content;
	out.flush();
	if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace tsl
