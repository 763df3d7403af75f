#include "tsl/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <string>

#include "doctest.h"
#include "test_support.hpp"
#include "tsl/errors.hpp"
#include "tsl/flow.hpp"

using namespace tsl;

namespace {

/** Unique-ish scratch path under the build tree's working directory. */
std::string scratch_path(const std::string& name) { return "io_scratch_" + name; }

}  // namespace

TEST_CASE("inline measure descriptions") {
	const Measure d = parse_measure("delta:3", 5);
	CHECK(d[2] == 1.0);
	CHECK(d.total() == doctest::Approx(1.0));

	const Measure u = parse_measure("uniform", 4);
	CHECK(u[0] == doctest::Approx(0.25));
	CHECK(u.total() == doctest::Approx(1.0));

	CHECK_THROWS_AS(parse_measure("delta:0", 5), ParseError);
	CHECK_THROWS_AS(parse_measure("delta:6", 5), ParseError);
	CHECK_THROWS_AS(parse_measure("delta:x", 5), ParseError);
	CHECK_THROWS_AS(parse_measure("gauss:2", 5), ParseError);
	CHECK_THROWS_AS(parse_measure("uniform", 0), ParseError);
}

TEST_CASE("measure files round-trip") {
	const std::string path = scratch_path("measure.csv");
	write_text_file(path, "0.25, 0.5\n0.125,0.125\n");
	const Measure m = parse_measure("csv:" + path, 4);
	CHECK(m[1] == 0.5);
	CHECK(m[3] == 0.125);

	CHECK_THROWS_AS(parse_measure("csv:" + path, 3), ParseError);
	write_text_file(path, "0.25, spam\n");
	CHECK_THROWS_AS(parse_measure("csv:" + path, 2), ParseError);
	CHECK_THROWS_AS(parse_measure("csv:/no/such/dir/file.csv", 2), IoError);
	std::remove(path.c_str());
}

TEST_CASE("trajectory CSV layout and determinism") {
	const Graph g = Graph::chain(3);
	FlowTrajectory traj;
	traj.graph = g;
	traj.times = {0.0, 0.5};
	traj.measures = {Measure({1.0, 0.0, 0.0}), Measure({0.5, 0.5, 0.0})};
	FlowField f0 = FlowField::zero(g);
	f0.edge[0] = 1.0;
	FlowField f1 = FlowField::zero(g);
	f1.edge[0] = 1.0;
	f1.external[2] = 0.25;
	traj.flows = {f0, f1};

	const std::string csv = trajectory_csv(traj);
	CHECK(csv == trajectory_csv(traj));  // byte-stable
	const std::string header = csv.substr(0, csv.find('\n'));
	CHECK(header == "t,x0,x1,x2,fext0,fext1,fext2,f0_1,f1_2");
	CHECK(csv.find("\n0,1,0,0,0,0,0,1,0\n") != std::string::npos);
	CHECK(csv.find("\n0.5,0.5,0.5,0,0,0,0.25,1,0\n") != std::string::npos);

	traj.flows.pop_back();
	CHECK_THROWS_AS(trajectory_csv(traj), LengthMismatch);
}

TEST_CASE("bound report JSON schema") {
	BoundReport r;
	r.tau = 1.5;
	r.lambda = Lambda::finite(0.5);
	r.distance = 9.0;
	r.avg_velocity = 6.0;
	r.tau_bound = 1.5;
	r.saturation_ratio = 1.0;
	const std::string text = bound_report_json_text(r);
	CHECK(text == bound_report_json_text(r));

	const auto j = nlohmann::json::parse(text);
	CHECK(j.at("tau").get<double>() == 1.5);
	CHECK(j.at("lambda").get<double>() == 0.5);
	CHECK(j.at("distance").get<double>() == 9.0);
	CHECK(j.at("avg_velocity").get<double>() == 6.0);
	CHECK(j.at("tau_bound").get<double>() == 1.5);
	CHECK(j.at("saturation_ratio").get<double>() == 1.0);

	r.lambda = Lambda::infinite();
	const auto ji = nlohmann::json::parse(bound_report_json_text(r));
	CHECK(ji.at("lambda").get<std::string>() == "inf");
}

TEST_CASE("bound hierarchy sweep JSON") {
	CrnBounds b;
	b.tau = 0.25;
	b.lambda = Lambda::finite(0.5);
	b.tau1 = 0.24;
	b.tau2 = 0.2;
	b.tau3 = 0.1;
	b.tau2_half = 0.2;
	b.distance = 1.0;
	b.tv = 1.0;
	const std::string text = crn_sweep_json_text({b, b});
	const auto j = nlohmann::json::parse(text);
	REQUIRE(j.at("bounds").size() == 2);
	CHECK(j["bounds"][0].at("tau").get<double>() == 0.25);
	CHECK(j["bounds"][1].at("tau3").get<double>() == 0.1);
	CHECK(j["bounds"][0].at("sigma_finite").get<bool>());
	CHECK_FALSE(j["bounds"][0].at("perturbed_zeros").get<bool>());

	CHECK(crn_sweep_json_text({}) == "{\n  \"bounds\": []\n}\n");
}

TEST_CASE("text file helpers") {
	const std::string path = scratch_path("roundtrip.txt");
	write_text_file(path, "line one\nline two\n");
	CHECK(read_text_file(path) == "line one\nline two\n");
	std::remove(path.c_str());

	CHECK_THROWS_AS(read_text_file("io_scratch_missing_file.txt"), IoError);
	CHECK_THROWS_AS(write_text_file("/no/such/dir/out.txt", "x"), IoError);
}
