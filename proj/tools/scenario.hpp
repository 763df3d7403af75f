#pragma once

#include <cstdint>
#include <exception>
#include <string>
#include <vector>

namespace tsl::cli {

/** Exit codes: scripts triage on these. */
constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;     // schema/parse/file problems
constexpr int kExitInvariant = 3;  // a model or bound invariant failed
constexpr int kExitNumeric = 4;    // integration/eigensolver numeric failure

/** Result of executing one config document (single scenario or list). */
struct RunOutcome {
	int code = kExitOk;
	std::string output;  // deterministic stdout text
	std::string error;   // stderr text when code != kExitOk
};

/**
 * Parse and execute a config document given as JSON text.  Relative paths in
 * the document (graph files, measure files, output directories) resolve
 * against base_dir.  Never throws: failures are reported via the outcome.
 */
RunOutcome run_config_text(const std::string& json_text, const std::string& base_dir = ".");

/** Load a config file and run it; paths resolve against the file's directory. */
RunOutcome run_config_file(const std::string& path);

/** One verification suite outcome. */
struct SuiteResult {
	std::string name;
	bool pass = false;
	std::string detail;
	double seconds = 0.0;
};

/**
 * The seven release verification suites, in fixed order.  `quick` shrinks
 * instance counts for a fast smoke run; the full versions enforce the
 * documented instance counts and tolerances.
 */
std::vector<SuiteResult> run_verification(bool quick, std::uint64_t seed);

/** Exit-code category for an exception escaping scenario execution. */
int classify_error(const std::exception& e);

}  // namespace tsl::cli
