#pragma once

#include <string>
#include <vector>

#include "tsl/crn.hpp"
#include "tsl/flow.hpp"
#include "tsl/measure.hpp"

namespace tsl {

/**
 * Measure from an inline description:
 *   - "delta:<vertex>"  unit mass on one vertex, 1-based numbering
 *   - "uniform"         total mass 1 spread evenly
 *   - "csv:<path>"      one value per line (or comma separated), n values
 * Throws ParseError for malformed text or wrong value counts, IoError for
 * unreadable files.
 */
Measure parse_measure(const std::string& text, int n);

/**
 * Plot-ready CSV for a trajectory: header row, then one row per grid point
 * with columns t, x<i> per vertex, fext<i> per vertex, f<u>_<v> per edge.
 * Values are printed with "%.17g" so files round-trip and are byte-stable.
 */
std::string trajectory_csv(const FlowTrajectory& traj);

/** Bound report as a pretty-printed JSON object (fixed key order). */
std::string bound_report_json_text(const BoundReport& report);

/** Several bound reports as a JSON document {"reports": [...]}. */
std::string bound_reports_json_text(const std::vector<BoundReport>& reports);

/** Bound-hierarchy sweep as a JSON document {"bounds": [...]}. */
std::string crn_sweep_json_text(const std::vector<CrnBounds>& sweep);

/** Whole-file text IO; throws IoError with the path in the message. */
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace tsl
