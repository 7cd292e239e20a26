#pragma once

#include "soda/core.hpp"
#include "soda/engine.hpp"
#include "soda/sim.hpp"

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <vector>

namespace soda::io {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

// Detection stream: one JSON object per line,
//   {"sensor":"S2","x":..,"y":..,"pi":..,"rxx":..,"rxy":..,"ryy":..,
//    "truth":{"kind":"object","id":17}}
// `truth` is optional; {"kind":"clutter"} marks clutter. Unknown fields are
// ignored.

/// Throws DataError (naming the line) on malformed input. Blank lines are
/// skipped.
[[nodiscard]] Detection parse_detection(const std::string& line, std::size_t line_no = 0);
[[nodiscard]] std::string format_detection(const Detection& d);
[[nodiscard]] std::vector<Detection> read_detections(std::istream& in);
[[nodiscard]] std::vector<Detection> read_detections_file(const std::string& path);
void write_detections(std::ostream& out, const std::vector<Detection>& dets);

// truth.json: {"roi":{...},"objects":[{"id":0,"type":"A","x":..,"y":..}, ...]}
[[nodiscard]] ordered_json truth_to_json(const sim::ScenarioTruth& t);
[[nodiscard]] sim::ScenarioTruth truth_from_json(const json& j);

// Sensor suite (types + sensors), e.g. data/table1.json.
[[nodiscard]] ordered_json suite_to_json(const sim::SensorSuite& s);
[[nodiscard]] sim::SensorSuite suite_from_json(const json& j);

// Scenario layout, e.g. data/scenario_a.json.
[[nodiscard]] ordered_json scenario_to_json(const sim::ScenarioSpec& s);
[[nodiscard]] sim::ScenarioSpec scenario_from_json(const json& j);

// Engine state export: params, mode, next id, potentials (id, y, Y, w, l)
// and density entries. Round-trips losslessly.
[[nodiscard]] ordered_json engine_state_to_json(const EngineState& s);
[[nodiscard]] EngineState engine_state_from_json(const json& j);

[[nodiscard]] ordered_json estimates_to_json(const std::vector<EstimatedObject>& est);
[[nodiscard]] std::vector<EstimatedObject> estimates_from_json(const json& j);

/// Parses a whole JSON file; throws DataError on I/O or syntax errors.
[[nodiscard]] json read_json_file(const std::string& path);
/// Writes `j` pretty-printed; throws InvalidInput when the path is unwritable.
void write_json_file(const std::string& path, const ordered_json& j);
void write_text_file(const std::string& path, const std::string& text);

/// Shortest round-trip decimal representation.
[[nodiscard]] std::string format_double(double v);

}  // namespace soda::io
