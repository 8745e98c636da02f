#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "swdpwr/engine.hpp"

namespace swdpwr {

using json = nlohmann::json;

/// Parses a scenario object. The design is an array of {count, allocation}.
/// Unknown keys and wrongly typed values raise E-INPUT; null means "not supplied".
ScenarioSpec spec_from_json(const json& j);
json spec_to_json(const ScenarioSpec& spec);

json design_to_json(const Design& design);
Design design_from_json(const json& j);

json report_to_json(const PowerReport& report);
json warnings_to_json(const Warnings& warnings);
json error_to_json(const Error& error);
json sweep_to_json(SweepParameter param, const std::vector<SweepPoint>& points);
std::string sweep_to_csv(SweepParameter param, const std::vector<SweepPoint>& points);

/// Half-away-from-zero rounding to three decimals, trailing zeros dropped ("1", "0.05").
std::string format_short(double x);
/// Same rounding, always three decimals ("0.050").
std::string format_fixed3(double x);

/// Two summary lines followed by the field block.
std::string render_text_report(const PowerReport& report);

}  // namespace swdpwr
