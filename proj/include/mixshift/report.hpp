#pragma once

#include "mixshift/config.hpp"
#include "mixshift/engine.hpp"

#include <json.hpp>

#include <string>

namespace mixshift {

// Versioned report document ("schema_version": 1).  Serialization is
// deterministic: keys are sorted and rows carry a canonical order, so equal
// reports dump to identical bytes.
nlohmann::json report_to_json(const AnalysisReport& report, const Config& config);

std::string dump_report(const AnalysisReport& report, const Config& config);

// Pooled rows rendered as a fixed-width table with values at 4 significant
// digits; row order matches the JSON pooled array.
std::string render_table(const AnalysisReport& report);

std::string format_sig4(double v);

}  // namespace mixshift
