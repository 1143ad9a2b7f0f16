#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/engine.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mixshift {

// Full analysis configuration: file-level fields plus the engine settings.
// An optional JSON config file mirrors every CLI flag; flags win on conflict.
struct Config {
    std::string data_path;
    std::string outcome;
    std::vector<std::string> exposures;
    std::vector<std::string> covariates;
    EngineSettings engine;
    std::uint64_t seed = 0;
    std::string output_path;

    std::map<std::string, Role> roles() const;
    // Sorts names, checks disjointness and presence, resolves deltas.
    void validate() const;
};

// Parses the JSON config file (see README for the schema).  Unknown keys are
// rejected so typos do not silently fall back to defaults.
Config load_config_file(const std::string& path);

// Parses "1.5" (every exposure) or "A1=1,A2=0.5" (per-exposure overrides)
// into the engine delta fields.
void apply_delta_flag(EngineSettings& engine, const std::string& flag);

}  // namespace mixshift
