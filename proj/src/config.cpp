#include "mixshift/config.hpp"

#include "mixshift/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mixshift {

using nlohmann::json;

std::map<std::string, Role> Config::roles() const {
    std::map<std::string, Role> out;
    out[outcome] = Role::Outcome;
    for (const auto& e : exposures) out[e] = Role::Exposure;
    for (const auto& w : covariates) out[w] = Role::Covariate;
    return out;
}

void Config::validate() const {
    if (data_path.empty()) throw ConfigError("no data file given (--data)");
    if (outcome.empty()) throw ConfigError("no outcome column given (--outcome)");
    if (exposures.empty()) throw ConfigError("no exposure columns given (--exposures)");
    std::set<std::string> seen;
    seen.insert(outcome);
    for (const auto& e : exposures)
        if (!seen.insert(e).second) throw ConfigError("column '" + e + "' declared twice");
    for (const auto& w : covariates)
        if (!seen.insert(w).second) throw ConfigError("column '" + w + "' declared twice");
    for (const auto& [name, d] : engine.delta) {
        if (std::find(exposures.begin(), exposures.end(), name) == exposures.end())
            throw ConfigError("delta given for '" + name + "', which is not an exposure");
        if (!std::isfinite(d) || d == 0.0)
            throw ConfigError("delta for '" + name + "' must be finite and nonzero");
    }
    if (!std::isfinite(engine.default_delta) || engine.default_delta == 0.0)
        throw ConfigError("delta must be finite and nonzero");
    if (engine.folds < 2) throw ConfigError("fold count must be at least 2");
    if (engine.f_quantile < 0.0 || engine.f_quantile > 1.0)
        throw ConfigError("f_quantile must lie in [0,1]");
}

void apply_delta_flag(EngineSettings& engine, const std::string& flag) {
    if (flag.find('=') == std::string::npos) {
        try {
            engine.default_delta = std::stod(flag);
        } catch (const std::exception&) {
            throw ConfigError("cannot parse delta '" + flag + "'");
        }
        return;
    }
    std::stringstream ss(flag);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("cannot parse delta entry '" + item + "' (expected NAME=VALUE)");
        const std::string name = item.substr(0, eq);
        try {
            engine.delta[name] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw ConfigError("cannot parse delta value in '" + item + "'");
        }
    }
}

namespace {

LearnerSpec learner_from_json(const json& j) {
    if (!j.contains("name") || !j.contains("type"))
        throw ConfigError("each learner needs a 'name' and a 'type'");
    const std::string name = j.at("name").get<std::string>();
    const std::string type = j.at("type").get<std::string>();
    if (type == "linear") {
        LinearSpec spec;
        spec.penalty = j.value("penalty", 0.0);
        return LearnerSpec{name, spec};
    }
    if (type == "mars") {
        MarsHyper h;
        h.max_degree = j.value("max_degree", 2);
        h.max_terms = j.value("max_terms", 21);
        h.knot_grid_size = j.value("knot_grid_size", 9);
        h.prune = j.value("prune", true);
        return LearnerSpec{name, h};
    }
    throw ConfigError("unknown learner type '" + type + "' (expected linear or mars)");
}

LearnerGrid grid_from_json(const json& arr, int inner_folds) {
    LearnerGrid g;
    g.inner_folds = inner_folds;
    for (const auto& j : arr) g.candidates.push_back(learner_from_json(j));
    if (g.candidates.empty()) throw ConfigError("learner grid in config file is empty");
    return g;
}

}  // namespace

Config load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
    }

    static const std::set<std::string> known = {
        "data",        "outcome", "exposures",   "covariates",     "delta",
        "folds",       "f_quantile", "lambda",   "reduce_frac",    "density_kind",
        "seed",        "out",     "threads",     "binary_outcome", "learners",
    };
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");

    Config cfg;
    cfg.data_path = j.value("data", "");
    cfg.outcome = j.value("outcome", "");
    if (j.contains("exposures")) cfg.exposures = j.at("exposures").get<std::vector<std::string>>();
    if (j.contains("covariates")) cfg.covariates = j.at("covariates").get<std::vector<std::string>>();
    if (j.contains("delta")) {
        if (j.at("delta").is_number()) {
            cfg.engine.default_delta = j.at("delta").get<double>();
        } else {
            cfg.engine.delta = j.at("delta").get<std::map<std::string, double>>();
        }
    }
    cfg.engine.folds = j.value("folds", 10);
    cfg.engine.f_quantile = j.value("f_quantile", 0.0);
    cfg.engine.lambda = j.value("lambda", 50.0);
    cfg.engine.reduce_frac = j.value("reduce_frac", 0.1);
    if (j.contains("density_kind"))
        cfg.engine.density_kind = parse_density_kind(j.at("density_kind").get<std::string>());
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output_path = j.value("out", "");
    cfg.engine.threads = j.value("threads", 0);
    if (j.contains("binary_outcome")) {
        const std::string b = j.at("binary_outcome").get<std::string>();
        if (b == "auto") cfg.engine.outcome_kind = OutcomeKind::Auto;
        else if (b == "yes") cfg.engine.outcome_kind = OutcomeKind::Binary;
        else if (b == "no") cfg.engine.outcome_kind = OutcomeKind::Continuous;
        else throw ConfigError("binary_outcome must be auto, yes, or no");
    }
    if (j.contains("learners")) {
        const json& l = j.at("learners");
        const int inner = l.value("inner_folds", 5);
        if (l.contains("discovery")) cfg.engine.discovery = grid_from_json(l.at("discovery"), inner);
        if (l.contains("outcome")) cfg.engine.outcome = grid_from_json(l.at("outcome"), inner);
        if (l.contains("density")) cfg.engine.density_mean = grid_from_json(l.at("density"), inner);
        cfg.engine.discovery.inner_folds = inner;
        cfg.engine.outcome.inner_folds = inner;
        cfg.engine.density_mean.inner_folds = inner;
    }
    return cfg;
}

}  // namespace mixshift
