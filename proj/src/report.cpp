#include "mixshift/report.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>

namespace mixshift {

using nlohmann::json;

namespace {

json grid_names(const LearnerGrid& grid) {
    json arr = json::array();
    for (const auto& c : grid.candidates) arr.push_back(c.name);
    return arr;
}

std::string outcome_kind_name(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::Auto: return "auto";
        case OutcomeKind::Binary: return "yes";
        case OutcomeKind::Continuous: return "no";
    }
    return "auto";
}

json estimate_json(const ParamKey& key, double psi, double se, double lo, double hi, double p) {
    json j;
    j["exposure_set"] = key.exposure_set;
    j["kind"] = estimand_kind_name(key.kind);
    j["target"] = key.target;
    j["psi"] = psi;
    j["se"] = se;
    j["ci"] = json::array({lo, hi});
    j["p_value"] = p;
    return j;
}

}  // namespace

json report_to_json(const AnalysisReport& report, const Config& config) {
    json j;
    j["schema_version"] = 1;
    j["seed"] = report.seed;
    j["n_rows"] = report.n_rows;

    json cfg;
    cfg["data"] = config.data_path;
    cfg["outcome"] = config.outcome;
    cfg["exposures"] = config.exposures;
    cfg["covariates"] = config.covariates;
    json delta;
    for (const auto& e : config.exposures) delta[e] = report.settings.delta_for(e);
    cfg["delta"] = delta;
    cfg["folds"] = report.settings.folds;
    cfg["f_quantile"] = report.settings.f_quantile;
    cfg["lambda"] = report.settings.lambda;
    cfg["reduce_frac"] = report.settings.reduce_frac;
    cfg["density_kind"] = density_kind_name(report.settings.density_kind);
    cfg["binary_outcome"] = outcome_kind_name(report.settings.outcome_kind);
    cfg["learners"] = {{"discovery", grid_names(report.settings.discovery)},
                       {"outcome", grid_names(report.settings.outcome)},
                       {"density", grid_names(report.settings.density_mean)},
                       {"inner_folds", report.settings.discovery.inner_folds}};
    j["config"] = cfg;
    j["outcome_scale"] = json::array({report.scaling.y_min, report.scaling.y_max});

    json pooled = json::array();
    for (const auto& row : report.pooled) {
        json r = estimate_json(row.key, row.psi, row.se, row.ci_lo, row.ci_hi, row.p_value);
        r["n_folds_found"] = row.n_folds_found;
        r["n_folds_total"] = row.n_folds_total;
        r["delta"] = row.delta_pooled;
        r["pooling_mode"] = pooling_mode_name(row.mode);
        if (row.key.kind != EstimandKind::Interaction) r["e_delta_y"] = row.e_delta_y;
        pooled.push_back(std::move(r));
    }
    j["pooled"] = std::move(pooled);

    json folds = json::array();
    for (const auto& fr : report.folds) {
        json f;
        f["fold"] = fr.fold;
        f["selected_sets"] = fr.selected_sets;
        json ests = json::array();
        for (const auto& rec : fr.estimates) {
            json e = estimate_json(rec.key, rec.estimate.psi, rec.estimate.se, rec.estimate.ci_lo,
                                   rec.estimate.ci_hi, rec.estimate.p_value);
            if (rec.key.kind != EstimandKind::Interaction) e["e_delta_y"] = rec.e_delta_y;
            ests.push_back(std::move(e));
        }
        f["estimates"] = std::move(ests);
        f["delta"] = fr.delta_used;
        f["diagnostics"] = {{"discovery_learner", fr.discovery_learner},
                            {"outcome_learner", fr.outcome_learner},
                            {"capped_h", fr.capped_h}};
        folds.push_back(std::move(f));
    }
    j["folds"] = std::move(folds);
    return j;
}

std::string dump_report(const AnalysisReport& report, const Config& config) {
    return report_to_json(report, config).dump(2) + "\n";
}

std::string format_sig4(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string render_table(const AnalysisReport& report) {
    std::vector<std::array<std::string, 9>> rows;
    rows.push_back({"exposure_set", "kind", "target", "psi", "se", "ci_lo", "ci_hi", "p_value",
                    "folds"});
    for (const auto& row : report.pooled) {
        std::string set;
        for (std::size_t i = 0; i < row.key.exposure_set.size(); ++i) {
            if (i) set += ",";
            set += row.key.exposure_set[i];
        }
        std::ostringstream folds;
        folds << row.n_folds_found << "/" << row.n_folds_total;
        if (row.mode == PoolingMode::InverseVarianceNull) folds << "*";
        rows.push_back({set, estimand_kind_name(row.key.kind), row.key.target,
                        format_sig4(row.psi), format_sig4(row.se), format_sig4(row.ci_lo),
                        format_sig4(row.ci_hi), format_sig4(row.p_value), folds.str()});
    }

    std::array<std::size_t, 9> width{};
    for (const auto& r : rows)
        for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());

    std::ostringstream os;
    for (std::size_t ri = 0; ri < rows.size(); ++ri) {
        for (std::size_t c = 0; c < rows[ri].size(); ++c) {
            os << rows[ri][c] << std::string(width[c] - rows[ri][c].size() + 2, ' ');
        }
        os << "\n";
        if (ri == 0) {
            std::size_t total = 0;
            for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + 2;
            os << std::string(total, '-') << "\n";
        }
    }
    if (report.pooled.empty()) os << "(no exposure sets selected in any fold)\n";
    return os.str();
}

}  // namespace mixshift
