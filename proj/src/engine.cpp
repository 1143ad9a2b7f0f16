#include "mixshift/engine.hpp"

#include "mixshift/errors.hpp"
#include "mixshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <tuple>

namespace mixshift {

double EngineSettings::delta_for(const std::string& exposure) const {
    auto it = delta.find(exposure);
    return it == delta.end() ? default_delta : it->second;
}

bool ParamKey::operator<(const ParamKey& o) const {
    return std::tie(exposure_set, kind, target) < std::tie(o.exposure_set, o.kind, o.target);
}

bool ParamKey::operator==(const ParamKey& o) const {
    return exposure_set == o.exposure_set && kind == o.kind && target == o.target;
}

std::string pooling_mode_name(PoolingMode m) {
    return m == PoolingMode::Plain ? "plain" : "inverse_variance_null";
}

double adapt_delta(const CondDensityFit& g, const Dataset& training_rows, double delta0,
                   double lambda, double reduce_frac) {
    if (delta0 == 0.0 || !std::isfinite(delta0))
        throw ConfigError("adapt_delta requires a finite nonzero starting delta");
    if (!(reduce_frac > 0.0 && reduce_frac < 1.0))
        throw ConfigError("reduce_frac must lie strictly between 0 and 1");

    double delta = delta0;
    const double log_lambda = std::log(lambda);
    for (int j = 0; j <= 100; ++j) {
        const ShiftSpec spec = make_shift(g.exposure, delta);
        const DensityRatio r =
            density_ratio(g, training_rows, spec, std::numeric_limits<double>::infinity());
        if (r.max_log_uncapped <= log_lambda) return delta;
        delta *= 1.0 - reduce_frac;
    }
    throw PositivityError("no admissible delta for exposure '" + g.exposure +
                          "' after 100 reductions from " + std::to_string(delta0));
}

namespace {

std::vector<std::string> predictor_names(const Dataset& d) {
    std::vector<std::string> names = d.exposures();
    for (const auto& w : d.covariates()) names.push_back(w);
    return names;
}

Eigen::VectorXd original_outcome(const Dataset& scaled_rows, const ScalingRecord& scaling) {
    const Eigen::VectorXd ys = to_vector(scaled_rows.outcome());
    Eigen::VectorXd y(ys.size());
    for (Eigen::Index i = 0; i < ys.size(); ++i) y[i] = scaling.from_unit(ys[i]);
    return y;
}

// Validation rows are stored with the scaled outcome; build_shift_rows
// re-scales, so hand it the original-scale outcome column.
Dataset with_original_outcome(const Dataset& scaled_rows, const ScalingRecord& scaling) {
    const Eigen::VectorXd y = original_outcome(scaled_rows, scaling);
    return scaled_rows.with_column(scaled_rows.outcome_name(), to_std(y));
}

}  // namespace

FoldResult run_fold(int k, const Dataset& data_scaled, const ScalingRecord& scaling,
                    const FoldAssignment& folds, const EngineSettings& cfg, std::uint64_t seed) {
    if (k < 1 || k > folds.k) throw ConfigError("fold index out of range");

    FoldResult out;
    out.fold = k;

    const Dataset train = data_scaled.subset(folds.training_rows(k));
    const Dataset valid_scaled = data_scaled.subset(folds.validation_rows(k));
    const Dataset valid = with_original_outcome(valid_scaled, scaling);
    out.valid_y = to_vector(valid.outcome());

    const std::vector<std::string> predictors = predictor_names(data_scaled);
    const Frame x_train = make_frame(train, predictors);
    const Eigen::VectorXd y_train = to_vector(train.outcome());

    const CvSelection discovery = cv_select(cfg.discovery, x_train, y_train, mix_seed(seed, 0xd15cULL));
    out.discovery_learner = cfg.discovery.candidates[discovery.winner].name;

    const std::vector<BasisFunction> bases = extract_bases(discovery.fit);
    if (bases.empty()) return out;
    const Type3Result t3 = type3_f(bases, x_train, y_train);
    const std::vector<VariableSetScore> scores =
        aggregate_and_threshold(t3, bases, data_scaled.roles(), cfg.f_quantile);
    if (scores.empty()) return out;
    for (const auto& s : scores) out.selected_sets.push_back(s.exposure_set);
    std::sort(out.selected_sets.begin(), out.selected_sets.end());

    const CvSelection q_sel = cv_select(cfg.outcome, x_train, y_train, mix_seed(seed, 0x0bULL));
    out.outcome_learner = cfg.outcome.candidates[q_sel.winner].name;

    // Densities condition on the covariates only; the second factor of a
    // joint additionally conditions on the first exposure.
    const Frame w_train = make_frame(train, train.covariates());
    std::map<std::string, CondDensityFit> g_single;
    std::map<std::vector<std::string>, JointDensityFit> g_pair;
    std::uint64_t salt = 0;
    for (const auto& set : out.selected_sets) {
        for (const auto& e : set) {
            if (g_single.count(e)) continue;
            g_single.emplace(e, fit_cond_density(to_vector(train.column(e)), w_train, e,
                                                 cfg.density_kind, cfg.density_mean,
                                                 mix_seed(seed, 0xdeULL, ++salt)));
            out.delta_used[e] =
                adapt_delta(g_single.at(e), train, cfg.delta_for(e), cfg.lambda, cfg.reduce_frac);
        }
        if (set.size() == 2) {
            JointDensityFit joint;
            joint.first = g_single.at(set[0]);
            const Frame ctx2 = w_train.with_column(set[0], to_vector(train.column(set[0])));
            joint.second = fit_cond_density(to_vector(train.column(set[1])), ctx2, set[1],
                                            cfg.density_kind, cfg.density_mean,
                                            mix_seed(seed, 0xdfULL, ++salt));
            g_pair.emplace(set, std::move(joint));
        }
    }

    const TmleEstimate mean_y_est = estimate_mean_y(out.valid_y);

    for (const auto& set : out.selected_sets) {
        if (set.size() == 1) {
            const std::string& e = set[0];
            const ShiftSpec spec = make_shift(e, out.delta_used.at(e));
            ShiftRows rows =
                build_shift_rows(valid, spec, q_sel.fit, DensityFit{g_single.at(e)}, scaling, cfg.lambda);
            out.capped_h += rows.n_capped;
            const TmleEstimate level =
                target_shift_rows(rows, scaling, EstimandKind::Individual, spec);
            const ParamKey key{set, EstimandKind::Individual, e};
            out.estimates.push_back({key, shift_contrast(level, mean_y_est), level.psi});
            out.rows.emplace(key, std::move(rows));
            continue;
        }

        const std::string& e1 = set[0];
        const std::string& e2 = set[1];
        const double d1 = out.delta_used.at(e1);
        const double d2 = out.delta_used.at(e2);
        const ShiftSpec spec_joint = make_shift(e1, d1, e2, d2);
        const ShiftSpec spec1 = make_shift(e1, d1);
        const ShiftSpec spec2 = make_shift(e2, d2);

        ShiftRows rows_joint = build_shift_rows(valid, spec_joint, q_sel.fit,
                                                DensityFit{g_pair.at(set)}, scaling, cfg.lambda);
        ShiftRows rows_1 =
            build_shift_rows(valid, spec1, q_sel.fit, DensityFit{g_single.at(e1)}, scaling, cfg.lambda);
        ShiftRows rows_2 =
            build_shift_rows(valid, spec2, q_sel.fit, DensityFit{g_single.at(e2)}, scaling, cfg.lambda);
        out.capped_h += rows_joint.n_capped + rows_1.n_capped + rows_2.n_capped;

        const TmleEstimate joint_level =
            target_shift_rows(rows_joint, scaling, EstimandKind::Joint, spec_joint);
        const TmleEstimate ind1_level =
            target_shift_rows(rows_1, scaling, EstimandKind::Individual, spec1);
        const TmleEstimate ind2_level =
            target_shift_rows(rows_2, scaling, EstimandKind::Individual, spec2);
        const TmleEstimate interaction =
            estimate_interaction(joint_level, ind1_level, ind2_level, mean_y_est);

        const ParamKey key_joint{set, EstimandKind::Joint, ""};
        const ParamKey key_1{set, EstimandKind::Individual, e1};
        const ParamKey key_2{set, EstimandKind::Individual, e2};
        const ParamKey key_inter{set, EstimandKind::Interaction, ""};
        out.estimates.push_back({key_joint, shift_contrast(joint_level, mean_y_est), joint_level.psi});
        out.estimates.push_back({key_1, shift_contrast(ind1_level, mean_y_est), ind1_level.psi});
        out.estimates.push_back({key_2, shift_contrast(ind2_level, mean_y_est), ind2_level.psi});
        out.estimates.push_back({key_inter, interaction, 0.0});
        out.rows.emplace(key_joint, std::move(rows_joint));
        out.rows.emplace(key_1, std::move(rows_1));
        out.rows.emplace(key_2, std::move(rows_2));
    }

    std::sort(out.estimates.begin(), out.estimates.end(),
              [](const FoldEstimateRecord& a, const FoldEstimateRecord& b) { return a.key < b.key; });
    return out;
}

namespace {

PooledResult pooled_from_estimate(const ParamKey& key, const TmleEstimate& est, double e_delta_y,
                                  int n1, int k_total,
                                  const std::map<std::string, double>& delta_pooled) {
    PooledResult row;
    row.key = key;
    row.psi = est.psi;
    row.se = est.se;
    row.ci_lo = est.ci_lo;
    row.ci_hi = est.ci_hi;
    row.p_value = est.p_value;
    row.n_folds_found = n1;
    row.n_folds_total = k_total;
    row.delta_pooled = delta_pooled;
    row.mode = PoolingMode::Plain;
    row.e_delta_y = e_delta_y;
    return row;
}

std::map<std::string, double> mean_delta_over(const std::vector<const FoldResult*>& frs,
                                              const std::vector<std::string>& exposures) {
    std::map<std::string, double> out;
    for (const auto& e : exposures) {
        double acc = 0.0;
        int cnt = 0;
        for (const FoldResult* fr : frs) {
            auto it = fr->delta_used.find(e);
            if (it != fr->delta_used.end()) {
                acc += it->second;
                ++cnt;
            }
        }
        if (cnt > 0) out[e] = acc / static_cast<double>(cnt);
    }
    return out;
}

}  // namespace

std::vector<PooledResult> pool(const std::vector<FoldResult>& fold_results,
                               const ScalingRecord& scaling, int n_folds_total) {
    // Gather every parameter that appears in at least one fold.
    std::map<ParamKey, std::vector<const FoldResult*>> where;
    for (const auto& fr : fold_results)
        for (const auto& [key, rows] : fr.rows) where[key].push_back(&fr);

    std::vector<PooledResult> out;

    auto stack_rows = [](const std::vector<const FoldResult*>& frs, const ParamKey& key) {
        ShiftRows stacked;
        bool first = true;
        for (const FoldResult* fr : frs) {
            const ShiftRows& r = fr->rows.at(key);
            if (first) {
                stacked = r;
                first = false;
            } else {
                stacked.append(r);
            }
        }
        return stacked;
    };
    auto stack_y = [](const std::vector<const FoldResult*>& frs) {
        Eigen::Index total = 0;
        for (const FoldResult* fr : frs) total += fr->valid_y.size();
        Eigen::VectorXd y(total);
        Eigen::Index at = 0;
        for (const FoldResult* fr : frs) {
            y.segment(at, fr->valid_y.size()) = fr->valid_y;
            at += fr->valid_y.size();
        }
        return y;
    };

    // Individual and joint parameters: one shared fluctuation per parameter
    // on the stacked validation rows; the reported effect is the targeted
    // level minus the stacked-sample mean outcome.
    for (const auto& [key, frs] : where) {
        if (key.kind == EstimandKind::Interaction) continue;
        const ShiftRows stacked = stack_rows(frs, key);
        const TmleEstimate level = target_shift_rows(stacked, scaling, key.kind, std::nullopt);
        const TmleEstimate mean_y = estimate_mean_y(stack_y(frs));
        const TmleEstimate contrast = shift_contrast(level, mean_y);
        const std::vector<std::string> involved =
            key.kind == EstimandKind::Joint ? key.exposure_set
                                            : std::vector<std::string>{key.target};
        out.push_back(pooled_from_estimate(key, contrast, level.psi, static_cast<int>(frs.size()),
                                           n_folds_total, mean_delta_over(frs, involved)));
    }

    // Interactions: re-target each component on the pair's stacked rows and
    // combine with the delta method.
    for (const auto& fr : fold_results) {
        for (const auto& rec : fr.estimates) {
            if (rec.key.kind != EstimandKind::Interaction) continue;
            const ParamKey key = rec.key;
            if (std::any_of(out.begin(), out.end(),
                            [&](const PooledResult& r) { return r.key == key; }))
                continue;
            const ParamKey key_joint{key.exposure_set, EstimandKind::Joint, ""};
            const ParamKey key_1{key.exposure_set, EstimandKind::Individual, key.exposure_set[0]};
            const ParamKey key_2{key.exposure_set, EstimandKind::Individual, key.exposure_set[1]};
            const auto& frs = where.at(key_joint);
            const TmleEstimate joint_level =
                target_shift_rows(stack_rows(frs, key_joint), scaling, EstimandKind::Joint, std::nullopt);
            const TmleEstimate ind1_level = target_shift_rows(stack_rows(frs, key_1), scaling,
                                                              EstimandKind::Individual, std::nullopt);
            const TmleEstimate ind2_level = target_shift_rows(stack_rows(frs, key_2), scaling,
                                                              EstimandKind::Individual, std::nullopt);
            const TmleEstimate mean_y = estimate_mean_y(stack_y(frs));
            const TmleEstimate inter = estimate_interaction(joint_level, ind1_level, ind2_level, mean_y);
            out.push_back(pooled_from_estimate(key, inter, 0.0, static_cast<int>(frs.size()),
                                               n_folds_total, mean_delta_over(frs, key.exposure_set)));
        }
    }

    std::sort(out.begin(), out.end(),
              [](const PooledResult& a, const PooledResult& b) { return a.key < b.key; });
    return out;
}

PooledResult pool_with_null(const PooledResult& pooled, int n0, int n1) {
    if (n0 == 0) return pooled;
    if (n0 < 0 || n1 < 1) throw ConfigError("pool_with_null needs n0 >= 0 and n1 >= 1");
    const double var = pooled.se * pooled.se;
    if (var <= 0.0)
        throw DataError("pooled variance is zero; cannot blend with the implied null");

    const double var_null = var * static_cast<double>(n1) / static_cast<double>(n0);
    const double w1 = 1.0 / var;
    const double w0 = 1.0 / var_null;
    PooledResult out = pooled;
    out.psi = (w1 * pooled.psi) / (w0 + w1);  // null contributes w0 * 0
    const double var_star = 1.0 / (w0 + w1);
    out.se = std::sqrt(var_star);
    out.ci_lo = out.psi - 1.96 * out.se;
    out.ci_hi = out.psi + 1.96 * out.se;
    out.p_value = out.se > 0.0 ? two_sided_p(out.psi / out.se) : (out.psi == 0.0 ? 1.0 : 0.0);
    out.mode = PoolingMode::InverseVarianceNull;
    return out;
}

AnalysisReport run(const Dataset& data, const EngineSettings& cfg, std::uint64_t seed) {
    if (cfg.f_quantile < 0.0 || cfg.f_quantile > 1.0) throw ConfigError("f_quantile must be in [0,1]");
    if (!(cfg.lambda > 1.0)) throw ConfigError("lambda must exceed 1");
    if (!(cfg.reduce_frac > 0.0 && cfg.reduce_frac < 1.0))
        throw ConfigError("reduce_frac must lie strictly between 0 and 1");
    for (const auto& e : data.exposures()) {
        const double d = cfg.delta_for(e);
        if (!std::isfinite(d) || d == 0.0)
            throw ConfigError("delta for exposure '" + e + "' must be finite and nonzero");
    }

    const FoldAssignment folds = make_folds(data.n(), cfg.folds, seed);
    const auto [scaled, scaling] = scale_outcome(data, cfg.outcome_kind);

    std::vector<FoldResult> results(static_cast<std::size_t>(cfg.folds));
    std::vector<std::string> failures(static_cast<std::size_t>(cfg.folds));
    parallel_for(static_cast<std::size_t>(cfg.folds), cfg.threads, [&](std::size_t i) {
        const int k = static_cast<int>(i) + 1;
        try {
            results[i] = run_fold(k, scaled, scaling, folds, cfg, mix_seed(seed, 0xf01dULL, i));
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
    std::string all_failures;
    for (std::size_t i = 0; i < failures.size(); ++i)
        if (!failures[i].empty())
            all_failures += "\n  fold " + std::to_string(i + 1) + ": " + failures[i];
    if (!all_failures.empty()) throw NumericError("fold estimation failed:" + all_failures);

    AnalysisReport report;
    report.folds = std::move(results);
    report.pooled = pool(report.folds, scaling, cfg.folds);
    for (auto& row : report.pooled)
        if (row.n_folds_found < cfg.folds)
            row = pool_with_null(row, cfg.folds - row.n_folds_found, row.n_folds_found);
    report.settings = cfg;
    report.seed = seed;
    report.scaling = scaling;
    report.n_rows = data.n();
    return report;
}

}  // namespace mixshift
