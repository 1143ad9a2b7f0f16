#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/density.hpp"
#include "mixshift/discovery.hpp"
#include "mixshift/learners.hpp"
#include "mixshift/tmle.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mixshift {

// Estimation settings consumed by the engine (the CLI layers file/report
// locations on top).
struct EngineSettings {
    int folds = 10;
    double f_quantile = 0.0;
    double lambda = 50.0;
    double reduce_frac = 0.1;
    DensityKind density_kind = DensityKind::HOSE;
    std::map<std::string, double> delta;  // per-exposure overrides
    double default_delta = 1.0;
    OutcomeKind outcome_kind = OutcomeKind::Auto;
    int threads = 1;
    LearnerGrid discovery = discovery_grid();
    LearnerGrid outcome = outcome_grid();
    LearnerGrid density_mean = density_mean_grid();

    double delta_for(const std::string& exposure) const;
};

// Identifies one reported parameter: the exposure set it belongs to, the
// estimand kind, and (for individual shifts) which exposure moves.
struct ParamKey {
    std::vector<std::string> exposure_set;
    EstimandKind kind = EstimandKind::Individual;
    std::string target;

    bool operator<(const ParamKey& o) const;
    bool operator==(const ParamKey& o) const;
};

// psi for individual/joint rows is the effect scale E_delta[Y] - E[Y];
// interaction rows are the additivity departure.  e_delta_y keeps the
// level-scale counterfactual mean as a diagnostic.
struct FoldEstimateRecord {
    ParamKey key;
    TmleEstimate estimate;
    double e_delta_y = 0.0;
};

struct FoldResult {
    int fold = 0;
    std::vector<std::vector<std::string>> selected_sets;
    std::vector<FoldEstimateRecord> estimates;
    std::map<std::string, double> delta_used;
    std::string discovery_learner;
    std::string outcome_learner;
    int capped_h = 0;

    // Untargeted validation-row material for the pooled update; not part of
    // the serialized report.
    std::map<ParamKey, ShiftRows> rows;
    Eigen::VectorXd valid_y;  // original-scale outcomes of the validation rows
};

enum class PoolingMode { Plain, InverseVarianceNull };

std::string pooling_mode_name(PoolingMode m);

struct PooledResult {
    ParamKey key;
    double psi = 0.0;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double p_value = 1.0;
    int n_folds_found = 0;
    int n_folds_total = 0;
    std::map<std::string, double> delta_pooled;
    PoolingMode mode = PoolingMode::Plain;
    double e_delta_y = 0.0;
};

struct AnalysisReport {
    std::vector<PooledResult> pooled;
    std::vector<FoldResult> folds;
    EngineSettings settings;
    std::uint64_t seed = 0;
    ScalingRecord scaling;
    std::size_t n_rows = 0;
};

// Largest delta in delta0 * (1 - reduce_frac)^j whose uncapped density ratio
// stays at or below lambda on the training rows.  Errors after 100
// reductions.
double adapt_delta(const CondDensityFit& g, const Dataset& training_rows, double delta0,
                   double lambda, double reduce_frac);

// Training side: discovery fit, NP-ANOVA selection, outcome and density
// fits, delta adaptation.  Validation side: untargeted predictions, clever
// covariates, and fold-specific targeted estimates.
FoldResult run_fold(int k, const Dataset& data_scaled, const ScalingRecord& scaling,
                    const FoldAssignment& folds, const EngineSettings& cfg, std::uint64_t seed);

// Stacks each parameter's validation rows across the folds that selected it
// and runs one shared fluctuation on the stack.
std::vector<PooledResult> pool(const std::vector<FoldResult>& fold_results,
                               const ScalingRecord& scaling, int n_folds_total);

// Inverse-variance blend of a pooled estimate with the implied null (0) from
// the n0 folds that did not select the parameter:
//   var_null = var * n1/n0, w1 = 1/var, w0 = 1/var_null,
//   psi* = w1 psi / (w0 + w1), var* = 1 / (w0 + w1).
PooledResult pool_with_null(const PooledResult& pooled, int n0, int n1);

AnalysisReport run(const Dataset& data, const EngineSettings& cfg, std::uint64_t seed);

}  // namespace mixshift
