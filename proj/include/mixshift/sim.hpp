#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/engine.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace mixshift {

// One draw from the benchmark data-generating process:
//   (W1,W2) bivariate normal, means (6,7), unit variances, correlation 0.4;
//   W3 ~ Bernoulli(0.5);
//   (A1,A2,A3) trivariate normal with means (exp(W1/2), W2/2, 5) and the
//     unit-diagonal covariance {{1,.5,.8},{.5,1,.7},{.8,.7,1}};
//   A4 ~ Normal(4, variance 2);
//   Y = 1.3 A4 + 0.4 A4 A1 + 0.1 W1 + 0.3 W2 + e
//       + (A3^2 if W3 = 1 else A3),   e ~ Normal(0,1).
struct DgpSample {
    Dataset data;
    std::uint64_t seed = 0;
};

DgpSample gen_dgp(std::size_t n, std::uint64_t seed);

enum class TruthKind { Shift, Interaction };

// Monte-Carlo ground truth on the effect scale E_delta[Y] - E[Y]: Y is
// regenerated structurally under the shifted exposures with all noise held
// fixed.  Interaction truths combine joint - ind1 - ind2 on the same draws.
double ground_truth(TruthKind kind, const ShiftSpec& shift, std::size_t n_mc, std::uint64_t seed);

struct MetricsRow {
    std::size_t n = 0;
    std::string parameter;  // individual | joint | interaction
    double bias = 0.0;
    double variance = 0.0;
    double mse_times_n = 0.0;
    double coverage = 0.0;
    double discovery_rate = 0.0;
    int failures = 0;
};

// Replicated engine runs against the ground truth.  The individual
// parameter tracks the A4 shift, joint and interaction track {A1,A4}.
std::vector<MetricsRow> run_convergence(const std::vector<std::size_t>& ns, int reps,
                                        const EngineSettings& cfg, std::uint64_t seed);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

struct QgcompResult {
    double psi_pos = 0.0;
    double psi_neg = 0.0;
    double psi_total = 0.0;
    std::map<std::string, double> coefficients;  // per-exposure quantized slope
    std::map<std::string, double> weights;       // share within its sign group
};

// Linear-model mixture baseline: each exposure is replaced by its quantile
// index 0..q-1 (ties to the lower bin) and the quantized exposures plus
// covariates enter an OLS fit; psi_total sums the exposure coefficients.
QgcompResult qgcomp_baseline(const Dataset& data, int q);

}  // namespace mixshift
