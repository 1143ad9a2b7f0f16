#pragma once

#include "mixshift/basis.hpp"
#include "mixshift/dataset.hpp"
#include "mixshift/learners.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace mixshift {

// Aggregated explanatory weight of one exposure set (size 1 or 2).
struct VariableSetScore {
    std::vector<std::string> exposure_set;  // sorted names
    double f_sum = 0.0;
    int n_bases = 0;
};

// Non-intercept bases with nonzero coefficients from a fitted expansion.
std::vector<BasisFunction> extract_bases(const RegressionFit& fit);

// Exposure attribution: keep only exposure-role variables.  A covariate-only
// basis maps to the empty set; exposure-by-covariate products attribute to
// the exposure singleton.
std::set<std::string> exposure_set_of(const BasisFunction& basis,
                                      const std::map<std::string, Role>& roles);

struct Type3Result {
    // F-statistic per retained basis, keyed by position in the input
    // sequence.  +inf marks a perfect fit (zero residual).
    std::map<std::size_t, double> f;
    std::vector<std::size_t> dropped;  // later-indexed exactly-collinear bases
};

// Drop-one F tests: refit with each basis removed and compare residual sums
// of squares against the full model, F_j = (SSE_{-j} - SSE_full) / s2 with
// s2 = SSE_full / (n - p).  The model always contains an intercept.
Type3Result type3_f(const std::vector<BasisFunction>& bases, const Frame& x,
                    const Eigen::VectorXd& y);

// Sum F per exposure set and keep the sets at or above the given empirical
// quantile of the sums.  Quantile 0 keeps every set appearing in the model.
std::vector<VariableSetScore> aggregate_and_threshold(const Type3Result& fmap,
                                                      const std::vector<BasisFunction>& bases,
                                                      const std::map<std::string, Role>& roles,
                                                      double quantile);

}  // namespace mixshift
