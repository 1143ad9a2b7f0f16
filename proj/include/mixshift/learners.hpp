#pragma once

#include "mixshift/basis.hpp"
#include "mixshift/frame.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace mixshift {

enum class LearnerKind { Linear, Ridge, Mars };

// A fitted basis expansion: bases[0] is always the intercept and
// coefficients align with bases.  predict() on the training frame reproduces
// `fitted` exactly (same arithmetic path).
struct RegressionFit {
    LearnerKind kind = LearnerKind::Linear;
    std::vector<BasisFunction> bases;
    Eigen::VectorXd coefficients;
    double training_mse = 0.0;
    Eigen::VectorXd fitted;
    std::string name;
    // Training MSE after each forward-pass step (MARS only); non-increasing.
    std::vector<double> forward_mse_path;
};

Eigen::VectorXd predict(const RegressionFit& fit, const Frame& frame);

struct MarsHyper {
    int max_degree = 2;       // 1 or 2
    int max_terms = 21;       // >= 2, including the intercept
    int knot_grid_size = 9;   // >= 3 quantile knots per variable
    bool prune = true;
};

// Least squares with an optional ridge penalty on the non-intercept
// coefficients.  Zero penalty on a rank-deficient design is an error.
RegressionFit fit_linear(const Frame& x, const Eigen::VectorXd& y, double ridge_penalty = 0.0);

// Adaptive regression splines: a greedy forward pass over reflected hinge
// pairs at empirical-quantile knots (tensor products up to max_degree),
// followed by a generalized-cross-validation backward prune.  Falls back to
// a linear fit below 20 observations.
RegressionFit fit_mars(const Frame& x, const Eigen::VectorXd& y, const MarsHyper& hyper);

struct LinearSpec {
    double penalty = 0.0;
};

struct LearnerSpec {
    std::string name;
    std::variant<LinearSpec, MarsHyper> spec;
};

struct LearnerGrid {
    std::vector<LearnerSpec> candidates;
    int inner_folds = 5;
};

RegressionFit fit_candidate(const LearnerSpec& spec, const Frame& x, const Eigen::VectorXd& y);

struct CvSelection {
    RegressionFit fit;               // winner refit on the full data
    std::size_t winner = 0;          // index into the grid
    std::vector<double> cv_mse;      // +inf for candidates that failed
    std::vector<std::string> errors; // one entry per failed candidate
};

// Discrete model selection: V-fold CV-MSE per candidate, refit the best on
// the full data.  Ties break toward the earlier grid position.
CvSelection cv_select(const LearnerGrid& grid, const Frame& x, const Eigen::VectorXd& y,
                      std::uint64_t seed);

// Default libraries.  The discovery grid is 13 spline models spanning
// degree, term budget, and knot resolution; the outcome grid adds a ridge
// fallback; the density-mean grid is a lighter mix used inside conditional
// density fits.
LearnerGrid discovery_grid();
LearnerGrid outcome_grid();
LearnerGrid density_mean_grid();

}  // namespace mixshift
