#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/frame.hpp"
#include "mixshift/learners.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace mixshift {

enum class DensityKind { HOSE, HESE };

std::string density_kind_name(DensityKind k);
DensityKind parse_density_kind(const std::string& s);

// Location-scale conditional density: a ~ Normal(mu(context), sigma^2) with
// sigma either a constant (HOSE) or a fitted function of the context (HESE).
// Scales are floored at sigma_min = 1e-3 * sd(a).
struct CondDensityFit {
    std::string exposure;
    std::vector<std::string> context;  // conditioning column names
    DensityKind kind = DensityKind::HOSE;
    RegressionFit mean_fit;
    double sigma_const = 1.0;
    std::optional<RegressionFit> scale_fit;  // predicts log residual^2
    double sigma_min = 0.0;

    Eigen::VectorXd mu(const Frame& context_frame) const;
    Eigen::VectorXd sigma(const Frame& context_frame) const;
    // log g(a | context), element-wise.
    Eigen::VectorXd log_density(const Eigen::VectorXd& a, const Frame& context_frame) const;
};

// g(a1, a2 | w) = g(a1 | w) * g(a2 | a1, w).
struct JointDensityFit {
    CondDensityFit first;
    CondDensityFit second;

    const std::string& first_name() const { return first.exposure; }
    const std::string& second_name() const { return second.exposure; }
    Eigen::VectorXd log_density(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                                const Frame& w_frame) const;
};

// Per-observation clever-covariate values H = g(a - delta | w) / g(a | w),
// capped at `cap`.
struct DensityRatio {
    Eigen::VectorXd values;
    double cap = 0.0;
    int n_capped = 0;
    // log of the largest pre-cap ratio; kept in log space so positivity
    // violations cannot overflow.
    double max_log_uncapped = 0.0;

    double max_uncapped() const { return std::exp(max_log_uncapped); }
};

CondDensityFit fit_cond_density(const Eigen::VectorXd& a, const Frame& context,
                                const std::string& exposure_name, DensityKind kind,
                                const LearnerGrid& grid, std::uint64_t seed);

JointDensityFit fit_joint_density(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                                  const Frame& w, const std::string& name1,
                                  const std::string& name2, DensityKind kind,
                                  const LearnerGrid& grid, std::uint64_t seed);

// Ratios for a data slice.  The rows supply both the exposure values and the
// conditioning columns by name.
DensityRatio density_ratio(const CondDensityFit& fit, const Dataset& rows, const ShiftSpec& shift,
                           double lambda);
DensityRatio density_ratio(const JointDensityFit& fit, const Dataset& rows, const ShiftSpec& shift,
                           double lambda);

// Same ratio evaluated at the shifted exposures a + delta, i.e.
// g(a | w) / g(a + delta | w); the counterfactual-side covariate in the
// targeting update.
DensityRatio density_ratio_shifted(const CondDensityFit& fit, const Dataset& rows,
                                   const ShiftSpec& shift, double lambda);
DensityRatio density_ratio_shifted(const JointDensityFit& fit, const Dataset& rows,
                                   const ShiftSpec& shift, double lambda);

}  // namespace mixshift
