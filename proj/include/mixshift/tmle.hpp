#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/density.hpp"
#include "mixshift/learners.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <variant>

namespace mixshift {

enum class EstimandKind { MeanY, Individual, Joint, Interaction };

std::string estimand_kind_name(EstimandKind k);

// A targeted estimate with influence-function inference.  psi is on the
// original outcome scale; eif has one entry per row used; se = sd(eif)/sqrt(m);
// ci = psi +/- 1.96 se; two-sided normal p-value.
struct TmleEstimate {
    double psi = 0.0;
    Eigen::VectorXd eif;
    double se = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double p_value = 1.0;
    EstimandKind kind = EstimandKind::MeanY;
    std::optional<ShiftSpec> shift;
};

TmleEstimate finalize_estimate(double psi, Eigen::VectorXd eif, EstimandKind kind,
                               std::optional<ShiftSpec> shift);

struct Fluctuation {
    double epsilon = 0.0;
    bool converged = false;
    int iterations = 0;
    double score = 0.0;  // sum h * (y - expit(offset + eps*h)) at the solution
};

// One-parameter logistic tilt: solves sum_i h_i (y_i - expit(o_i + eps h_i)) = 0
// by damped Newton.  y must live in [0,1]; offsets must be finite.
Fluctuation fluctuate(const Eigen::VectorXd& q_logit, const Eigen::VectorXd& h,
                      const Eigen::VectorXd& y_scaled);

// psi = mean(y), eif = y - mean(y).
TmleEstimate estimate_mean_y(const Eigen::VectorXd& y);

// Per-row targeting inputs on the unit outcome scale.  The engine records
// these untargeted quantities per fold and re-fluctuates them, stacked,
// for the pooled update.
struct ShiftRows {
    Eigen::VectorXd logit_q_obs;    // logit of clipped Q(a, w)
    Eigen::VectorXd logit_q_shift;  // logit of clipped Q(a + delta, w)
    Eigen::VectorXd h_obs;          // capped g(a - delta|w) / g(a|w)
    Eigen::VectorXd h_shift;        // capped g(a|w) / g(a + delta|w)
    Eigen::VectorXd y_scaled;
    int n_capped = 0;

    Eigen::Index rows() const { return y_scaled.size(); }
    void append(const ShiftRows& other);
};

using DensityFit = std::variant<CondDensityFit, JointDensityFit>;

// `rows` carries the outcome on its original scale; the scaling record maps
// it onto [0,1] here.
ShiftRows build_shift_rows(const Dataset& rows, const ShiftSpec& shift, const RegressionFit& q_fit,
                           const DensityFit& g, const ScalingRecord& scaling, double lambda);

// Fluctuates along the clever covariate and returns the targeted level
// estimate E_delta[Y]:
//   eps solves the score over the observed rows,
//   psi_scaled = mean expit(logit Q(a+delta,w) + eps * h_shift),
//   eif = h_obs (y - Q_eps(a,w)) + Q_eps(a+delta,w) - psi_scaled,
// both mapped back through the scaling record.
TmleEstimate target_shift_rows(const ShiftRows& rows, const ScalingRecord& scaling,
                               EstimandKind kind, std::optional<ShiftSpec> shift);

TmleEstimate estimate_shift(const Dataset& rows, const ShiftSpec& shift, const RegressionFit& q_fit,
                            const DensityFit& g, const ScalingRecord& scaling, double lambda);

// Linear contrast joint - ind1 - ind2 + mean_y with the delta-method EIF.
TmleEstimate estimate_interaction(const TmleEstimate& joint, const TmleEstimate& ind1,
                                  const TmleEstimate& ind2, const TmleEstimate& mean_y);

// Effect scale E_delta[Y] - E[Y]: another linear contrast of two estimates
// computed on the same rows.
TmleEstimate shift_contrast(const TmleEstimate& shift_level, const TmleEstimate& mean_y);

}  // namespace mixshift
