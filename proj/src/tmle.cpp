#include "mixshift/tmle.hpp"

#include "mixshift/errors.hpp"
#include "mixshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mixshift {

std::string estimand_kind_name(EstimandKind k) {
    switch (k) {
        case EstimandKind::MeanY: return "mean_y";
        case EstimandKind::Individual: return "individual";
        case EstimandKind::Joint: return "joint";
        case EstimandKind::Interaction: return "interaction";
    }
    return "?";
}

TmleEstimate finalize_estimate(double psi, Eigen::VectorXd eif, EstimandKind kind,
                               std::optional<ShiftSpec> shift) {
    TmleEstimate est;
    est.psi = psi;
    est.kind = kind;
    est.shift = std::move(shift);
    const double m = static_cast<double>(eif.size());
    est.se = m > 0 ? sample_sd(eif) / std::sqrt(m) : 0.0;
    est.eif = std::move(eif);
    est.ci_lo = psi - 1.96 * est.se;
    est.ci_hi = psi + 1.96 * est.se;
    if (est.se > 0.0) {
        est.p_value = two_sided_p(psi / est.se);
    } else {
        est.p_value = psi == 0.0 ? 1.0 : 0.0;
    }
    return est;
}

TmleEstimate estimate_mean_y(const Eigen::VectorXd& y) {
    if (y.size() == 0) throw NumericError("mean of empty outcome vector");
    const double psi = y.mean();
    Eigen::VectorXd eif = y.array() - psi;
    return finalize_estimate(psi, std::move(eif), EstimandKind::MeanY, std::nullopt);
}

Fluctuation fluctuate(const Eigen::VectorXd& q_logit, const Eigen::VectorXd& h,
                      const Eigen::VectorXd& y_scaled) {
    const Eigen::Index n = y_scaled.size();
    if (q_logit.size() != n || h.size() != n)
        throw NumericError("fluctuation input length mismatch");
    if (!q_logit.allFinite() || !h.allFinite() || !y_scaled.allFinite())
        throw NumericError("non-finite fluctuation inputs");
    if ((y_scaled.array() < 0.0).any() || (y_scaled.array() > 1.0).any())
        throw NumericError("fluctuation response outside [0,1]");

    // Long-double accumulation keeps the score resolvable below 1e-10 even
    // for stacked samples with H near the cap.
    auto score_at = [&](double eps, double* curvature) -> double {
        long double s = 0.0L;
        long double d = 0.0L;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double p = expit(q_logit[i] + eps * h[i]);
            s += static_cast<long double>(h[i]) * (y_scaled[i] - p);
            if (curvature) d += static_cast<long double>(h[i]) * h[i] * p * (1.0 - p);
        }
        if (curvature) *curvature = static_cast<double>(d);
        return static_cast<double>(s);
    };

    Fluctuation out;
    double eps = 0.0;
    double curv = 0.0;
    double score = score_at(eps, &curv);
    for (int it = 0; it < 100; ++it) {
        out.iterations = it;
        if (std::fabs(score) < 1e-10) {
            out.epsilon = eps;
            out.converged = true;
            out.score = score;
            return out;
        }
        if (curv <= 0.0) break;
        double step = score / curv;
        // Backtrack if the step overshoots the (concave) quasi-likelihood.
        double new_eps = eps + step;
        double new_score = score_at(new_eps, nullptr);
        int halvings = 0;
        while (std::fabs(new_score) > std::fabs(score) && halvings < 50) {
            step *= 0.5;
            new_eps = eps + step;
            new_score = score_at(new_eps, nullptr);
            ++halvings;
        }
        if (std::fabs(step) < 1e-14 && std::fabs(new_score) >= std::fabs(score)) break;
        eps = new_eps;
        score = score_at(eps, &curv);
        if (std::fabs(eps) >= 10.0) {
            std::ostringstream os;
            os << "fluctuation diverged: |epsilon| reached " << eps << " with score " << score;
            throw NumericError(os.str());
        }
    }
    if (std::fabs(score) < 1e-10) {
        out.epsilon = eps;
        out.converged = true;
        out.score = score;
        return out;
    }
    std::ostringstream os;
    os << "fluctuation did not converge: last epsilon " << eps << ", score " << score;
    throw NumericError(os.str());
}

void ShiftRows::append(const ShiftRows& other) {
    auto cat = [](Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        Eigen::VectorXd merged(a.size() + b.size());
        merged << a, b;
        a = std::move(merged);
    };
    cat(logit_q_obs, other.logit_q_obs);
    cat(logit_q_shift, other.logit_q_shift);
    cat(h_obs, other.h_obs);
    cat(h_shift, other.h_shift);
    cat(y_scaled, other.y_scaled);
    n_capped += other.n_capped;
}

namespace {

Dataset shifted_copy(const Dataset& rows, const ShiftSpec& shift) {
    Dataset out = rows;
    for (const auto& t : shift.targets) {
        std::vector<double> col = rows.column(t);
        const double d = shift.delta_for(t);
        for (double& v : col) v += d;
        out = out.with_column(t, std::move(col));
    }
    return out;
}

Eigen::VectorXd clipped_logit(const Eigen::VectorXd& p) {
    Eigen::VectorXd out(p.size());
    for (Eigen::Index i = 0; i < p.size(); ++i) out[i] = logit(clip_prob(p[i]));
    return out;
}

}  // namespace

ShiftRows build_shift_rows(const Dataset& rows, const ShiftSpec& shift, const RegressionFit& q_fit,
                           const DensityFit& g, const ScalingRecord& scaling, double lambda) {
    std::vector<std::string> predictors;
    for (const auto& b : q_fit.bases)
        for (const auto& f : b.factors)
            if (std::find(predictors.begin(), predictors.end(), f.variable) == predictors.end())
                predictors.push_back(f.variable);
    for (const auto& t : shift.targets)
        if (std::find(predictors.begin(), predictors.end(), t) == predictors.end())
            predictors.push_back(t);

    const Dataset shifted = shifted_copy(rows, shift);
    const Frame x_obs = make_frame(rows, predictors);
    const Frame x_shift = make_frame(shifted, predictors);

    ShiftRows out;
    out.logit_q_obs = clipped_logit(predict(q_fit, x_obs));
    out.logit_q_shift = clipped_logit(predict(q_fit, x_shift));

    const auto ratios = [&](auto&& fit) {
        const DensityRatio obs = density_ratio(fit, rows, shift, lambda);
        const DensityRatio shf = density_ratio_shifted(fit, rows, shift, lambda);
        out.h_obs = obs.values;
        out.h_shift = shf.values;
        out.n_capped = obs.n_capped;
    };
    std::visit(ratios, g);

    const Eigen::VectorXd y = to_vector(rows.outcome());
    out.y_scaled.resize(y.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) out.y_scaled[i] = scaling.to_unit(y[i]);
    return out;
}

TmleEstimate target_shift_rows(const ShiftRows& rows, const ScalingRecord& scaling,
                               EstimandKind kind, std::optional<ShiftSpec> shift) {
    if (rows.rows() == 0) throw NumericError("no rows to target");
    const Fluctuation fl = fluctuate(rows.logit_q_obs, rows.h_obs, rows.y_scaled);

    const Eigen::Index n = rows.rows();
    Eigen::VectorXd q_eps_obs(n), q_eps_shift(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        q_eps_obs[i] = expit(rows.logit_q_obs[i] + fl.epsilon * rows.h_obs[i]);
        q_eps_shift[i] = expit(rows.logit_q_shift[i] + fl.epsilon * rows.h_shift[i]);
    }
    const double psi_scaled = q_eps_shift.mean();
    Eigen::VectorXd eif_scaled = rows.h_obs.cwiseProduct(rows.y_scaled - q_eps_obs) + q_eps_shift -
                                 Eigen::VectorXd::Constant(n, psi_scaled);

    const double psi = scaling.from_unit(psi_scaled);
    Eigen::VectorXd eif = eif_scaled * scaling.range();
    return finalize_estimate(psi, std::move(eif), kind, std::move(shift));
}

TmleEstimate estimate_shift(const Dataset& rows, const ShiftSpec& shift, const RegressionFit& q_fit,
                            const DensityFit& g, const ScalingRecord& scaling, double lambda) {
    const EstimandKind kind =
        shift.targets.size() == 2 ? EstimandKind::Joint : EstimandKind::Individual;
    const ShiftRows sr = build_shift_rows(rows, shift, q_fit, g, scaling, lambda);
    return target_shift_rows(sr, scaling, kind, shift);
}

namespace {

TmleEstimate linear_contrast(double psi, Eigen::VectorXd eif, EstimandKind kind,
                             std::optional<ShiftSpec> shift) {
    return finalize_estimate(psi, std::move(eif), kind, std::move(shift));
}

}  // namespace

TmleEstimate estimate_interaction(const TmleEstimate& joint, const TmleEstimate& ind1,
                                  const TmleEstimate& ind2, const TmleEstimate& mean_y) {
    const Eigen::Index m = joint.eif.size();
    if (ind1.eif.size() != m || ind2.eif.size() != m || mean_y.eif.size() != m)
        throw NumericError("interaction components were computed on different row sets");
    const double psi = joint.psi - ind1.psi - ind2.psi + mean_y.psi;
    Eigen::VectorXd eif = joint.eif - ind1.eif - ind2.eif + mean_y.eif;
    return linear_contrast(psi, std::move(eif), EstimandKind::Interaction, joint.shift);
}

TmleEstimate shift_contrast(const TmleEstimate& shift_level, const TmleEstimate& mean_y) {
    if (shift_level.eif.size() != mean_y.eif.size())
        throw NumericError("shift contrast components were computed on different row sets");
    const double psi = shift_level.psi - mean_y.psi;
    Eigen::VectorXd eif = shift_level.eif - mean_y.eif;
    return linear_contrast(psi, std::move(eif), shift_level.kind, shift_level.shift);
}

}  // namespace mixshift
