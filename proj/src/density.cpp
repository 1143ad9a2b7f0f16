#include "mixshift/density.hpp"

#include "mixshift/errors.hpp"
#include "mixshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixshift {

namespace {

constexpr double kLogSqrt2Pi = 0.9189385332046727;
// E[log chi^2_1] = psi(1/2) + log 2; fitting log residual^2 estimates
// log sigma^2 + this constant, so evaluation adds it back.
constexpr double kLogChi2Mean = -1.2703628454614782;

}  // namespace

std::string density_kind_name(DensityKind k) { return k == DensityKind::HOSE ? "HOSE" : "HESE"; }

DensityKind parse_density_kind(const std::string& s) {
    if (s == "HOSE" || s == "hose") return DensityKind::HOSE;
    if (s == "HESE" || s == "hese") return DensityKind::HESE;
    throw ConfigError("unknown density kind '" + s + "' (expected HOSE or HESE)");
}

Eigen::VectorXd CondDensityFit::mu(const Frame& context_frame) const {
    return predict(mean_fit, context_frame);
}

Eigen::VectorXd CondDensityFit::sigma(const Frame& context_frame) const {
    if (kind == DensityKind::HOSE || !scale_fit)
        return Eigen::VectorXd::Constant(context_frame.rows(), sigma_const);
    Eigen::VectorXd log_var = predict(*scale_fit, context_frame);
    Eigen::VectorXd out(log_var.size());
    for (Eigen::Index i = 0; i < log_var.size(); ++i)
        out[i] = std::max(sigma_min, std::sqrt(std::exp(log_var[i] - kLogChi2Mean)));
    return out;
}

Eigen::VectorXd CondDensityFit::log_density(const Eigen::VectorXd& a,
                                            const Frame& context_frame) const {
    const Eigen::VectorXd location = mu(context_frame);
    const Eigen::VectorXd scale = sigma(context_frame);
    Eigen::VectorXd out(a.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const double z = (a[i] - location[i]) / scale[i];
        out[i] = -0.5 * z * z - std::log(scale[i]) - kLogSqrt2Pi;
    }
    return out;
}

Eigen::VectorXd JointDensityFit::log_density(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                                             const Frame& w_frame) const {
    const Eigen::VectorXd lg1 = first.log_density(a1, w_frame);
    const Frame second_frame = w_frame.with_column(first.exposure, a1);
    const Eigen::VectorXd lg2 = second.log_density(a2, second_frame);
    return lg1 + lg2;
}

CondDensityFit fit_cond_density(const Eigen::VectorXd& a, const Frame& context,
                                const std::string& exposure_name, DensityKind kind,
                                const LearnerGrid& grid, std::uint64_t seed) {
    if (a.size() < 30)
        throw DataError("conditional density for '" + exposure_name + "' needs at least 30 rows");
    const double sd_a = sample_sd(a);
    if (sd_a <= 0.0)
        throw DataError("exposure '" + exposure_name + "' is constant; its density is degenerate");

    CondDensityFit fit;
    fit.exposure = exposure_name;
    fit.context = context.names;
    fit.kind = kind;
    fit.sigma_min = 1e-3 * sd_a;

    fit.mean_fit = cv_select(grid, context, a, mix_seed(seed, 0x6d65616eULL)).fit;
    const Eigen::VectorXd resid = a - predict(fit.mean_fit, context);
    const double resid_var = sample_variance(resid);
    if (std::sqrt(resid_var) < fit.sigma_min)
        throw DataError("exposure '" + exposure_name +
                        "' is (numerically) a deterministic function of its context");
    fit.sigma_const = std::sqrt(resid_var);

    if (kind == DensityKind::HESE) {
        const double floor = 1e-10 * resid_var;
        Eigen::VectorXd log_r2(resid.size());
        for (Eigen::Index i = 0; i < resid.size(); ++i)
            log_r2[i] = std::log(std::max(floor, resid[i] * resid[i]));
        fit.scale_fit = cv_select(grid, context, log_r2, mix_seed(seed, 0x7363616cULL)).fit;
        const Eigen::VectorXd sig = fit.sigma(context);
        if ((sig.array() <= fit.sigma_min).all())
            throw DataError("exposure '" + exposure_name +
                            "' has residual scale at the floor everywhere; density is degenerate");
    }
    return fit;
}

JointDensityFit fit_joint_density(const Eigen::VectorXd& a1, const Eigen::VectorXd& a2,
                                  const Frame& w, const std::string& name1,
                                  const std::string& name2, DensityKind kind,
                                  const LearnerGrid& grid, std::uint64_t seed) {
    JointDensityFit joint;
    joint.first = fit_cond_density(a1, w, name1, kind, grid, mix_seed(seed, 1));
    const Frame second_context = w.with_column(name1, a1);
    joint.second = fit_cond_density(a2, second_context, name2, kind, grid, mix_seed(seed, 2));
    return joint;
}

namespace {

DensityRatio ratio_from_logs(const Eigen::VectorXd& log_num, const Eigen::VectorXd& log_den,
                             double lambda) {
    DensityRatio out;
    out.cap = lambda;
    out.values.resize(log_num.size());
    out.max_log_uncapped = -std::numeric_limits<double>::infinity();
    const double log_cap = std::log(lambda);
    for (Eigen::Index i = 0; i < log_num.size(); ++i) {
        const double lr = log_num[i] - log_den[i];
        if (std::isnan(lr))
            throw NumericError("non-finite density ratio at row " + std::to_string(i));
        out.max_log_uncapped = std::max(out.max_log_uncapped, lr);
        // Cap in log space so extreme ratios never overflow.
        if (lr > log_cap) {
            out.values[i] = lambda;
            ++out.n_capped;
        } else {
            out.values[i] = std::exp(lr);
        }
    }
    return out;
}

Eigen::VectorXd column_vector(const Dataset& rows, const std::string& name) {
    return to_vector(rows.column(name));
}

}  // namespace

DensityRatio density_ratio(const CondDensityFit& fit, const Dataset& rows, const ShiftSpec& shift,
                           double lambda) {
    if (shift.targets.size() != 1 || shift.targets[0] != fit.exposure)
        throw ConfigError("shift targets do not match the fitted exposure '" + fit.exposure + "'");
    const Frame ctx = make_frame(rows, fit.context);
    const Eigen::VectorXd a = column_vector(rows, fit.exposure);
    const double delta = shift.delta_for(fit.exposure);
    return ratio_from_logs(fit.log_density((a.array() - delta).matrix(), ctx), fit.log_density(a, ctx),
                           lambda);
}

DensityRatio density_ratio_shifted(const CondDensityFit& fit, const Dataset& rows,
                                   const ShiftSpec& shift, double lambda) {
    if (shift.targets.size() != 1 || shift.targets[0] != fit.exposure)
        throw ConfigError("shift targets do not match the fitted exposure '" + fit.exposure + "'");
    const Frame ctx = make_frame(rows, fit.context);
    const Eigen::VectorXd a = column_vector(rows, fit.exposure);
    const double delta = shift.delta_for(fit.exposure);
    return ratio_from_logs(fit.log_density(a, ctx), fit.log_density((a.array() + delta).matrix(), ctx),
                           lambda);
}

DensityRatio density_ratio(const JointDensityFit& fit, const Dataset& rows, const ShiftSpec& shift,
                           double lambda) {
    if (shift.targets.size() != 2)
        throw ConfigError("joint density ratio needs a two-exposure shift");
    const std::string n1 = fit.first_name();
    const std::string n2 = fit.second_name();
    if (!shift.delta.count(n1) || !shift.delta.count(n2))
        throw ConfigError("shift targets do not match the fitted joint density");
    const Frame w = make_frame(rows, fit.first.context);
    const Eigen::VectorXd a1 = column_vector(rows, n1);
    const Eigen::VectorXd a2 = column_vector(rows, n2);
    const double d1 = shift.delta_for(n1);
    const double d2 = shift.delta_for(n2);
    return ratio_from_logs(fit.log_density((a1.array() - d1).matrix(), (a2.array() - d2).matrix(), w),
                           fit.log_density(a1, a2, w), lambda);
}

DensityRatio density_ratio_shifted(const JointDensityFit& fit, const Dataset& rows,
                                   const ShiftSpec& shift, double lambda) {
    if (shift.targets.size() != 2)
        throw ConfigError("joint density ratio needs a two-exposure shift");
    const std::string n1 = fit.first_name();
    const std::string n2 = fit.second_name();
    if (!shift.delta.count(n1) || !shift.delta.count(n2))
        throw ConfigError("shift targets do not match the fitted joint density");
    const Frame w = make_frame(rows, fit.first.context);
    const Eigen::VectorXd a1 = column_vector(rows, n1);
    const Eigen::VectorXd a2 = column_vector(rows, n2);
    const double d1 = shift.delta_for(n1);
    const double d2 = shift.delta_for(n2);
    return ratio_from_logs(fit.log_density(a1, a2, w),
                           fit.log_density((a1.array() + d1).matrix(), (a2.array() + d2).matrix(), w),
                           lambda);
}

}  // namespace mixshift
