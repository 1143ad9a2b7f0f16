#include "mixshift/discovery.hpp"

#include "mixshift/errors.hpp"
#include "mixshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mixshift {

std::vector<BasisFunction> extract_bases(const RegressionFit& fit) {
    std::vector<BasisFunction> out;
    for (std::size_t j = 0; j < fit.bases.size(); ++j) {
        if (fit.bases[j].is_intercept()) continue;
        if (fit.coefficients[static_cast<Eigen::Index>(j)] == 0.0) continue;
        out.push_back(fit.bases[j]);
    }
    return out;
}

std::set<std::string> exposure_set_of(const BasisFunction& basis,
                                      const std::map<std::string, Role>& roles) {
    std::set<std::string> out;
    for (const auto& name : basis.variable_set()) {
        auto it = roles.find(name);
        if (it != roles.end() && it->second == Role::Exposure) out.insert(name);
    }
    return out;
}

namespace {

double sse_of(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(design);
    const Eigen::VectorXd coefs = qr.solve(y);
    return (y - design * coefs).squaredNorm();
}

}  // namespace

Type3Result type3_f(const std::vector<BasisFunction>& bases, const Frame& x,
                    const Eigen::VectorXd& y) {
    const Eigen::Index n = x.rows();
    if (bases.empty()) return {};

    // Column 0 is the intercept; basis j sits in column j+1.
    Eigen::MatrixXd full(n, static_cast<Eigen::Index>(bases.size()) + 1);
    full.col(0).setOnes();
    for (std::size_t j = 0; j < bases.size(); ++j)
        full.col(static_cast<Eigen::Index>(j) + 1) = evaluate_basis(bases[j], x);

    // Keep-first collinearity filter: a basis whose column lies in the span
    // of earlier kept columns (pivot below 1e-10 relative) is dropped.
    Type3Result result;
    std::vector<std::size_t> kept;
    Eigen::MatrixXd q(n, full.cols());
    Eigen::Index m = 0;
    for (Eigen::Index c = 0; c < full.cols(); ++c) {
        Eigen::VectorXd v = full.col(c);
        const double norm2 = v.squaredNorm();
        for (int pass = 0; pass < 2 && m > 0; ++pass)
            v.noalias() -= q.leftCols(m) * (q.leftCols(m).transpose() * v);
        if (norm2 <= 0.0 || v.squaredNorm() <= 1e-10 * norm2) {
            if (c > 0) result.dropped.push_back(static_cast<std::size_t>(c - 1));
            continue;
        }
        q.col(m++) = v / v.norm();
        if (c > 0) kept.push_back(static_cast<std::size_t>(c - 1));
    }

    const Eigen::Index p = static_cast<Eigen::Index>(kept.size()) + 1;
    if (n <= p) throw NumericError("type3_f needs more rows than retained bases plus intercept");

    Eigen::MatrixXd design(n, p);
    design.col(0).setOnes();
    for (std::size_t j = 0; j < kept.size(); ++j)
        design.col(static_cast<Eigen::Index>(j) + 1) = full.col(static_cast<Eigen::Index>(kept[j]) + 1);

    const double sse_full = sse_of(design, y);
    const double scale = y.squaredNorm();
    const bool perfect = sse_full <= std::max(1e-300, 1e-14 * scale);
    const double s2 = sse_full / static_cast<double>(n - p);

    for (std::size_t j = 0; j < kept.size(); ++j) {
        if (perfect) {
            result.f[kept[j]] = std::numeric_limits<double>::infinity();
            continue;
        }
        Eigen::MatrixXd reduced(n, p - 1);
        Eigen::Index out = 0;
        for (Eigen::Index c = 0; c < p; ++c) {
            if (c == static_cast<Eigen::Index>(j) + 1) continue;
            reduced.col(out++) = design.col(c);
        }
        const double sse_reduced = sse_of(reduced, y);
        result.f[kept[j]] = std::max(0.0, (sse_reduced - sse_full) / s2);
    }
    return result;
}

std::vector<VariableSetScore> aggregate_and_threshold(const Type3Result& fmap,
                                                      const std::vector<BasisFunction>& bases,
                                                      const std::map<std::string, Role>& roles,
                                                      double quantile) {
    if (quantile < 0.0 || quantile > 1.0) throw ConfigError("f_quantile must lie in [0,1]");

    std::map<std::vector<std::string>, VariableSetScore> by_set;
    for (const auto& [idx, f] : fmap.f) {
        if (idx >= bases.size()) throw NumericError("F map refers to a basis outside the sequence");
        const auto set = exposure_set_of(bases[idx], roles);
        if (set.empty() || set.size() > 2) continue;
        std::vector<std::string> key(set.begin(), set.end());
        auto& score = by_set[key];
        score.exposure_set = key;
        score.f_sum += f;
        score.n_bases += 1;
    }
    if (by_set.empty()) return {};

    std::vector<double> sums;
    for (const auto& [key, score] : by_set) sums.push_back(score.f_sum);
    const double threshold = quantile == 0.0 ? -std::numeric_limits<double>::infinity()
                                             : quantile_type7(sums, quantile);

    std::vector<VariableSetScore> out;
    for (const auto& [key, score] : by_set)
        if (score.f_sum >= threshold) out.push_back(score);
    std::sort(out.begin(), out.end(), [](const VariableSetScore& a, const VariableSetScore& b) {
        if (a.f_sum != b.f_sum) return a.f_sum > b.f_sum;
        return a.exposure_set < b.exposure_set;
    });
    return out;
}

}  // namespace mixshift
