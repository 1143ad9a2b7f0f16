#include "mixshift/learners.hpp"

#include "mixshift/errors.hpp"
#include "mixshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

namespace mixshift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Row-major so the knot sweep can walk observation rows contiguously.
using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Frame subset_frame(const Frame& x, const std::vector<std::size_t>& rows) {
    Frame out;
    out.names = x.names;
    out.values.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.values.row(static_cast<Eigen::Index>(i)) = x.values.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Eigen::VectorXd subset_vector(const Eigen::VectorXd& v, const std::vector<std::size_t>& rows) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(rows[i])];
    return out;
}

// Candidate knots: interior empirical quantiles, never the min/max, so both
// hinge sides are supported.  Constant columns yield no knots.
std::vector<double> knot_grid(const Eigen::VectorXd& x, int grid_size) {
    std::vector<double> vals(x.data(), x.data() + x.size());
    std::vector<double> knots;
    for (int i = 0; i < grid_size; ++i) {
        const double p = static_cast<double>(i + 1) / static_cast<double>(grid_size + 1);
        knots.push_back(quantile_type7(vals, p));
    }
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    std::vector<double> interior;
    for (double t : knots)
        if (t > *mn && t < *mx) interior.push_back(t);
    return interior;
}

// Solves min ||y - X b||^2 + penalty * ||b_rest||^2 with column 0 (the
// intercept) unpenalized.  With zero penalty a rank-deficient X is an error.
Eigen::VectorXd solve_penalized(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, double penalty) {
    const Eigen::Index p = x.cols();
    if (penalty <= 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        qr.setThreshold(1e-10);
        if (qr.rank() < p)
            throw NumericError(
                "design matrix is singular with zero ridge penalty; supply ridge_penalty > 0");
        return qr.solve(y);
    }
    Eigen::MatrixXd gram = x.transpose() * x;
    for (Eigen::Index j = 1; j < p; ++j) gram(j, j) += penalty;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    if (ldlt.info() != Eigen::Success) throw NumericError("penalized normal equations failed");
    return ldlt.solve(x.transpose() * y);
}

struct ForwardModel {
    std::vector<BasisFunction> terms;  // terms[0] = intercept
    Eigen::MatrixXd raw;               // n x M raw basis columns
    RowMajorMatrix q;                  // orthonormal basis of span(raw)
    Eigen::VectorXd resid;
    std::vector<double> mse_path;
};

// Orthogonalize v against the columns of q (classical Gram-Schmidt applied
// twice).  Returns squared remaining norm.
double orthogonalize(const RowMajorMatrix& q, Eigen::Index m, Eigen::VectorXd& v) {
    for (int pass = 0; pass < 2; ++pass) {
        if (m == 0) break;
        Eigen::VectorXd coefs = q.leftCols(m).transpose() * v;
        v.noalias() -= q.leftCols(m) * coefs;
    }
    return v.squaredNorm();
}

struct Candidate {
    std::size_t parent = 0;
    Eigen::Index var = -1;
    double knot = 0.0;
    double gain = -1.0;
};

// Best SSE reduction over all knots for one (parent, variable) combination.
// Adding the reflected pair {p*(x-t)+, p*(t-x)+} to a model containing p
// spans the same space as adding {p*x, p*(t-x)+}, so the gain splits into a
// knot-independent part (u = p.*x) and a swept part (w_t = p.*(t-x)+) whose
// inner products against the model update in one pass over x sorted
// ascending:
//   w_t' q_j = t*S0_j - S1_j with S0_j = sum_{x_i<t} p_i q_ij,
//                               S1_j = sum_{x_i<t} p_i x_i q_ij.
Candidate best_knot_for(const ForwardModel& model, std::size_t parent_idx,
                        const Eigen::VectorXd& parent_col, Eigen::Index var,
                        const Eigen::VectorXd& xcol, const std::vector<int>& sorted_order,
                        const std::vector<double>& knots) {
    Candidate best;
    best.parent = parent_idx;
    best.var = var;
    const Eigen::Index m = model.q.cols();

    Eigen::VectorXd u = parent_col.cwiseProduct(xcol);
    const double u_norm2 = u.squaredNorm();
    double u_perp2 = orthogonalize(model.q, m, u);
    double gain_u = 0.0;
    bool have_u = false;
    if (u_norm2 > 0.0 && u_perp2 > 1e-10 * u_norm2) {
        u /= std::sqrt(u_perp2);
        const double proj = u.dot(model.resid);
        gain_u = proj * proj;
        have_u = true;
    }

    // Prefix accumulators over sorted x: model columns, the u direction, the
    // residual, and the pure moments of parent^2.
    Eigen::VectorXd s0 = Eigen::VectorXd::Zero(m);
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(m);
    double su0 = 0.0, su1 = 0.0;
    double r0 = 0.0, r1 = 0.0;
    double p0 = 0.0, p1 = 0.0, p2 = 0.0;
    const double u_dot_r = have_u ? u.dot(model.resid) : 0.0;

    std::size_t pos = 0;
    double best_gain = gain_u;
    double best_knot_val = knots.empty() ? 0.0 : knots.front();
    bool any = !knots.empty();
    for (double t : knots) {
        while (pos < sorted_order.size()) {
            const int i = sorted_order[pos];
            if (xcol[i] >= t) break;
            const double pi = parent_col[i];
            if (pi != 0.0) {
                const double pxi = pi * xcol[i];
                s0.noalias() += pi * model.q.row(i).transpose();
                s1.noalias() += pxi * model.q.row(i).transpose();
                if (have_u) {
                    su0 += pi * u[i];
                    su1 += pxi * u[i];
                }
                r0 += pi * model.resid[i];
                r1 += pxi * model.resid[i];
                p0 += pi * pi;
                p1 += pi * pxi;
                p2 += pxi * pxi;
            }
            ++pos;
        }
        const double w_norm2 = t * t * p0 - 2.0 * t * p1 + p2;
        if (w_norm2 <= 0.0) continue;
        double proj2 = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double c = t * s0[j] - s1[j];
            proj2 += c * c;
        }
        double wr = t * r0 - r1;
        if (have_u) {
            const double cu = t * su0 - su1;
            proj2 += cu * cu;
            wr -= cu * u_dot_r;
        }
        const double w_perp2 = w_norm2 - proj2;
        double gain_w = 0.0;
        if (w_perp2 > 1e-10 * w_norm2) gain_w = wr * wr / w_perp2;
        const double total = gain_u + gain_w;
        if (total > best_gain) {
            best_gain = total;
            best_knot_val = t;
        }
    }
    if (!any && !have_u) return best;  // nothing to offer
    best.gain = best_gain;
    if (knots.empty()) best.knot = std::numeric_limits<double>::quiet_NaN();
    else best.knot = best_knot_val;
    return best;
}

// Appends a raw column; keeps it only if it adds numerical rank.
bool append_column(ForwardModel& model, const Eigen::VectorXd& col, const BasisFunction& term) {
    Eigen::VectorXd v = col;
    const double norm2 = col.squaredNorm();
    const double perp2 = orthogonalize(model.q, model.q.cols(), v);
    if (norm2 <= 0.0 || perp2 <= 1e-12 * norm2) return false;
    v /= std::sqrt(perp2);
    const Eigen::Index n = model.raw.rows();
    model.raw.conservativeResize(n, model.raw.cols() + 1);
    model.raw.col(model.raw.cols() - 1) = col;
    model.q.conservativeResize(n, model.q.cols() + 1);
    model.q.col(model.q.cols() - 1) = v;
    model.resid.noalias() -= v * v.dot(model.resid);
    model.terms.push_back(term);
    return true;
}

// Backward elimination on the Gram matrix: SSE(S) = y'y - c_S' G_S^{-1} c_S.
// Effective parameters charge 3 per knot, with knots = (terms - 1) / 2.
struct PruneResult {
    std::vector<int> keep;
};

double subset_sse(const Eigen::MatrixXd& gram, const Eigen::VectorXd& c, double yss,
                  const std::vector<int>& subset) {
    const Eigen::Index k = static_cast<Eigen::Index>(subset.size());
    Eigen::MatrixXd g(k, k);
    Eigen::VectorXd cs(k);
    for (Eigen::Index a = 0; a < k; ++a) {
        cs[a] = c[subset[a]];
        for (Eigen::Index b = 0; b < k; ++b) g(a, b) = gram(subset[a], subset[b]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g);
    if (ldlt.info() != Eigen::Success) return kInf;
    const double explained = cs.dot(ldlt.solve(cs));
    return std::max(0.0, yss - explained);
}

double gcv_of(double sse, double n_terms, double n) {
    const double eff = n_terms + 3.0 * (n_terms - 1.0) / 2.0;
    if (eff >= n) return kInf;
    const double denom = 1.0 - eff / n;
    return (sse / n) / (denom * denom);
}

PruneResult prune_terms(const Eigen::MatrixXd& raw, const Eigen::VectorXd& y) {
    const Eigen::Index m = raw.cols();
    const double n = static_cast<double>(raw.rows());
    const Eigen::MatrixXd gram = raw.transpose() * raw;
    const Eigen::VectorXd c = raw.transpose() * y;
    const double yss = y.squaredNorm();

    std::vector<int> current(m);
    std::iota(current.begin(), current.end(), 0);
    std::vector<int> best = current;
    double best_gcv = gcv_of(subset_sse(gram, c, yss, current), static_cast<double>(m), n);

    while (current.size() > 1) {
        double step_gcv = kInf;
        std::size_t drop = 0;
        for (std::size_t j = 0; j < current.size(); ++j) {
            if (current[j] == 0) continue;  // intercept stays
            std::vector<int> trial;
            trial.reserve(current.size() - 1);
            for (std::size_t a = 0; a < current.size(); ++a)
                if (a != j) trial.push_back(current[a]);
            const double g =
                gcv_of(subset_sse(gram, c, yss, trial), static_cast<double>(trial.size()), n);
            if (g < step_gcv) {
                step_gcv = g;
                drop = j;
            }
        }
        if (!std::isfinite(step_gcv)) break;
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
        if (step_gcv < best_gcv) {
            best_gcv = step_gcv;
            best = current;
        }
    }
    return PruneResult{best};
}

RegressionFit finalize_fit(LearnerKind kind, std::vector<BasisFunction> bases,
                           const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                           std::vector<double> mse_path, const std::string& name) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    Eigen::VectorXd coefs;
    if (qr.rank() < design.cols()) {
        // Exactly-collinear leftovers: fall back to a whisper of ridge.
        Eigen::MatrixXd gram = design.transpose() * design;
        const double eps = 1e-10 * gram.diagonal().maxCoeff();
        for (Eigen::Index j = 0; j < gram.rows(); ++j) gram(j, j) += eps;
        coefs = Eigen::LDLT<Eigen::MatrixXd>(gram).solve(design.transpose() * y);
    } else {
        coefs = qr.solve(y);
    }
    RegressionFit fit;
    fit.kind = kind;
    fit.bases = std::move(bases);
    fit.coefficients = coefs;
    fit.fitted = design * coefs;
    fit.training_mse = (y - fit.fitted).squaredNorm() / static_cast<double>(y.size());
    fit.forward_mse_path = std::move(mse_path);
    fit.name = name;
    return fit;
}

}  // namespace

Eigen::VectorXd predict(const RegressionFit& fit, const Frame& frame) {
    return design_matrix(fit.bases, frame) * fit.coefficients;
}

RegressionFit fit_linear(const Frame& x, const Eigen::VectorXd& y, double ridge_penalty) {
    if (x.rows() != y.size()) throw NumericError("design/response length mismatch");
    if (!x.values.allFinite() || !y.allFinite())
        throw NumericError("non-finite values in regression inputs");
    if (ridge_penalty < 0.0) throw ConfigError("ridge penalty must be nonnegative");

    std::vector<BasisFunction> bases;
    bases.push_back(intercept_basis());
    for (const auto& name : x.names) bases.push_back(linear_basis(name));

    Eigen::MatrixXd design(x.rows(), x.cols() + 1);
    design.col(0).setOnes();
    design.rightCols(x.cols()) = x.values;

    const Eigen::VectorXd coefs = solve_penalized(design, y, ridge_penalty);
    RegressionFit fit;
    fit.kind = ridge_penalty > 0.0 ? LearnerKind::Ridge : LearnerKind::Linear;
    fit.bases = std::move(bases);
    fit.coefficients = coefs;
    fit.fitted = design * coefs;
    fit.training_mse = (y - fit.fitted).squaredNorm() / static_cast<double>(y.size());
    fit.name = ridge_penalty > 0.0 ? "ridge" : "linear";
    return fit;
}

RegressionFit fit_mars(const Frame& x, const Eigen::VectorXd& y, const MarsHyper& hyper) {
    if (hyper.max_degree < 1 || hyper.max_degree > 2)
        throw ConfigError("mars max_degree must be 1 or 2");
    if (hyper.max_terms < 2) throw ConfigError("mars max_terms must be at least 2");
    if (hyper.knot_grid_size < 3) throw ConfigError("mars knot_grid_size must be at least 3");
    if (x.rows() != y.size()) throw NumericError("design/response length mismatch");

    const Eigen::Index n = x.rows();
    if (n < 20) {
        RegressionFit fit = fit_linear(x, y, 1e-8);
        fit.name = "mars:linear_fallback";
        return fit;
    }

    const Eigen::Index nvar = x.cols();
    std::vector<std::vector<double>> knots(static_cast<std::size_t>(nvar));
    std::vector<std::vector<int>> sorted(static_cast<std::size_t>(nvar));
    for (Eigen::Index v = 0; v < nvar; ++v) {
        knots[v] = knot_grid(x.values.col(v), hyper.knot_grid_size);
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return x.values(a, v) < x.values(b, v); });
        sorted[v] = std::move(order);
    }

    ForwardModel model;
    model.terms.push_back(intercept_basis());
    model.raw = Eigen::MatrixXd::Ones(n, 1);
    model.q = RowMajorMatrix::Constant(n, 1, 1.0 / std::sqrt(static_cast<double>(n)));
    model.resid = y;
    model.resid.array() -= y.mean();
    const double tss = model.resid.squaredNorm();
    model.mse_path.push_back(tss / static_cast<double>(n));

    // Fast-MARS bookkeeping: re-examine only the most promising parents each
    // step, refreshing stale ones every third step.
    std::vector<double> parent_gain;
    std::vector<int> parent_age;
    parent_gain.push_back(kInf);
    parent_age.push_back(-1);

    // Forward stopping tracks the GCV-based R^2: a candidate pair must
    // improve it by at least kForwardThresh or the pass ends.
    constexpr double kForwardThresh = 1e-3;
    const double n_d = static_cast<double>(n);
    const double gcv_null = gcv_of(tss, 1.0, n_d);

    int step = 0;
    while (static_cast<int>(model.terms.size()) + 2 <= hyper.max_terms && tss > 0.0) {
        ++step;
        std::vector<std::size_t> to_eval;
        {
            std::vector<std::size_t> ranked;
            for (std::size_t pi = 0; pi < model.terms.size(); ++pi) {
                if (static_cast<int>(model.terms[pi].factors.size()) >= hyper.max_degree) continue;
                if (parent_age[pi] < 0 || step - parent_age[pi] >= 3) {
                    to_eval.push_back(pi);
                } else {
                    ranked.push_back(pi);
                }
            }
            std::sort(ranked.begin(), ranked.end(), [&](std::size_t a, std::size_t b) {
                if (parent_gain[a] != parent_gain[b]) return parent_gain[a] > parent_gain[b];
                return a < b;
            });
            for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) to_eval.push_back(ranked[i]);
            std::sort(to_eval.begin(), to_eval.end());
        }
        if (to_eval.empty()) break;

        Candidate best;
        for (std::size_t pi : to_eval) {
            const auto parent_vars = model.terms[pi].variable_set();
            Candidate parent_best;
            for (Eigen::Index v = 0; v < nvar; ++v) {
                if (parent_vars.count(x.names[static_cast<std::size_t>(v)])) continue;
                if (knots[v].empty()) continue;
                const Candidate c = best_knot_for(model, pi, model.raw.col(static_cast<Eigen::Index>(pi)),
                                                  v, x.values.col(v), sorted[v], knots[v]);
                if (c.gain > parent_best.gain) parent_best = c;
            }
            parent_gain[pi] = parent_best.gain;
            parent_age[pi] = step;
            if (parent_best.gain > best.gain) best = parent_best;
        }
        if (best.var < 0 || best.gain <= 0.0) break;
        {
            const double rss_now = model.resid.squaredNorm();
            const double m_now = static_cast<double>(model.terms.size());
            const double grsq_now = 1.0 - gcv_of(rss_now, m_now, n_d) / gcv_null;
            const double grsq_next =
                1.0 - gcv_of(rss_now - best.gain, m_now + 2.0, n_d) / gcv_null;
            if (grsq_next - grsq_now < kForwardThresh) break;
        }

        const std::string var_name = x.names[static_cast<std::size_t>(best.var)];
        const Eigen::VectorXd xcol = x.values.col(best.var);
        const Eigen::VectorXd parent_col = model.raw.col(static_cast<Eigen::Index>(best.parent));
        const BasisFunction& parent_term = model.terms[best.parent];

        BasisFunction up = parent_term;
        up.factors.push_back({var_name, FactorKind::HingeUp, best.knot});
        BasisFunction down = parent_term;
        down.factors.push_back({var_name, FactorKind::HingeDown, best.knot});

        const Eigen::VectorXd col_up = parent_col.cwiseProduct((xcol.array() - best.knot).max(0.0).matrix());
        const Eigen::VectorXd col_down = parent_col.cwiseProduct((best.knot - xcol.array()).max(0.0).matrix());
        bool added = false;
        if (append_column(model, col_up, up)) {
            parent_gain.push_back(-1.0);
            parent_age.push_back(-1);
            added = true;
        }
        if (append_column(model, col_down, down)) {
            parent_gain.push_back(-1.0);
            parent_age.push_back(-1);
            added = true;
        }
        if (!added) {
            parent_gain[best.parent] = -1.0;  // nothing new here; move on
            continue;
        }
        model.mse_path.push_back(model.resid.squaredNorm() / static_cast<double>(n));
    }

    std::vector<int> keep(model.terms.size());
    std::iota(keep.begin(), keep.end(), 0);
    if (hyper.prune && model.terms.size() > 1) keep = prune_terms(model.raw, y).keep;

    std::vector<BasisFunction> bases;
    Eigen::MatrixXd design(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t j = 0; j < keep.size(); ++j) {
        bases.push_back(model.terms[static_cast<std::size_t>(keep[j])]);
        design.col(static_cast<Eigen::Index>(j)) = model.raw.col(keep[j]);
    }
    return finalize_fit(LearnerKind::Mars, std::move(bases), design, y, model.mse_path, "mars");
}

RegressionFit fit_candidate(const LearnerSpec& spec, const Frame& x, const Eigen::VectorXd& y) {
    RegressionFit fit;
    if (std::holds_alternative<LinearSpec>(spec.spec)) {
        fit = fit_linear(x, y, std::get<LinearSpec>(spec.spec).penalty);
    } else {
        fit = fit_mars(x, y, std::get<MarsHyper>(spec.spec));
    }
    fit.name = spec.name;
    return fit;
}

CvSelection cv_select(const LearnerGrid& grid, const Frame& x, const Eigen::VectorXd& y,
                      std::uint64_t seed) {
    if (grid.candidates.empty()) throw ConfigError("learner grid is empty");
    std::set<std::string> names;
    for (const auto& c : grid.candidates)
        if (!names.insert(c.name).second)
            throw ConfigError("duplicate learner name '" + c.name + "' in grid");

    CvSelection sel;
    sel.cv_mse.assign(grid.candidates.size(), kInf);

    if (grid.candidates.size() == 1) {
        sel.fit = fit_candidate(grid.candidates[0], x, y);
        sel.cv_mse[0] = sel.fit.training_mse;
        return sel;
    }

    const std::size_t n = static_cast<std::size_t>(x.rows());
    int v = grid.inner_folds;
    if (static_cast<std::size_t>(2 * v) > n) v = std::max<int>(2, static_cast<int>(n / 2));
    const FoldAssignment folds = make_folds(n, v, mix_seed(seed, 0x73656c65ULL));

    for (std::size_t k = 0; k < grid.candidates.size(); ++k) {
        double sse = 0.0;
        bool ok = true;
        try {
            for (int f = 1; f <= v; ++f) {
                const auto train = folds.training_rows(f);
                const auto valid = folds.validation_rows(f);
                const RegressionFit fit =
                    fit_candidate(grid.candidates[k], subset_frame(x, train), subset_vector(y, train));
                const Eigen::VectorXd pred = predict(fit, subset_frame(x, valid));
                sse += (pred - subset_vector(y, valid)).squaredNorm();
            }
        } catch (const std::exception& e) {
            ok = false;
            sel.errors.push_back(grid.candidates[k].name + ": " + e.what());
        }
        if (ok && std::isfinite(sse)) sel.cv_mse[k] = sse / static_cast<double>(n);
    }

    std::size_t winner = 0;
    double best = kInf;
    for (std::size_t k = 0; k < sel.cv_mse.size(); ++k) {
        if (sel.cv_mse[k] < best) {
            best = sel.cv_mse[k];
            winner = k;
        }
    }
    if (!std::isfinite(best)) {
        std::ostringstream os;
        os << "all learner candidates failed:";
        for (const auto& e : sel.errors) os << "\n  " << e;
        throw NumericError(os.str());
    }
    sel.winner = winner;
    sel.fit = fit_candidate(grid.candidates[winner], x, y);
    return sel;
}

namespace {

LearnerSpec mars_spec(int degree, int terms, int knots) {
    std::ostringstream name;
    name << "mars_d" << degree << "_t" << terms << "_k" << knots;
    return LearnerSpec{name.str(), MarsHyper{degree, terms, knots, true}};
}

}  // namespace

LearnerGrid discovery_grid() {
    LearnerGrid g;
    g.candidates = {
        mars_spec(1, 11, 5), mars_spec(1, 11, 9),  mars_spec(1, 15, 5), mars_spec(1, 15, 9),
        mars_spec(1, 21, 9), mars_spec(1, 21, 15), mars_spec(2, 11, 5), mars_spec(2, 11, 9),
        mars_spec(2, 15, 5), mars_spec(2, 15, 9),  mars_spec(2, 21, 9), mars_spec(2, 21, 15),
        mars_spec(2, 27, 9),
    };
    return g;
}

LearnerGrid outcome_grid() {
    LearnerGrid g = discovery_grid();
    g.candidates.push_back(LearnerSpec{"ridge", LinearSpec{1.0}});
    return g;
}

LearnerGrid density_mean_grid() {
    LearnerGrid g;
    g.candidates = {
        LearnerSpec{"linear", LinearSpec{1e-8}},
        LearnerSpec{"ridge", LinearSpec{1.0}},
        mars_spec(1, 11, 7),
        mars_spec(1, 21, 9),
        mars_spec(2, 15, 7),
    };
    return g;
}

}  // namespace mixshift
