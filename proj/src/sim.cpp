#include "mixshift/sim.hpp"

#include "mixshift/errors.hpp"
#include "mixshift/frame.hpp"
#include "mixshift/stats.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

namespace mixshift {

namespace {

struct DgpDraws {
    std::vector<double> w1, w2, w3, a1, a2, a3, a4, noise;
};

// Raw draws with the noise separated out so shifted outcomes can be
// regenerated counterfactually.
DgpDraws draw_dgp(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(mix_seed(seed, 0xd97ULL));
    std::normal_distribution<double> z(0.0, 1.0);
    std::bernoulli_distribution bern(0.5);

    DgpDraws d;
    d.w1.resize(n);
    d.w2.resize(n);
    d.w3.resize(n);
    d.a1.resize(n);
    d.a2.resize(n);
    d.a3.resize(n);
    d.a4.resize(n);
    d.noise.resize(n);

    // Cholesky factors of the two covariance matrices.
    const double lw21 = 0.4;
    const double lw22 = std::sqrt(1.0 - 0.4 * 0.4);
    // Sigma_A = {{1,.5,.8},{.5,1,.7},{.8,.7,1}}
    const double l11 = 1.0;
    const double l21 = 0.5;
    const double l22 = std::sqrt(1.0 - l21 * l21);
    const double l31 = 0.8;
    const double l32 = (0.7 - l31 * l21) / l22;
    const double l33 = std::sqrt(1.0 - l31 * l31 - l32 * l32);

    for (std::size_t i = 0; i < n; ++i) {
        const double z1 = z(rng), z2 = z(rng);
        d.w1[i] = 6.0 + z1;
        d.w2[i] = 7.0 + lw21 * z1 + lw22 * z2;
        d.w3[i] = bern(rng) ? 1.0 : 0.0;

        const double mu1 = std::exp(d.w1[i] / 2.0);
        const double mu2 = d.w2[i] / 2.0;
        const double mu3 = 5.0;
        const double e1 = z(rng), e2 = z(rng), e3 = z(rng);
        d.a1[i] = mu1 + l11 * e1;
        d.a2[i] = mu2 + l21 * e1 + l22 * e2;
        d.a3[i] = mu3 + l31 * e1 + l32 * e2 + l33 * e3;
        d.a4[i] = 4.0 + std::sqrt(2.0) * z(rng);
        d.noise[i] = z(rng);
    }
    return d;
}

double outcome_at(const DgpDraws& d, std::size_t i, double a1, double a3, double a4) {
    const double mod = d.w3[i] == 1.0 ? a3 * a3 : a3;
    return 1.3 * a4 + 0.4 * a4 * a1 + 0.1 * d.w1[i] + 0.3 * d.w2[i] + d.noise[i] + mod;
}

double shift_of(const ShiftSpec& shift, const std::string& name) {
    auto it = shift.delta.find(name);
    return it == shift.delta.end() ? 0.0 : it->second;
}

}  // namespace

DgpSample gen_dgp(std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ConfigError("sample size must be positive");
    const DgpDraws d = draw_dgp(n, seed);

    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = outcome_at(d, i, d.a1[i], d.a3[i], d.a4[i]);

    std::map<std::string, std::vector<double>> cols = {
        {"W1", d.w1}, {"W2", d.w2}, {"W3", d.w3}, {"A1", d.a1},
        {"A2", d.a2}, {"A3", d.a3}, {"A4", d.a4}, {"Y", y},
    };
    std::map<std::string, Role> roles = {
        {"W1", Role::Covariate}, {"W2", Role::Covariate}, {"W3", Role::Covariate},
        {"A1", Role::Exposure},  {"A2", Role::Exposure},  {"A3", Role::Exposure},
        {"A4", Role::Exposure},  {"Y", Role::Outcome},
    };
    return DgpSample{Dataset(std::move(cols), std::move(roles)), seed};
}

double ground_truth(TruthKind kind, const ShiftSpec& shift, std::size_t n_mc, std::uint64_t seed) {
    if (shift.targets.empty()) throw ConfigError("ground truth needs at least one shift target");
    if (kind == TruthKind::Interaction && shift.targets.size() != 2)
        throw ConfigError("interaction truth needs exactly two targets");
    for (const auto& t : shift.targets)
        if (t != "A1" && t != "A2" && t != "A3" && t != "A4")
            throw ConfigError("unknown exposure '" + t + "' in the benchmark process");

    const DgpDraws d = draw_dgp(n_mc, mix_seed(seed, 0x9cULL));
    const double s1 = shift_of(shift, "A1");
    const double s3 = shift_of(shift, "A3");
    const double s4 = shift_of(shift, "A4");

    long double acc = 0.0L;
    if (kind == TruthKind::Shift) {
        for (std::size_t i = 0; i < n_mc; ++i) {
            const double y_obs = outcome_at(d, i, d.a1[i], d.a3[i], d.a4[i]);
            const double y_shift = outcome_at(d, i, d.a1[i] + s1, d.a3[i] + s3, d.a4[i] + s4);
            acc += y_shift - y_obs;
        }
    } else {
        const std::string& t1 = shift.targets[0];
        const std::string& t2 = shift.targets[1];
        for (std::size_t i = 0; i < n_mc; ++i) {
            auto shifted = [&](bool move1, bool move2) {
                const double a1 = d.a1[i] + (move1 && t1 == "A1" ? s1 : 0.0) +
                                  (move2 && t2 == "A1" ? s1 : 0.0);
                const double a3 = d.a3[i] + (move1 && t1 == "A3" ? s3 : 0.0) +
                                  (move2 && t2 == "A3" ? s3 : 0.0);
                const double a4 = d.a4[i] + (move1 && t1 == "A4" ? s4 : 0.0) +
                                  (move2 && t2 == "A4" ? s4 : 0.0);
                return outcome_at(d, i, a1, a3, a4);
            };
            acc += shifted(true, true) - shifted(true, false) - shifted(false, true) +
                   shifted(false, false);
        }
    }
    return static_cast<double>(acc / static_cast<long double>(n_mc));
}

namespace {

struct RepOutcome {
    bool found = false;
    double psi = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    int folds_with_set = 0;
    bool failed = false;
};

}  // namespace

std::vector<MetricsRow> run_convergence(const std::vector<std::size_t>& ns, int reps,
                                        const EngineSettings& cfg, std::uint64_t seed) {
    if (reps < 2) throw ConfigError("run_convergence needs at least 2 replicates");

    struct Target {
        std::string parameter;
        ParamKey key;
        double truth;
    };
    const ShiftSpec shift_a4 = make_shift("A4", cfg.delta_for("A4"));
    const ShiftSpec shift_pair =
        make_shift("A1", cfg.delta_for("A1"), "A4", cfg.delta_for("A4"));
    const std::size_t n_truth = 4'000'000;
    const std::vector<Target> targets = {
        {"individual", ParamKey{{"A4"}, EstimandKind::Individual, "A4"},
         ground_truth(TruthKind::Shift, shift_a4, n_truth, seed)},
        {"joint", ParamKey{{"A1", "A4"}, EstimandKind::Joint, ""},
         ground_truth(TruthKind::Shift, shift_pair, n_truth, seed)},
        {"interaction", ParamKey{{"A1", "A4"}, EstimandKind::Interaction, ""},
         ground_truth(TruthKind::Interaction, shift_pair, n_truth, seed)},
    };

    std::vector<MetricsRow> out;
    for (std::size_t n : ns) {
        std::vector<std::vector<RepOutcome>> results(
            targets.size(), std::vector<RepOutcome>(static_cast<std::size_t>(reps)));
        std::vector<int> failures(static_cast<std::size_t>(reps), 0);

        parallel_for(static_cast<std::size_t>(reps), cfg.threads, [&](std::size_t rep) {
            const std::uint64_t rep_seed = mix_seed(seed, n, rep);
            EngineSettings rep_cfg = cfg;
            rep_cfg.threads = 1;  // replicates are the parallel unit
            try {
                const DgpSample sample = gen_dgp(n, rep_seed);
                const AnalysisReport report = run(sample.data, rep_cfg, mix_seed(rep_seed, 1));
                for (std::size_t t = 0; t < targets.size(); ++t) {
                    RepOutcome& ro = results[t][rep];
                    for (const auto& row : report.pooled) {
                        if (!(row.key == targets[t].key)) continue;
                        ro.found = true;
                        ro.psi = row.psi;
                        ro.ci_lo = row.ci_lo;
                        ro.ci_hi = row.ci_hi;
                        ro.folds_with_set = row.n_folds_found;
                    }
                }
            } catch (const std::exception&) {
                failures[rep] = 1;
                for (std::size_t t = 0; t < targets.size(); ++t) results[t][rep].failed = true;
            }
        });

        for (std::size_t t = 0; t < targets.size(); ++t) {
            MetricsRow row;
            row.n = n;
            row.parameter = targets[t].parameter;
            std::vector<double> psis;
            int covered = 0, folds_found = 0, reps_used = 0;
            for (const auto& ro : results[t]) {
                if (ro.failed) {
                    ++row.failures;
                    continue;
                }
                ++reps_used;
                folds_found += ro.folds_with_set;
                if (!ro.found) continue;
                psis.push_back(ro.psi);
                if (ro.ci_lo <= targets[t].truth && targets[t].truth <= ro.ci_hi) ++covered;
            }
            if (!psis.empty()) {
                const Eigen::VectorXd v = to_vector(psis);
                row.bias = v.mean() - targets[t].truth;
                row.variance = sample_variance(v);
                row.mse_times_n =
                    static_cast<double>(n) * (row.bias * row.bias + row.variance);
                row.coverage = static_cast<double>(covered) / static_cast<double>(psis.size());
            }
            row.discovery_rate =
                reps_used > 0 ? static_cast<double>(folds_found) /
                                    static_cast<double>(reps_used * cfg.folds)
                              : 0.0;
            out.push_back(row);
        }
    }
    return out;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream os;
    os << "n,parameter,bias,variance,mse_times_n,coverage,discovery_rate,failures\n";
    os.precision(10);
    for (const auto& r : rows) {
        os << r.n << "," << r.parameter << "," << r.bias << "," << r.variance << ","
           << r.mse_times_n << "," << r.coverage << "," << r.discovery_rate << "," << r.failures
           << "\n";
    }
    return os.str();
}

QgcompResult qgcomp_baseline(const Dataset& data, int q) {
    if (q < 2) throw ConfigError("qgcomp needs at least 2 quantiles");
    const std::vector<std::string> exposures = data.exposures();
    if (exposures.empty()) throw ConfigError("qgcomp needs at least one exposure");

    Dataset quantized = data;
    for (const auto& e : exposures) {
        const std::vector<double>& col = data.column(e);
        std::set<double> distinct(col.begin(), col.end());
        if (static_cast<int>(distinct.size()) < q)
            throw ConfigError("exposure '" + e + "' has fewer than " + std::to_string(q) +
                              " distinct values");
        std::vector<double> cuts;
        for (int j = 1; j < q; ++j)
            cuts.push_back(quantile_type7(col, static_cast<double>(j) / static_cast<double>(q)));
        std::vector<double> idx(col.size());
        for (std::size_t i = 0; i < col.size(); ++i) {
            int bin = 0;
            for (double c : cuts)
                if (col[i] > c) ++bin;  // ties stay in the lower bin
            idx[i] = static_cast<double>(bin);
        }
        quantized = quantized.with_column(e, std::move(idx));
    }

    std::vector<std::string> predictors = exposures;
    for (const auto& w : data.covariates()) predictors.push_back(w);
    const Frame x = make_frame(quantized, predictors);
    const Eigen::VectorXd y = to_vector(quantized.outcome());
    const RegressionFit fit = fit_linear(x, y, 0.0);

    QgcompResult out;
    // fit.bases = intercept then predictors in frame order.
    for (std::size_t j = 0; j < exposures.size(); ++j) {
        const double b = fit.coefficients[static_cast<Eigen::Index>(j) + 1];
        out.coefficients[exposures[j]] = b;
        out.psi_total += b;
        if (b > 0.0) {
            out.psi_pos += b;
        } else {
            out.psi_neg += b;
        }
    }
    for (const auto& [name, b] : out.coefficients) {
        const double group = b > 0.0 ? out.psi_pos : out.psi_neg;
        out.weights[name] = group != 0.0 ? b / group : 0.0;
    }
    return out;
}

}  // namespace mixshift
