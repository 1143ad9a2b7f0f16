#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mixshift/engine.hpp"
#include "mixshift/sim.hpp"
#include "mixshift/stats.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace mixshift;

namespace {

CondDensityFit exact_gaussian_fit(double sigma = 1.0) {
    CondDensityFit fit;
    fit.exposure = "A1";
    fit.context = {"W1"};
    fit.kind = DensityKind::HOSE;
    RegressionFit mean;
    mean.bases = {intercept_basis(), linear_basis("W1")};
    mean.coefficients.resize(2);
    mean.coefficients << 0.0, 1.0;
    fit.mean_fit = mean;
    fit.sigma_const = sigma;
    fit.sigma_min = 1e-6;
    return fit;
}

EngineSettings fast_settings(int folds) {
    EngineSettings cfg;
    cfg.folds = folds;
    cfg.threads = 2;
    return cfg;
}

Dataset null_dataset(std::size_t n, std::uint64_t seed) {
    return testutil::make_dataset({{"A1", testutil::normal_draws(n, seed)},
                                   {"A2", testutil::normal_draws(n, seed + 1)},
                                   {"W1", testutil::normal_draws(n, seed + 2)},
                                   {"Y", testutil::normal_draws(n, seed + 3)}});
}

// Synthetic targeting material for pool() tests.
ShiftRows synthetic_rows(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.05, 0.95);
    ShiftRows rows;
    rows.logit_q_obs.resize(n);
    rows.logit_q_shift.resize(n);
    rows.h_obs.resize(n);
    rows.h_shift.resize(n);
    rows.y_scaled.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rows.logit_q_obs[i] = z(rng);
        rows.logit_q_shift[i] = z(rng) + 0.3;
        rows.h_obs[i] = std::exp(0.5 * z(rng));
        rows.h_shift[i] = std::exp(0.5 * z(rng));
        rows.y_scaled[i] = u(rng);
    }
    return rows;
}

FoldResult synthetic_fold(int k, const ParamKey& key, std::size_t n, std::uint64_t seed,
                          const ScalingRecord& rec) {
    FoldResult fr;
    fr.fold = k;
    fr.selected_sets = {key.exposure_set};
    ShiftRows rows = synthetic_rows(n, seed);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = rec.from_unit(rows.y_scaled[i]);
    fr.valid_y = y;
    const TmleEstimate level = target_shift_rows(rows, rec, key.kind, std::nullopt);
    const TmleEstimate my = estimate_mean_y(y);
    fr.estimates.push_back({key, shift_contrast(level, my), level.psi});
    fr.rows.emplace(key, std::move(rows));
    fr.delta_used["A1"] = 1.0;
    return fr;
}

}  // namespace

TEST_CASE("adapt_delta keeps an admissible starting delta") {
    const std::size_t n = 200;
    const auto w = testutil::normal_draws(n, 3);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = w[i];  // a - mu = 0 everywhere
    const Dataset d = testutil::make_dataset({{"W1", w}, {"A1", a}, {"Y", w}});
    const CondDensityFit g = exact_gaussian_fit();
    // max H = exp(-delta^2/2) <= 1 for any delta: no reduction needed.
    CHECK(adapt_delta(g, d, 1.0, 50.0, 0.1) == 1.0);
    CHECK(adapt_delta(g, d, -2.5, 50.0, 0.1) == -2.5);
}

TEST_CASE("adapt_delta reduces by the stated fraction until admissible") {
    // With a = mu + r: max H = exp(delta * r_max - delta^2 / 2).
    const std::size_t n = 100;
    const auto w = testutil::normal_draws(n, 5);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = w[i];
    a[0] = w[0] + 4.0;  // r_max = 4
    const Dataset d = testutil::make_dataset({{"W1", w}, {"A1", a}, {"Y", w}});
    const CondDensityFit g = exact_gaussian_fit();
    // delta0 = 1: max H = exp(3.5) = 33.1.  Pick lambda between exp at 1.0
    // and at 0.9 so exactly one reduction is needed:
    // at 0.9, max H = exp(3.195) = 24.4.
    const double lambda = 30.0;
    const double adapted = adapt_delta(g, d, 1.0, lambda, 0.1);
    CHECK(adapted == doctest::Approx(0.9).epsilon(1e-12));
    // Unbounded cap disables adaptation entirely.
    CHECK(adapt_delta(g, d, 1.0, std::numeric_limits<double>::infinity(), 0.1) == 1.0);
}

TEST_CASE("adapt_delta gives up after 100 reductions") {
    const std::size_t n = 50;
    const auto w = testutil::normal_draws(n, 7);
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = w[i] + 3.0;
    const Dataset d = testutil::make_dataset({{"W1", w}, {"A1", a}, {"Y", w}});
    const CondDensityFit g = exact_gaussian_fit(0.05);  // huge ratios at any delta
    CHECK_THROWS_AS(adapt_delta(g, d, 1.0, 1.0001, 0.001), PositivityError);
    CHECK_THROWS_AS(adapt_delta(g, d, 0.0, 50.0, 0.1), ConfigError);
    CHECK_THROWS_AS(adapt_delta(g, d, 1.0, 50.0, 1.5), ConfigError);
}

TEST_CASE("run_fold selects the benchmark structure and estimates it" * doctest::timeout(900)) {
    const DgpSample sample = gen_dgp(2000, 21);
    const EngineSettings cfg = fast_settings(5);
    const FoldAssignment folds = make_folds(sample.data.n(), cfg.folds, 21);
    const auto [scaled, rec] = scale_outcome(sample.data);
    int pair_folds = 0;
    for (int k = 1; k <= cfg.folds; ++k) {
        const FoldResult fr = run_fold(k, scaled, rec, folds, cfg, mix_seed(21, k));
        bool has_pair = false;
        for (const auto& s : fr.selected_sets)
            if (s == std::vector<std::string>{"A1", "A4"}) has_pair = true;
        if (has_pair) {
            ++pair_folds;
            // A selected pair carries individual x2 + joint + interaction.
            int kinds = 0;
            for (const auto& rec2 : fr.estimates)
                if (rec2.key.exposure_set == std::vector<std::string>{"A1", "A4"}) ++kinds;
            CHECK(kinds == 4);
        }
        CHECK(!fr.discovery_learner.empty());
    }
    CHECK(pair_folds >= 4);
}

TEST_CASE("a null dataset yields mostly empty folds" * doctest::timeout(900)) {
    int empty = 0, total = 0;
    for (std::uint64_t seed : {31ULL, 32ULL}) {
        const Dataset d = null_dataset(1000, seed * 100);
        const AnalysisReport report = run(d, fast_settings(5), seed);
        for (const auto& fr : report.folds) {
            ++total;
            if (fr.estimates.empty()) ++empty;
        }
    }
    CHECK(total == 10);
    CHECK(empty >= 8);
}

TEST_CASE("pooling a single fold reproduces that fold") {
    const ScalingRecord rec{0.0, 10.0};
    const ParamKey key{{"A1"}, EstimandKind::Individual, "A1"};
    const FoldResult fr = synthetic_fold(1, key, 80, 9, rec);
    const auto pooled = pool({fr}, rec, 1);
    REQUIRE(pooled.size() == 1);
    CHECK(pooled[0].key == key);
    CHECK(pooled[0].psi == doctest::Approx(fr.estimates[0].estimate.psi).epsilon(1e-10));
    CHECK(pooled[0].se == doctest::Approx(fr.estimates[0].estimate.se).epsilon(1e-10));
    CHECK(pooled[0].n_folds_found == 1);
    CHECK(pooled[0].mode == PoolingMode::Plain);
}

TEST_CASE("pooling identical folds reproduces the fold estimate") {
    const ScalingRecord rec{0.0, 10.0};
    const ParamKey key{{"A1"}, EstimandKind::Individual, "A1"};
    const FoldResult fr1 = synthetic_fold(1, key, 80, 9, rec);
    FoldResult fr2 = synthetic_fold(2, key, 80, 9, rec);  // same seed: identical data
    const auto pooled = pool({fr1, fr2}, rec, 2);
    REQUIRE(pooled.size() == 1);
    CHECK(pooled[0].psi == doctest::Approx(fr1.estimates[0].estimate.psi).epsilon(1e-6));
    CHECK(pooled[0].n_folds_found == 2);
}

TEST_CASE("the pooled EIF mean vanishes after the shared fluctuation") {
    const ScalingRecord rec{0.0, 10.0};
    const ParamKey key{{"A1"}, EstimandKind::Individual, "A1"};
    const FoldResult fr1 = synthetic_fold(1, key, 70, 11, rec);
    const FoldResult fr2 = synthetic_fold(2, key, 70, 12, rec);
    ShiftRows stacked = fr1.rows.at(key);
    stacked.append(fr2.rows.at(key));
    const TmleEstimate level = target_shift_rows(stacked, rec, key.kind, std::nullopt);
    CHECK(std::fabs(level.eif.mean()) < 1e-8);
}

TEST_CASE("pool_with_null reproduces the hand-computed blend") {
    PooledResult row;
    row.key = {{"A1", "A4"}, EstimandKind::Interaction, ""};
    row.psi = 1.0;
    row.se = 0.1;  // var 0.01
    row.n_folds_found = 19;
    row.n_folds_total = 20;

    const PooledResult blended = pool_with_null(row, 1, 19);
    CHECK(blended.psi == doctest::Approx(0.95).epsilon(1e-12));
    CHECK(blended.se * blended.se == doctest::Approx(0.0095).epsilon(1e-12));
    CHECK(blended.mode == PoolingMode::InverseVarianceNull);

    // n0 = n1 halves both the estimate and the variance.
    PooledResult even = row;
    even.psi = 0.8;
    even.se = std::sqrt(0.04);
    const PooledResult half = pool_with_null(even, 10, 10);
    CHECK(half.psi == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(half.se * half.se == doctest::Approx(0.02).epsilon(1e-12));

    // Nothing to blend: input returned unchanged.
    const PooledResult same = pool_with_null(row, 0, 20);
    CHECK(same.psi == row.psi);
    CHECK(same.mode == PoolingMode::Plain);

    PooledResult degenerate = row;
    degenerate.se = 0.0;
    CHECK_THROWS_AS(pool_with_null(degenerate, 1, 19), DataError);
}

TEST_CASE("null blending always shrinks toward zero") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.01, 2.0);
    for (int trial = 0; trial < 50; ++trial) {
        PooledResult row;
        row.key = {{"A1"}, EstimandKind::Individual, "A1"};
        row.psi = 3.0 * z(rng);
        row.se = u(rng);
        const int n1 = 1 + static_cast<int>(rng() % 19);
        const int n0 = 1 + static_cast<int>(rng() % 19);
        const PooledResult blended = pool_with_null(row, n0, n1);
        CHECK(std::fabs(blended.psi) <= std::fabs(row.psi) + 1e-15);
        CHECK(blended.se < row.se + 1e-15);
        // psi* = psi * n1 / (n0 + n1) exactly.
        CHECK(blended.psi ==
              doctest::Approx(row.psi * n1 / static_cast<double>(n0 + n1)).epsilon(1e-10));
    }
}

TEST_CASE("validation rows cannot steer their own fold's discovery") {
    const DgpSample sample = gen_dgp(300, 41);
    const EngineSettings cfg = fast_settings(3);
    const FoldAssignment folds = make_folds(sample.data.n(), cfg.folds, 41);
    const auto [scaled, rec] = scale_outcome(sample.data);
    const FoldResult before = run_fold(1, scaled, rec, folds, cfg, 7);

    // Perturb one of fold 1's validation outcomes (within the outcome range
    // so the global scaling record stays valid).
    const auto valid_rows = folds.validation_rows(1);
    REQUIRE(!valid_rows.empty());
    std::vector<double> y = scaled.outcome();
    y[valid_rows[0]] = y[valid_rows[0]] < 0.5 ? y[valid_rows[0]] + 0.4 : y[valid_rows[0]] - 0.4;
    const Dataset perturbed = scaled.with_column(scaled.outcome_name(), y);
    const FoldResult after = run_fold(1, perturbed, rec, folds, cfg, 7);

    CHECK(before.selected_sets == after.selected_sets);
    CHECK(before.delta_used == after.delta_used);
    CHECK(before.discovery_learner == after.discovery_learner);
}

TEST_CASE("pooled standard errors shrink with sample size" * doctest::timeout(1800)) {
    const ParamKey key{{"A4"}, EstimandKind::Individual, "A4"};
    auto mean_se = [&](std::size_t n, std::uint64_t seed0) {
        double acc = 0.0;
        int found = 0;
        for (std::uint64_t r = 0; r < 3; ++r) {
            const DgpSample sample = gen_dgp(n, seed0 + r);
            const AnalysisReport report = run(sample.data, fast_settings(5), seed0 + 10 * r);
            for (const auto& row : report.pooled)
                if (row.key == key) {
                    acc += row.se;
                    ++found;
                }
        }
        REQUIRE(found == 3);
        return acc / 3.0;
    };
    const double se_small = mean_se(250, 51);
    const double se_large = mean_se(2000, 61);
    CHECK(se_large < se_small);
}

TEST_CASE("engine runs are deterministic") {
    const DgpSample sample = gen_dgp(400, 71);
    EngineSettings cfg = fast_settings(4);
    const AnalysisReport r1 = run(sample.data, cfg, 5);
    cfg.threads = 1;  // thread count must not change results
    const AnalysisReport r2 = run(sample.data, cfg, 5);
    REQUIRE(r1.pooled.size() == r2.pooled.size());
    for (std::size_t i = 0; i < r1.pooled.size(); ++i) {
        CHECK(r1.pooled[i].key == r2.pooled[i].key);
        CHECK(r1.pooled[i].psi == r2.pooled[i].psi);
        CHECK(r1.pooled[i].se == r2.pooled[i].se);
        CHECK(r1.pooled[i].p_value == r2.pooled[i].p_value);
    }
    REQUIRE(r1.folds.size() == r2.folds.size());
    for (std::size_t k = 0; k < r1.folds.size(); ++k)
        CHECK(r1.folds[k].selected_sets == r2.folds[k].selected_sets);
}
