#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mixshift/discovery.hpp"
#include "mixshift/sim.hpp"
#include "mixshift/stats.hpp"
#include "test_util.hpp"

#include <cmath>
#include <random>

using namespace mixshift;

namespace {

BasisFunction hinge(const std::string& var, double knot, bool up = true) {
    BasisFunction b;
    b.factors.push_back({var, up ? FactorKind::HingeUp : FactorKind::HingeDown, knot});
    return b;
}

BasisFunction product(const BasisFunction& a, const BasisFunction& b) {
    BasisFunction out = a;
    for (const auto& f : b.factors) out.factors.push_back(f);
    return out;
}

std::map<std::string, Role> dgp_roles() {
    return {{"A1", Role::Exposure},  {"A3", Role::Exposure},  {"A4", Role::Exposure},
            {"W1", Role::Covariate}, {"W3", Role::Covariate}};
}

// Independent oracle: literally refit every reduced model with a plain
// normal-equation solve and recompute the F ratio.
std::vector<double> brute_force_f(const Eigen::MatrixXd& design, const Eigen::VectorXd& y) {
    const Eigen::Index n = design.rows();
    const Eigen::Index p = design.cols();
    auto sse = [&](const Eigen::MatrixXd& x) {
        const Eigen::VectorXd beta = (x.transpose() * x).fullPivLu().solve(x.transpose() * y);
        return (y - x * beta).squaredNorm();
    };
    const double sse_full = sse(design);
    const double s2 = sse_full / static_cast<double>(n - p);
    std::vector<double> out;
    for (Eigen::Index j = 1; j < p; ++j) {
        Eigen::MatrixXd reduced(n, p - 1);
        Eigen::Index c = 0;
        for (Eigen::Index k = 0; k < p; ++k)
            if (k != j) reduced.col(c++) = design.col(k);
        out.push_back((sse(reduced) - sse_full) / s2);
    }
    return out;
}

}  // namespace

TEST_CASE("extract_bases drops the intercept and zero coefficients") {
    RegressionFit fit;
    fit.bases = {intercept_basis(), hinge("A1", 1.0), hinge("A4", 2.0)};
    fit.coefficients.resize(3);
    fit.coefficients << 1.0, 0.5, 0.0;
    const auto bases = extract_bases(fit);
    REQUIRE(bases.size() == 1);
    CHECK(bases[0].variable_set() == std::set<std::string>{"A1"});

    RegressionFit intercept_only;
    intercept_only.bases = {intercept_basis()};
    intercept_only.coefficients = Eigen::VectorXd::Constant(1, 3.0);
    CHECK(extract_bases(intercept_only).empty());
}

TEST_CASE("exposure attribution keeps exposure names only") {
    const auto roles = dgp_roles();
    CHECK(exposure_set_of(hinge("A1", 0.0), roles) == std::set<std::string>{"A1"});
    CHECK(exposure_set_of(product(hinge("A4", 1.0), hinge("A1", 2.0)), roles) ==
          std::set<std::string>{"A1", "A4"});
    // Effect modification: exposure x covariate attributes to the exposure.
    CHECK(exposure_set_of(product(hinge("A3", 1.0), hinge("W3", 0.5)), roles) ==
          std::set<std::string>{"A3"});
    CHECK(exposure_set_of(product(hinge("W1", 1.0), hinge("W3", 0.5)), roles).empty());
}

TEST_CASE("type3_f separates signal from noise columns") {
    std::mt19937_64 seed_rng(100);
    int null_not_significant = 0;
    const int trials = 50;
    for (int trial = 0; trial < trials; ++trial) {
        const std::size_t n = 1000;
        const auto x1 = testutil::normal_draws(n, seed_rng());
        const auto x2 = testutil::normal_draws(n, seed_rng());
        const auto noise = testutil::normal_draws(n, seed_rng());
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) y[i] = 5.0 * x1[i] + noise[i];
        const Frame f = testutil::frame_of({"x1", "x2"}, {x1, x2});
        const std::vector<BasisFunction> bases = {linear_basis("x1"), linear_basis("x2")};
        const Type3Result r = type3_f(bases, f, testutil::frame_of({"y"}, {y}).values.col(0));
        REQUIRE(r.f.size() == 2);
        CHECK(r.f.at(0) > 100.0 * r.f.at(1));
        // F(1, n-3) null: the chi-square(1) tail is accurate at this n.
        const double p2 = std::erfc(std::sqrt(r.f.at(1) / 2.0));
        if (p2 > 0.05) ++null_not_significant;
    }
    CHECK(null_not_significant >= 45);
}

TEST_CASE("perfect fit reports the +inf sentinel") {
    const auto x1 = testutil::normal_draws(50, 7);
    const Frame f = testutil::frame_of({"x1"}, {x1});
    const Eigen::VectorXd y = f.values.col(0);
    const Type3Result r = type3_f({linear_basis("x1")}, f, y);
    REQUIRE(r.f.size() == 1);
    CHECK(std::isinf(r.f.at(0)));
}

TEST_CASE("type3_f matches the brute-force drop-one oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 40 + rng() % 160;
        const std::size_t p = 2 + rng() % 7;
        std::normal_distribution<double> dist;
        Frame f;
        std::vector<BasisFunction> bases;
        f.names = {"x"};
        f.values.resize(static_cast<Eigen::Index>(n), 1);
        for (Eigen::Index i = 0; i < f.values.rows(); ++i) f.values(i, 0) = dist(rng);
        // Bases over one variable with distinct knots keep the design full rank.
        for (std::size_t j = 0; j < p; ++j)
            bases.push_back(hinge("x", -1.5 + 3.0 * static_cast<double>(j) / static_cast<double>(p),
                                  j % 2 == 0));
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = dist(rng) + 0.7 * f.values(i, 0);

        const Type3Result r = type3_f(bases, f, y);
        REQUIRE(r.dropped.empty());
        Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p) + 1);
        design.col(0).setOnes();
        for (std::size_t j = 0; j < p; ++j)
            design.col(static_cast<Eigen::Index>(j) + 1) = evaluate_basis(bases[j], f);
        const std::vector<double> oracle = brute_force_f(design, y);
        for (std::size_t j = 0; j < p; ++j) {
            const double denom = std::max(1.0, std::fabs(oracle[j]));
            CHECK(std::fabs(r.f.at(j) - oracle[j]) / denom < 1e-8);
        }
    }
}

TEST_CASE("exactly collinear later bases are dropped with a note") {
    const auto x = testutil::normal_draws(100, 55);
    const Frame f = testutil::frame_of({"x"}, {x});
    std::vector<BasisFunction> bases = {linear_basis("x"), hinge("x", 0.0), linear_basis("x")};
    Eigen::VectorXd y(100);
    for (Eigen::Index i = 0; i < 100; ++i) y[i] = 2.0 * x[static_cast<std::size_t>(i)] + (i % 3);
    const Type3Result r = type3_f(bases, f, y);
    CHECK(r.dropped == std::vector<std::size_t>{2});
    CHECK(r.f.count(0) == 1);
    CHECK(r.f.count(1) == 1);
    CHECK(r.f.count(2) == 0);
}

TEST_CASE("F statistics are invariant to affine outcome rescaling") {
    const std::size_t n = 300;
    const auto x1 = testutil::normal_draws(n, 61);
    const auto x2 = testutil::normal_draws(n, 62);
    const auto noise = testutil::normal_draws(n, 63);
    std::vector<double> y(n), y2(n);
    for (std::size_t i = 0; i < n; ++i) {
        y[i] = 1.2 * x1[i] - 0.4 * x2[i] + noise[i];
        y2[i] = 3.7 * y[i] - 11.0;
    }
    const Frame f = testutil::frame_of({"x1", "x2"}, {x1, x2});
    const std::vector<BasisFunction> bases = {linear_basis("x1"), hinge("x2", 0.0),
                                              hinge("x2", 0.0, false)};
    const Type3Result r1 = type3_f(bases, f, testutil::frame_of({"y"}, {y}).values.col(0));
    const Type3Result r2 = type3_f(bases, f, testutil::frame_of({"y"}, {y2}).values.col(0));
    for (const auto& [idx, fval] : r1.f)
        CHECK(std::fabs(fval - r2.f.at(idx)) < 1e-8 * std::max(1.0, fval));
}

TEST_CASE("aggregate_and_threshold groups, sums, and thresholds") {
    const auto roles = dgp_roles();
    std::vector<BasisFunction> bases = {
        hinge("A1", 1.0),                             // {A1}
        hinge("A1", 2.0, false),                      // {A1}
        product(hinge("A1", 1.0), hinge("A4", 2.0)),  // {A1,A4}
        product(hinge("A3", 1.0), hinge("W3", 0.5)),  // {A3}
        product(hinge("W1", 1.0), hinge("W3", 0.5)),  // covariates only
    };
    Type3Result fmap;
    fmap.f = {{0, 6.0}, {1, 4.0}, {2, 5.0}, {3, 1.0}, {4, 100.0}};

    SUBCASE("quantile zero keeps every exposure set") {
        const auto scores = aggregate_and_threshold(fmap, bases, roles, 0.0);
        REQUIRE(scores.size() == 3);
        CHECK(scores[0].exposure_set == std::vector<std::string>{"A1"});
        CHECK(scores[0].f_sum == doctest::Approx(10.0));
        CHECK(scores[0].n_bases == 2);
        CHECK(scores[1].exposure_set == std::vector<std::string>{"A1", "A4"});
        CHECK(scores[2].exposure_set == std::vector<std::string>{"A3"});
    }

    SUBCASE("a high quantile keeps only the top set") {
        // Sums are (10, 5, 1): the 0.75 type-7 quantile is 7.5.
        const auto scores = aggregate_and_threshold(fmap, bases, roles, 0.75);
        REQUIRE(scores.size() == 1);
        CHECK(scores[0].exposure_set == std::vector<std::string>{"A1"});
    }

    SUBCASE("single set survives any feasible quantile") {
        Type3Result single;
        single.f = {{0, 3.0}};
        const std::vector<BasisFunction> one = {hinge("A1", 1.0)};
        for (double q : {0.0, 0.5, 1.0})
            CHECK(aggregate_and_threshold(single, one, roles, q).size() == 1);
    }
}

TEST_CASE("spec example: f_sums (10,5,1,0.5) at quantile 0.75 keep only the top set") {
    const auto roles = dgp_roles();
    std::vector<BasisFunction> bases = {hinge("A1", 1.0), hinge("A3", 1.0), hinge("A4", 1.0),
                                        product(hinge("A1", 1.0), hinge("A4", 2.0))};
    Type3Result fmap;
    fmap.f = {{0, 10.0}, {1, 5.0}, {2, 1.0}, {3, 0.5}};
    const auto scores = aggregate_and_threshold(fmap, bases, roles, 0.75);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0].f_sum == doctest::Approx(10.0));
}

TEST_CASE("quantile zero selection is a superset of any higher quantile") {
    std::mt19937_64 rng(99);
    const auto roles = dgp_roles();
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<BasisFunction> bases;
        Type3Result fmap;
        const std::vector<std::string> exposures = {"A1", "A3", "A4"};
        const std::size_t nb = 3 + rng() % 6;
        for (std::size_t j = 0; j < nb; ++j) {
            BasisFunction b = hinge(exposures[rng() % 3], static_cast<double>(rng() % 5));
            if (rng() % 2) {
                BasisFunction other = hinge(exposures[rng() % 3], 1.0);
                if (other.factors[0].variable != b.factors[0].variable) b = product(b, other);
            }
            bases.push_back(b);
            fmap.f[j] = static_cast<double>(rng() % 1000) / 100.0;
        }
        const auto all = aggregate_and_threshold(fmap, bases, roles, 0.0);
        for (double q : {0.3, 0.6, 0.9}) {
            const auto some = aggregate_and_threshold(fmap, bases, roles, q);
            CHECK(some.size() <= all.size());
            for (const auto& s : some) {
                bool present = false;
                for (const auto& a : all)
                    if (a.exposure_set == s.exposure_set) present = true;
                CHECK(present);
            }
        }
        int total_bases = 0;
        for (const auto& a : all) total_bases += a.n_bases;
        CHECK(total_bases <= static_cast<int>(nb));
    }
}

TEST_CASE("benchmark-process discovery finds the built-in structure" * doctest::timeout(600)) {
    // Training-side discovery at desk scale: the known signal sets should be
    // selected in nearly all folds.
    int folds_checked = 0, a4_hits = 0, pair_hits = 0, a3_hits = 0;
    for (std::uint64_t seed : {11ULL, 12ULL}) {
        const DgpSample sample = gen_dgp(2000, seed);
        const auto [scaled, rec] = scale_outcome(sample.data);
        const FoldAssignment folds = make_folds(scaled.n(), 5, seed);
        std::vector<std::string> predictors = scaled.exposures();
        for (const auto& w : scaled.covariates()) predictors.push_back(w);
        for (int k = 1; k <= 5; ++k) {
            const Dataset train = scaled.subset(folds.training_rows(k));
            const Frame x = make_frame(train, predictors);
            const Eigen::VectorXd y = to_vector(train.outcome());
            const CvSelection sel = cv_select(discovery_grid(), x, y, seed + k);
            const auto bases = extract_bases(sel.fit);
            const Type3Result t3 = type3_f(bases, x, y);
            const auto scores = aggregate_and_threshold(t3, bases, train.roles(), 0.0);
            ++folds_checked;
            for (const auto& s : scores) {
                if (s.exposure_set == std::vector<std::string>{"A4"}) ++a4_hits;
                if (s.exposure_set == std::vector<std::string>{"A1", "A4"}) ++pair_hits;
                if (s.exposure_set == std::vector<std::string>{"A3"}) ++a3_hits;
            }
        }
    }
    CHECK(folds_checked == 10);
    CHECK(a4_hits >= 9);
    CHECK(pair_hits >= 9);
    CHECK(a3_hits >= 9);
}
