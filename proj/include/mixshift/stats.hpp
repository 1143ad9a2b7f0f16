#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace mixshift {

inline double expit(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double logit(double p) { return std::log(p / (1.0 - p)); }

// Keeps probabilities away from 0/1 so the logit stays finite.
inline double clip_prob(double p, double eps = 1e-6) {
    if (p < eps) return eps;
    if (p > 1.0 - eps) return 1.0 - eps;
    return p;
}

inline double normal_pdf(double z) {
    static const double inv_sqrt_2pi = 0.3989422804014327;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double two_sided_p(double z) { return std::erfc(std::fabs(z) / std::sqrt(2.0)); }

double mean(const Eigen::VectorXd& v);
double sample_variance(const Eigen::VectorXd& v);
double sample_sd(const Eigen::VectorXd& v);

// Type-7 empirical quantile (linear interpolation between order statistics),
// the convention used for knot grids, F thresholds, and quantile binning.
double quantile_type7(std::vector<double> values, double p);

// SplitMix64 step; used to derive independent RNG streams from a master seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix_seed(mix_seed(seed, a), b);
}

// Runs fn(i) for i in [0, count) on up to n_threads workers.  Items must be
// independent; results land in caller-owned slots so scheduling never changes
// the output.  n_threads <= 1 runs inline.
void parallel_for(std::size_t count, int n_threads, const std::function<void(std::size_t)>& fn);

}  // namespace mixshift
