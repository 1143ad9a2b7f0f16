#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/frame.hpp"

#include <map>
#include <random>
#include <string>
#include <vector>

namespace testutil {

// Builds a dataset from named columns; names starting with W become
// covariates, A exposures, and the outcome column is "Y".
inline mixshift::Dataset make_dataset(std::map<std::string, std::vector<double>> cols) {
    std::map<std::string, mixshift::Role> roles;
    for (const auto& [name, col] : cols) {
        if (name == "Y") roles[name] = mixshift::Role::Outcome;
        else if (!name.empty() && name[0] == 'W') roles[name] = mixshift::Role::Covariate;
        else roles[name] = mixshift::Role::Exposure;
    }
    return mixshift::Dataset(std::move(cols), std::move(roles));
}

inline std::vector<double> normal_draws(std::size_t n, std::uint64_t seed, double mean = 0.0,
                                        double sd = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(mean, sd);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

inline std::vector<double> uniform_draws(std::size_t n, std::uint64_t seed, double lo = 0.0,
                                         double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    std::vector<double> out(n);
    for (auto& v : out) v = dist(rng);
    return out;
}

inline mixshift::Frame frame_of(std::vector<std::string> names,
                                std::vector<std::vector<double>> cols) {
    mixshift::Frame f;
    f.names = std::move(names);
    const std::size_t n = cols.empty() ? 0 : cols[0].size();
    f.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < n; ++i)
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = cols[j][i];
    return f;
}

}  // namespace testutil
