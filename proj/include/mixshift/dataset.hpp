#pragma once

#include "mixshift/errors.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace mixshift {

enum class Role { Covariate, Exposure, Outcome };

std::string role_name(Role r);

// Column-typed observations.  Columns live in a name-ordered map, so the
// physical order of a CSV never reaches any downstream computation.
// Immutable after construction; safe to share across threads.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::map<std::string, std::vector<double>> columns, std::map<std::string, Role> roles);

    std::size_t n() const { return n_; }
    const std::vector<double>& column(const std::string& name) const;
    bool has_column(const std::string& name) const { return columns_.count(name) > 0; }
    const std::map<std::string, std::vector<double>>& columns() const { return columns_; }
    const std::map<std::string, Role>& roles() const { return roles_; }
    Role role(const std::string& name) const;

    const std::string& outcome_name() const { return outcome_; }
    const std::vector<double>& outcome() const { return column(outcome_); }
    // Sorted by name.
    std::vector<std::string> exposures() const;
    std::vector<std::string> covariates() const;

    bool outcome_is_binary() const;

    Dataset subset(const std::vector<std::size_t>& idx) const;
    Dataset with_column(const std::string& name, std::vector<double> values) const;

private:
    std::map<std::string, std::vector<double>> columns_;
    std::map<std::string, Role> roles_;
    std::string outcome_;
    std::size_t n_ = 0;
};

// K-fold membership labels in 1..K.  Deterministic in (n, K, seed); fold
// sizes differ by at most one.
struct FoldAssignment {
    int k = 0;
    std::vector<int> membership;

    std::vector<std::size_t> validation_rows(int fold) const;
    std::vector<std::size_t> training_rows(int fold) const;
};

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed);

// Affine map taking the outcome into [0,1] so the logistic fluctuation is
// well defined.  Binary outcomes use the identity record (0,1).
struct ScalingRecord {
    double y_min = 0.0;
    double y_max = 1.0;

    double range() const { return y_max - y_min; }
    double to_unit(double y) const { return (y - y_min) / range(); }
    double from_unit(double u) const { return y_min + u * range(); }
};

enum class OutcomeKind { Auto, Binary, Continuous };

std::pair<Dataset, ScalingRecord> scale_outcome(const Dataset& d, OutcomeKind kind = OutcomeKind::Auto);

// An additive shift of one or two exposures.  delta > 0 raises the exposure:
// the intervened value is a + delta, and the shifted density is g(a - delta | w).
struct ShiftSpec {
    std::vector<std::string> targets;         // size 1 or 2, kept sorted
    std::map<std::string, double> delta;

    double delta_for(const std::string& name) const;
};

ShiftSpec make_shift(const std::string& target, double delta);
ShiftSpec make_shift(const std::string& t1, double d1, const std::string& t2, double d2);

// Enforces the configuration-level contract: distinct exposure-role targets,
// finite nonzero deltas.  Zero deltas are legal at the estimator level (the
// null shift) but rejected as analysis configuration.
void validate_shift_spec(const ShiftSpec& spec, const Dataset& d);

Dataset load_csv(const std::string& path, const std::map<std::string, Role>& roles);

}  // namespace mixshift
