#include "mixshift/dataset.hpp"

#include "mixshift/stats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace mixshift {

std::string role_name(Role r) {
    switch (r) {
        case Role::Covariate: return "covariate";
        case Role::Exposure: return "exposure";
        case Role::Outcome: return "outcome";
    }
    return "?";
}

Dataset::Dataset(std::map<std::string, std::vector<double>> columns, std::map<std::string, Role> roles)
    : columns_(std::move(columns)), roles_(std::move(roles)) {
    if (columns_.empty()) throw DataError("dataset has no columns");
    n_ = columns_.begin()->second.size();
    if (n_ < 1) throw DataError("dataset has no rows");
    for (const auto& [name, col] : columns_) {
        if (col.size() != n_)
            throw DataError("column '" + name + "' has length " + std::to_string(col.size()) +
                            ", expected " + std::to_string(n_));
        for (double v : col)
            if (!std::isfinite(v)) throw DataError("column '" + name + "' contains a non-finite value");
    }
    int n_outcomes = 0;
    for (const auto& [name, role] : roles_) {
        if (!columns_.count(name)) throw ConfigError("role declared for missing column '" + name + "'");
        if (role == Role::Outcome) {
            ++n_outcomes;
            outcome_ = name;
        }
    }
    if (n_outcomes != 1)
        throw ConfigError("exactly one outcome column required, got " + std::to_string(n_outcomes));
}

const std::vector<double>& Dataset::column(const std::string& name) const {
    auto it = columns_.find(name);
    if (it == columns_.end()) throw ConfigError("unknown column '" + name + "'");
    return it->second;
}

Role Dataset::role(const std::string& name) const {
    auto it = roles_.find(name);
    if (it == roles_.end()) throw ConfigError("no role for column '" + name + "'");
    return it->second;
}

std::vector<std::string> Dataset::exposures() const {
    std::vector<std::string> out;
    for (const auto& [name, role] : roles_)
        if (role == Role::Exposure) out.push_back(name);
    return out;  // map iteration is already name-sorted
}

std::vector<std::string> Dataset::covariates() const {
    std::vector<std::string> out;
    for (const auto& [name, role] : roles_)
        if (role == Role::Covariate) out.push_back(name);
    return out;
}

bool Dataset::outcome_is_binary() const {
    for (double v : outcome())
        if (v != 0.0 && v != 1.0) return false;
    return true;
}

Dataset Dataset::subset(const std::vector<std::size_t>& idx) const {
    std::map<std::string, std::vector<double>> cols;
    for (const auto& [name, col] : columns_) {
        std::vector<double> sub;
        sub.reserve(idx.size());
        for (std::size_t i : idx) {
            if (i >= n_) throw NumericError("subset index out of range");
            sub.push_back(col[i]);
        }
        cols.emplace(name, std::move(sub));
    }
    return Dataset(std::move(cols), roles_);
}

Dataset Dataset::with_column(const std::string& name, std::vector<double> values) const {
    auto cols = columns_;
    cols[name] = std::move(values);
    return Dataset(std::move(cols), roles_);
}

std::vector<std::size_t> FoldAssignment::validation_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < membership.size(); ++i)
        if (membership[i] == fold) out.push_back(i);
    return out;
}

std::vector<std::size_t> FoldAssignment::training_rows(int fold) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < membership.size(); ++i)
        if (membership[i] != fold) out.push_back(i);
    return out;
}

FoldAssignment make_folds(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2) throw ConfigError("fold count must be at least 2, got " + std::to_string(k));
    if (static_cast<std::size_t>(k) > n)
        throw ConfigError("fold count " + std::to_string(k) + " exceeds sample size " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(mix_seed(seed, 0x666f6c64ULL));
    std::shuffle(order.begin(), order.end(), rng);
    FoldAssignment fa;
    fa.k = k;
    fa.membership.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) fa.membership[order[i]] = static_cast<int>(i % k) + 1;
    return fa;
}

std::pair<Dataset, ScalingRecord> scale_outcome(const Dataset& d, OutcomeKind kind) {
    const bool binary = kind == OutcomeKind::Binary ||
                        (kind == OutcomeKind::Auto && d.outcome_is_binary());
    if (kind == OutcomeKind::Binary && !d.outcome_is_binary())
        throw DataError("outcome declared binary but takes values outside {0,1}");
    if (binary) return {d, ScalingRecord{0.0, 1.0}};

    const auto& y = d.outcome();
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    if (*mx <= *mn) throw DataError("outcome '" + d.outcome_name() + "' is constant; nothing to estimate");
    ScalingRecord rec{*mn, *mx};
    std::vector<double> scaled(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) scaled[i] = rec.to_unit(y[i]);
    return {d.with_column(d.outcome_name(), std::move(scaled)), rec};
}

double ShiftSpec::delta_for(const std::string& name) const {
    auto it = delta.find(name);
    if (it == delta.end()) throw ConfigError("no delta for exposure '" + name + "'");
    return it->second;
}

ShiftSpec make_shift(const std::string& target, double delta) {
    ShiftSpec s;
    s.targets = {target};
    s.delta[target] = delta;
    return s;
}

ShiftSpec make_shift(const std::string& t1, double d1, const std::string& t2, double d2) {
    ShiftSpec s;
    s.targets = {t1, t2};
    std::sort(s.targets.begin(), s.targets.end());
    s.delta[t1] = d1;
    s.delta[t2] = d2;
    return s;
}

void validate_shift_spec(const ShiftSpec& spec, const Dataset& d) {
    if (spec.targets.empty() || spec.targets.size() > 2)
        throw ConfigError("shift must target one or two exposures");
    if (spec.targets.size() == 2 && spec.targets[0] == spec.targets[1])
        throw ConfigError("shift targets must be distinct");
    for (const auto& t : spec.targets) {
        if (!d.has_column(t) || d.role(t) != Role::Exposure)
            throw ConfigError("shift target '" + t + "' is not an exposure column");
        const double delta = spec.delta_for(t);
        if (!std::isfinite(delta) || delta == 0.0)
            throw ConfigError("delta for '" + t + "' must be finite and nonzero");
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::map<std::string, Role>& roles) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open data file '" + path + "'");

    std::string line;
    if (!std::getline(in, line)) throw DataError("file '" + path + "' is empty");
    const std::vector<std::string> header_raw = split_csv_line(line);
    std::vector<std::string> header;
    header.reserve(header_raw.size());
    for (const auto& h : header_raw) header.push_back(trim(h));

    for (const auto& [name, role] : roles) {
        if (std::find(header.begin(), header.end(), name) == header.end())
            throw ConfigError("declared " + role_name(role) + " column '" + name +
                              "' not found in '" + path + "'");
    }

    std::map<std::string, std::vector<double>> cols;
    std::vector<int> keep(header.size(), -1);
    {
        int j = 0;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (roles.count(header[c])) {
                cols.emplace(header[c], std::vector<double>{});
                keep[c] = j++;
            }
        }
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        const std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != header.size())
            throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(header.size()));
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (keep[c] < 0) continue;
            const std::string cell = trim(fields[c]);
            if (cell.empty() || cell == "NA" || cell == "nan" || cell == "NaN")
                throw DataError("missing value at row " + std::to_string(row) + ", column '" +
                                header[c] + "'");
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v))
                throw DataError("non-numeric value '" + cell + "' at row " + std::to_string(row) +
                                ", column '" + header[c] + "'");
            cols[header[c]].push_back(v);
        }
    }
    if (row == 0) throw DataError("file '" + path + "' has a header but no data rows");
    return Dataset(std::move(cols), roles);
}

}  // namespace mixshift
