#include "mixshift/frame.hpp"

#include <algorithm>

namespace mixshift {

bool Frame::has(const std::string& name) const {
    return std::find(names.begin(), names.end(), name) != names.end();
}

Eigen::Index Frame::col_index(const std::string& name) const {
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) throw ConfigError("frame has no column '" + name + "'");
    return static_cast<Eigen::Index>(it - names.begin());
}

Frame Frame::with_column(const std::string& name, const Eigen::VectorXd& v) const {
    if (v.size() != rows() && rows() != 0)
        throw NumericError("column length mismatch when extending frame");
    Frame out;
    out.names = names;
    out.values.resize(v.size(), cols() + 1);
    if (cols() > 0) out.values.leftCols(cols()) = values;
    out.values.col(cols()) = v;
    out.names.push_back(name);
    return out;
}

Frame make_frame(const Dataset& d, const std::vector<std::string>& columns) {
    Frame f;
    f.names = columns;
    f.values.resize(static_cast<Eigen::Index>(d.n()), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        const auto& col = d.column(columns[j]);
        for (std::size_t i = 0; i < col.size(); ++i)
            f.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    return f;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> to_std(const Eigen::VectorXd& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace mixshift
