#pragma once

#include "mixshift/dataset.hpp"
#include "mixshift/errors.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace mixshift {

// A named numeric matrix: the design-side view handed to learners and
// density fits.  Column order is whatever the caller passed; lookups are by
// name so column order never changes a fit.
struct Frame {
    std::vector<std::string> names;
    Eigen::MatrixXd values;  // n x names.size()

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }

    bool has(const std::string& name) const;
    Eigen::Index col_index(const std::string& name) const;
    Eigen::VectorXd col(const std::string& name) const { return values.col(col_index(name)); }

    Frame with_column(const std::string& name, const Eigen::VectorXd& v) const;
};

Frame make_frame(const Dataset& d, const std::vector<std::string>& columns);

Eigen::VectorXd to_vector(const std::vector<double>& v);
std::vector<double> to_std(const Eigen::VectorXd& v);

}  // namespace mixshift
