#pragma once

#include "mixshift/frame.hpp"

#include <Eigen/Dense>

#include <set>
#include <string>
#include <vector>

namespace mixshift {

// One multiplicative factor of a basis function: the variable itself, or a
// hinge max(0, x - knot) / max(0, knot - x).
enum class FactorKind { Linear, HingeUp, HingeDown };

struct BasisFactor {
    std::string variable;
    FactorKind kind = FactorKind::Linear;
    double knot = 0.0;
};

// A product of factors over named variables.  An empty factor list is the
// intercept.
struct BasisFunction {
    std::vector<BasisFactor> factors;

    bool is_intercept() const { return factors.empty(); }
    std::set<std::string> variable_set() const;
    std::string describe() const;
};

BasisFunction intercept_basis();
BasisFunction linear_basis(const std::string& variable);

Eigen::VectorXd evaluate_basis(const BasisFunction& basis, const Frame& frame);
Eigen::MatrixXd design_matrix(const std::vector<BasisFunction>& bases, const Frame& frame);

}  // namespace mixshift
