#include "mixshift/basis.hpp"

#include <sstream>

namespace mixshift {

std::set<std::string> BasisFunction::variable_set() const {
    std::set<std::string> out;
    for (const auto& f : factors) out.insert(f.variable);
    return out;
}

std::string BasisFunction::describe() const {
    if (is_intercept()) return "1";
    std::ostringstream os;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) os << "*";
        const auto& f = factors[i];
        switch (f.kind) {
            case FactorKind::Linear: os << f.variable; break;
            case FactorKind::HingeUp: os << "h(" << f.variable << "-" << f.knot << ")"; break;
            case FactorKind::HingeDown: os << "h(" << f.knot << "-" << f.variable << ")"; break;
        }
    }
    return os.str();
}

BasisFunction intercept_basis() { return BasisFunction{}; }

BasisFunction linear_basis(const std::string& variable) {
    BasisFunction b;
    b.factors.push_back({variable, FactorKind::Linear, 0.0});
    return b;
}

Eigen::VectorXd evaluate_basis(const BasisFunction& basis, const Frame& frame) {
    Eigen::VectorXd out = Eigen::VectorXd::Ones(frame.rows());
    for (const auto& f : basis.factors) {
        const Eigen::VectorXd x = frame.col(f.variable);
        switch (f.kind) {
            case FactorKind::Linear:
                out.array() *= x.array();
                break;
            case FactorKind::HingeUp:
                out.array() *= (x.array() - f.knot).max(0.0);
                break;
            case FactorKind::HingeDown:
                out.array() *= (f.knot - x.array()).max(0.0);
                break;
        }
    }
    return out;
}

Eigen::MatrixXd design_matrix(const std::vector<BasisFunction>& bases, const Frame& frame) {
    Eigen::MatrixXd x(frame.rows(), static_cast<Eigen::Index>(bases.size()));
    for (std::size_t j = 0; j < bases.size(); ++j)
        x.col(static_cast<Eigen::Index>(j)) = evaluate_basis(bases[j], frame);
    return x;
}

}  // namespace mixshift
