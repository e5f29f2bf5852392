#include "mgdwr/multigoal.hpp"

#include "mgdwr/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace mgdwr {

double signum(double x)
{
    return static_cast<double>((x > 0.0) - (x < 0.0));
}

CombinedFunctional build_combined_from_values(const std::vector<NamedFunctional>& functionals,
                                              std::vector<double> values_h, std::vector<double> values_h2,
                                              std::vector<double> omegas)
{
    const std::size_t n = functionals.size();
    if (omegas.empty()) omegas.assign(n, 1.0);
    if (values_h.size() != n || values_h2.size() != n || omegas.size() != n)
        throw std::invalid_argument("combined functional: size mismatch");
    CombinedFunctional c;
    c.members = functionals;
    c.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(omegas[i] > 0.0)) throw std::invalid_argument("combined functional: omegas must be positive");
        if (values_h[i] == 0.0 || !std::isfinite(values_h[i])) throw ZeroReferenceFunctional(i);
        c.weights[i] = omegas[i] * signum(values_h2[i] - values_h[i]) / std::abs(values_h[i]);
    }
    c.omegas = std::move(omegas);
    c.values_h = std::move(values_h);
    c.values_h2 = std::move(values_h2);
    return c;
}

CombinedFunctional build_combined(const std::vector<NamedFunctional>& functionals, const DiscreteFunction& u_h,
                                  const DiscreteFunction& u_h2, std::vector<double> omegas)
{
    std::vector<double> vh;
    std::vector<double> vh2;
    for (const auto& f : functionals) {
        vh.push_back(f.functional->eval(u_h));
        vh2.push_back(f.functional->eval(u_h2));
    }
    return build_combined_from_values(functionals, std::move(vh), std::move(vh2), std::move(omegas));
}

Functional CombinedFunctional::as_functional() const
{
    Functional total;
    for (std::size_t i = 0; i < members.size(); ++i) {
        Functional term = scale(weights[i], members[i].functional);
        total = total ? sum(total, term) : term;
    }
    return total;
}

double CombinedFunctional::eval(const DiscreteFunction& u) const
{
    double s = 0.0;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (weights[i] != 0.0) s += weights[i] * members[i].functional->eval(u);
    return s;
}

LinearForm CombinedFunctional::linearize(const DiscreteFunction& u) const
{
    LinearForm f;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (weights[i] != 0.0) members[i].functional->linearize(u, weights[i], f);
    return f;
}

double combined_error_value(const CombinedFunctional& c)
{
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i)
        s += c.omegas[i] * std::abs(c.values_h2[i] - c.values_h[i]) / std::abs(c.values_h[i]);
    return s;
}

Vector combined_derivative_rhs(const CombinedFunctional& c, const FeSpace& space, const DiscreteFunction& u_eval)
{
    return c.linearize(u_eval).assemble(space);
}

}  // namespace mgdwr
