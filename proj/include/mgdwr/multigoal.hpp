#pragma once

#include "mgdwr/goals.hpp"

#include <vector>

namespace mgdwr {

/// J_c = sum_i w_i J_i with w_i = omega_i sign(J_i(u_h2) - J_i(u_h)) / |J_i(u_h)|,
/// frozen at build time.
struct CombinedFunctional {
    std::vector<NamedFunctional> members;
    std::vector<double> omegas;
    std::vector<double> values_h;
    std::vector<double> values_h2;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const { return members.size(); }
    /// J_c as an expression (weights frozen).
    [[nodiscard]] Functional as_functional() const;
    /// J_c(u).
    [[nodiscard]] double eval(const DiscreteFunction& u) const;
    /// J_c'(u).
    [[nodiscard]] LinearForm linearize(const DiscreteFunction& u) const;
};

/// Empty `omegas` means all ones. Throws ZeroReferenceFunctional.
[[nodiscard]] CombinedFunctional build_combined(const std::vector<NamedFunctional>& functionals,
                                                const DiscreteFunction& u_h, const DiscreteFunction& u_h2,
                                                std::vector<double> omegas = {});
/// Same from precomputed member values.
[[nodiscard]] CombinedFunctional build_combined_from_values(const std::vector<NamedFunctional>& functionals,
                                                            std::vector<double> values_h,
                                                            std::vector<double> values_h2,
                                                            std::vector<double> omegas = {});

/// sum_i omega_i |J_i(u_h2) - J_i(u_h)| / |J_i(u_h)|.
[[nodiscard]] double combined_error_value(const CombinedFunctional& c);

/// Raw vector of J_c'(u_eval)(phi_j) over the basis of `space`. The adjoint
/// is solved for J_c; the opposite orientation only flips the estimator sign.
[[nodiscard]] Vector combined_derivative_rhs(const CombinedFunctional& c, const FeSpace& space,
                                             const DiscreteFunction& u_eval);

[[nodiscard]] double signum(double x);

}  // namespace mgdwr
