#pragma once

#include "mgdwr/assembly.hpp"
#include "mgdwr/goals.hpp"
#include "mgdwr/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace mgdwr {

/// Signed parts are stored unhalved: eta_signed = (primal + adjoint) / 2.
struct EstimatorBreakdown {
    double eta_signed{0.0};
    double eta_h{0.0};
    double eta_primal_signed{0.0};   // rho(u_h)(z_h2 - i_h z_h2)
    double eta_adjoint_signed{0.0};  // rho*(u_h, z_h)(u_h2 - u_h)
    Vector nodal;                    // eta_i per PU node
    Vector nodal_primal;             // unhalved primal part per PU node
    Vector nodal_adjoint;            // unhalved adjoint part per PU node
    Vector cellwise;                 // eta_K per active cell index
};

struct ReferenceValue {
    double value{0.0};
    double uncertainty{0.0};
    std::string source;
};

/// Per-functional reference values; a missing entry has no known value.
using ReferenceValues = std::vector<std::optional<ReferenceValue>>;

struct Effectivity {
    double true_error{0.0};  // sum_i omega_i |J_i(u) - J_i(u_h)| / |J_i(u_h)|
    double i_eff{0.0};
    double i_effp{0.0};
    double i_effa{0.0};
};

/// z_h2 with A'(u_h2)(v, z_h2) = J'(v) on the enriched space; `raw_rhs`
/// holds J'(u_h2)(phi_j). Throws SingularMatrix.
[[nodiscard]] DiscreteFunction solve_enriched_adjoint(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                                      const DiscreteFunction& u_h2, const Vector& raw_rhs,
                                                      Execution exec = Execution::Parallel);

/// Coarse nodal interpolant of `f` respecting the homogeneous coarse
/// constraints, represented in the space of `f`.
[[nodiscard]] DiscreteFunction coarse_interpolant(const DiscreteFunction& f, const AssemblyPlan& coarse);

/// PU-localized estimator. `j_prime` is J'(u_h) of the goal the adjoints
/// were solved for; `pu` is the scalar Q1 space on the same mesh.
[[nodiscard]] EstimatorBreakdown estimate(const ProblemDefinition& problem, const LinearForm& j_prime,
                                          const AssemblyPlan& coarse, const DiscreteFunction& u_h,
                                          const DiscreteFunction& z_h, const DiscreteFunction& u_h2,
                                          const DiscreteFunction& z_h2, const FeSpace& pu,
                                          Execution exec = Execution::Parallel);

/// |eta_i| split equally among the active cells at the node's vertex.
[[nodiscard]] Vector distribute_to_cells(const Vector& nodal, const FeSpace& pu);

/// Throws ZeroTrueError when the true error vanishes.
[[nodiscard]] Effectivity effectivity(const std::vector<double>& exact, const std::vector<double>& values_h,
                                      const std::vector<double>& omegas, const EstimatorBreakdown& b);

}  // namespace mgdwr
