#pragma once

#include "mgdwr/assembly.hpp"
#include "mgdwr/multigoal.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace mgdwr {

struct LineSearchConfig {
    double gamma{0.9};
    int l_max{200};

    /// Acceptance factor c(L, L_max).
    [[nodiscard]] double acceptance(int l) const;
};

struct LineSearchResult {
    double alpha{1.0};
    int l{0};
    Vector residual;  // A(u + alpha du)
    double residual_norm{0.0};
};

struct NewtonIteration {
    int k{0};
    double residual_norm{0.0};  // after the update
    double alpha{1.0};
    bool rebuilt{false};
    double eta_m{-1.0};  // adaptive variant only
};

enum class NewtonTermination { Converged, Balanced, MaxIterations };

struct NewtonStats {
    int iterations{0};
    double initial_residual{0.0};
    std::vector<NewtonIteration> trace;
    NewtonTermination termination{NewtonTermination::Converged};
    int rebuilds{0};
};

struct AdaptiveNewtonStats : NewtonStats {
    std::vector<double> eta_m;  // one per adjoint solve, the last is final
    double threshold{0.0};
    [[nodiscard]] double final_eta_m() const { return eta_m.empty() ? 0.0 : eta_m.back(); }
};

/// Called once per Newton iteration, e.g. to stream a run log.
using IterationLog = std::function<void(const NewtonIteration&)>;

struct NewtonConfig {
    LineSearchConfig line_search{};
    int max_iterations{100};
    /// The Jacobian is reassembled when ||A(u^k)|| / ||A(u^{k-1})|| exceeds
    /// this; 0 rebuilds at every iteration.
    double rebuild_ratio{0.85};
    Execution exec{Execution::Parallel};
    IterationLog log{};
};

/// Smallest L with ||A(u + gamma^L du)|| < c(L) ||A(u)||, u updated in place.
/// Throws LineSearchExhausted.
[[nodiscard]] LineSearchResult line_search(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                           DiscreteFunction& u, const Vector& du, double residual_norm,
                                           const LineSearchConfig& cfg, Execution exec = Execution::Parallel);

struct NewtonResult {
    DiscreteFunction u;
    NewtonStats stats;
};

/// Damped Newton with matrix reuse. Throws MaxIterations,
/// LineSearchExhausted, SingularMatrix.
[[nodiscard]] NewtonResult newton_solve(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                        DiscreteFunction u0, const std::function<double(double)>& tolerance,
                                        const NewtonConfig& cfg = {});
/// Fixed absolute tolerance on the residual max-norm.
[[nodiscard]] NewtonResult newton_solve(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                        DiscreteFunction u0, double tol_abs, const NewtonConfig& cfg = {});

/// 1e-8 * norm on level 1, 1e-2 * norm afterwards.
[[nodiscard]] double nested_tolerance(int level, double initial_residual_norm);

enum class NewtonStop {
    Balanced,       // |A(u)(z)| <= 1e-2 eta_prev
    FixedResidual,  // ||A(u)||_inf <= fixed_tolerance
};

struct AdaptiveNewtonConfig {
    /// Fresh Jacobian every iteration; its factorization serves the Newton
    /// step and the adjoint solve at the same iterate.
    NewtonConfig newton{LineSearchConfig{0.85, 200}, 100, 0.0};
    NewtonStop stop{NewtonStop::Balanced};
    double balance{1e-2};
    double fixed_tolerance{1e-8};
};

struct AdaptiveNewtonResult {
    DiscreteFunction u;
    DiscreteFunction z;
    CombinedFunctional combined;  // weights of the final iterate
    AdaptiveNewtonStats stats;
};

/// Newton on the coarse space with an adjoint solve for the combined
/// functional after every update; weights follow the current iterate.
/// Throws IterationCap, LineSearchExhausted, SingularMatrix.
[[nodiscard]] AdaptiveNewtonResult adaptive_newton_multigoal(const ProblemDefinition& problem,
                                                             const AssemblyPlan& plan,
                                                             const std::vector<NamedFunctional>& functionals,
                                                             const std::vector<double>& omegas, DiscreteFunction u0,
                                                             double eta_prev, const DiscreteFunction& u_h2,
                                                             const AdaptiveNewtonConfig& cfg = {});

/// Solves A'(u)(v, z) = J'(v) for all v with the factorization of the
/// condensed Jacobian at u. `raw_rhs` holds J'(phi_j).
[[nodiscard]] DiscreteFunction solve_adjoint(const DirectSolver& jacobian, const AssemblyPlan& plan,
                                             const Vector& raw_rhs);

/// A(u)(z) for z satisfying the homogeneous constraints.
[[nodiscard]] double residual_pairing(const Vector& residual, const DiscreteFunction& z);

[[nodiscard]] std::string to_string(NewtonTermination t);

}  // namespace mgdwr
