#include "mgdwr/solver.hpp"

#include "mgdwr/errors.hpp"

#include <cmath>
#include <optional>
#include <sstream>

namespace mgdwr {

double LineSearchConfig::acceptance(int l) const
{
    if (l == 0) return 0.8;
    if (l == 1) return 0.888;
    return 0.888 + 0.112 * std::sqrt(static_cast<double>(l + 1) / l_max);
}

LineSearchResult line_search(const ProblemDefinition& problem, const AssemblyPlan& plan, DiscreteFunction& u,
                             const Vector& du, double residual_norm, const LineSearchConfig& cfg, Execution exec)
{
    const std::vector<double> base = u.coefficients();
    double alpha = 1.0;
    for (int l = 0; l < cfg.l_max; ++l, alpha *= cfg.gamma) {
        auto& c = u.coefficients();
        for (std::size_t i = 0; i < c.size(); ++i) c[i] = base[i] + alpha * du[i];
        Vector r = assemble_residual(problem, plan, u, exec);
        const double norm = max_norm(r);
        if (std::isfinite(norm) && norm < cfg.acceptance(l) * residual_norm) return {alpha, l, std::move(r), norm};
    }
    u.coefficients() = base;
    throw LineSearchExhausted("line search found no acceptable damping after " + std::to_string(cfg.l_max) +
                              " trials");
}

namespace {

Vector newton_direction(const DirectSolver& solver, const AssemblyPlan& plan, const Vector& residual)
{
    Vector rhs(residual.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = -residual[i];
    Vector du = solver.solve(rhs);
    plan.constraints().distribute_homogeneous(du);
    return du;
}

/// One damped step. A stale factorization whose direction fails the line
/// search is replaced by a fresh one before giving up.
LineSearchResult damped_step(const ProblemDefinition& problem, const AssemblyPlan& plan, DiscreteFunction& u,
                             const Vector& residual, double norm, std::optional<DirectSolver>& solver, bool& rebuilt,
                             int& rebuilds, const NewtonConfig& cfg)
{
    try {
        return line_search(problem, plan, u, newton_direction(*solver, plan, residual), norm, cfg.line_search,
                           cfg.exec);
    } catch (const LineSearchExhausted&) {
        if (rebuilt) throw;
    }
    solver.emplace(assemble_jacobian(problem, plan, u, cfg.exec));
    rebuilt = true;
    ++rebuilds;
    return line_search(problem, plan, u, newton_direction(*solver, plan, residual), norm, cfg.line_search, cfg.exec);
}

}  // namespace

NewtonResult newton_solve(const ProblemDefinition& problem, const AssemblyPlan& plan, DiscreteFunction u0,
                          const std::function<double(double)>& tolerance, const NewtonConfig& cfg)
{
    NewtonResult out{std::move(u0), {}};
    DiscreteFunction& u = out.u;
    NewtonStats& stats = out.stats;
    plan.constraints().distribute(u.coefficients());

    Vector r = assemble_residual(problem, plan, u, cfg.exec);
    double norm = max_norm(r);
    double prev = norm;
    stats.initial_residual = norm;
    const double tol = tolerance(norm);
    std::optional<DirectSolver> solver;

    while (norm > tol) {
        if (stats.iterations >= cfg.max_iterations) {
            std::ostringstream msg;
            msg << "Newton did not reach " << tol << " in " << cfg.max_iterations << " iterations (residual " << norm
                << ")";
            throw MaxIterations(msg.str());
        }
        bool rebuilt = !solver || norm / prev > cfg.rebuild_ratio;
        if (rebuilt) {
            solver.emplace(assemble_jacobian(problem, plan, u, cfg.exec));
            ++stats.rebuilds;
        }
        LineSearchResult ls = damped_step(problem, plan, u, r, norm, solver, rebuilt, stats.rebuilds, cfg);
        prev = norm;
        norm = ls.residual_norm;
        r = std::move(ls.residual);
        ++stats.iterations;
        NewtonIteration it{stats.iterations, norm, ls.alpha, rebuilt, -1.0};
        stats.trace.push_back(it);
        if (cfg.log) cfg.log(it);
    }
    stats.termination = NewtonTermination::Converged;
    return out;
}

NewtonResult newton_solve(const ProblemDefinition& problem, const AssemblyPlan& plan, DiscreteFunction u0,
                          double tol_abs, const NewtonConfig& cfg)
{
    return newton_solve(problem, plan, std::move(u0), [tol_abs](double) { return tol_abs; }, cfg);
}

double nested_tolerance(int level, double initial_residual_norm)
{
    if (level < 1) throw std::invalid_argument("levels start at 1");
    return (level == 1 ? 1e-8 : 1e-2) * initial_residual_norm;
}

DiscreteFunction solve_adjoint(const DirectSolver& jacobian, const AssemblyPlan& plan, const Vector& raw_rhs)
{
    Vector z = jacobian.solve_transposed(condense_vector(raw_rhs, plan.constraints()));
    plan.constraints().distribute_homogeneous(z);
    return DiscreteFunction(plan.space_ptr(), std::move(z));
}

double residual_pairing(const Vector& residual, const DiscreteFunction& z)
{
    return dot(residual, z.coefficients());
}

AdaptiveNewtonResult adaptive_newton_multigoal(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                               const std::vector<NamedFunctional>& functionals,
                                               const std::vector<double>& omegas, DiscreteFunction u0,
                                               double eta_prev, const DiscreteFunction& u_h2,
                                               const AdaptiveNewtonConfig& cfg)
{
    if (!(eta_prev > 0.0)) throw std::invalid_argument("adaptive Newton needs a positive previous estimate");
    const NewtonConfig& ncfg = cfg.newton;
    AdaptiveNewtonResult out;
    out.u = std::move(u0);
    DiscreteFunction& u = out.u;
    AdaptiveNewtonStats& stats = out.stats;
    plan.constraints().distribute(u.coefficients());
    stats.threshold = cfg.stop == NewtonStop::Balanced ? cfg.balance * eta_prev : cfg.fixed_tolerance;

    Vector r = assemble_residual(problem, plan, u, ncfg.exec);
    double norm = max_norm(r);
    double prev = norm;
    stats.initial_residual = norm;
    std::optional<DirectSolver> solver;
    solver.emplace(assemble_jacobian(problem, plan, u, ncfg.exec));
    stats.rebuilds = 1;
    bool rebuilt = true;

    auto adjoint = [&] {
        out.combined = build_combined(functionals, u, u_h2, omegas);
        out.z = solve_adjoint(*solver, plan, combined_derivative_rhs(out.combined, plan.space(), u));
        const double eta = std::abs(residual_pairing(r, out.z));
        stats.eta_m.push_back(eta);
        return eta;
    };
    auto unbalanced = [&](double eta) {
        return cfg.stop == NewtonStop::Balanced ? eta > stats.threshold : norm > stats.threshold;
    };

    // The fixed-residual variant needs the adjoint only at the end.
    double eta = cfg.stop == NewtonStop::Balanced ? adjoint() : 0.0;
    while (unbalanced(eta)) {
        if (stats.iterations >= ncfg.max_iterations) {
            std::ostringstream msg;
            msg << "adaptive Newton hit the cap of " << ncfg.max_iterations << " iterations (eta_m " << eta
                << ", residual " << norm << ", threshold " << stats.threshold << ")";
            throw IterationCap(msg.str());
        }
        LineSearchResult ls = damped_step(problem, plan, u, r, norm, solver, rebuilt, stats.rebuilds, ncfg);
        const bool step_rebuilt = rebuilt;
        prev = norm;
        norm = ls.residual_norm;
        r = std::move(ls.residual);
        ++stats.iterations;
        rebuilt = norm / prev > ncfg.rebuild_ratio;
        if (rebuilt) {
            solver.emplace(assemble_jacobian(problem, plan, u, ncfg.exec));
            ++stats.rebuilds;
        }
        if (cfg.stop == NewtonStop::Balanced) eta = adjoint();
        NewtonIteration it{stats.iterations, norm, ls.alpha, step_rebuilt,
                           cfg.stop == NewtonStop::Balanced ? eta : -1.0};
        stats.trace.push_back(it);
        if (ncfg.log) ncfg.log(it);
    }
    if (cfg.stop == NewtonStop::FixedResidual) {
        if (!rebuilt) {
            solver.emplace(assemble_jacobian(problem, plan, u, ncfg.exec));
            ++stats.rebuilds;
        }
        adjoint();
        stats.termination = NewtonTermination::Converged;
    } else {
        stats.termination = NewtonTermination::Balanced;
    }
    return out;
}

std::string to_string(NewtonTermination t)
{
    switch (t) {
    case NewtonTermination::Converged: return "converged";
    case NewtonTermination::Balanced: return "balanced";
    case NewtonTermination::MaxIterations: return "max-iterations";
    }
    return "unknown";
}

}  // namespace mgdwr
