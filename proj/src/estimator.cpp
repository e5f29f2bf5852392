#include "mgdwr/estimator.hpp"

#include "mgdwr/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace mgdwr {

DiscreteFunction solve_enriched_adjoint(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                        const DiscreteFunction& u_h2, const Vector& raw_rhs, Execution exec)
{
    const DirectSolver solver(assemble_jacobian(problem, plan, u_h2, exec));
    return solve_adjoint(solver, plan, raw_rhs);
}

DiscreteFunction coarse_interpolant(const DiscreteFunction& f, const AssemblyPlan& coarse)
{
    DiscreteFunction c = interpolate_between(f, coarse.space_ptr());
    coarse.constraints().distribute_homogeneous(c.coefficients());
    return interpolate_between(c, f.space_ptr());
}

namespace {

DiscreteFunction difference(const DiscreteFunction& a, const DiscreteFunction& b)
{
    DiscreteFunction d = a;
    for (std::size_t i = 0; i < d.coefficients().size(); ++i) d[i] -= b[i];
    return d;
}

}  // namespace

EstimatorBreakdown estimate(const ProblemDefinition& problem, const LinearForm& j_prime, const AssemblyPlan& coarse,
                            const DiscreteFunction& u_h, const DiscreteFunction& z_h, const DiscreteFunction& u_h2,
                            const DiscreteFunction& z_h2, const FeSpace& pu, Execution exec)
{
    if (pu.degree() != 1 || pu.n_components() != 1) throw std::invalid_argument("partition of unity must be scalar Q1");
    const auto& enriched = u_h2.space_ptr();
    // Both weights live in the enriched space; u_h embeds exactly.
    const DiscreteFunction w_primal = difference(z_h2, coarse_interpolant(z_h2, coarse));
    const DiscreteFunction w_adjoint = difference(u_h2, interpolate_between(u_h, enriched));

    EstimatorBreakdown b;
    b.eta_primal_signed = weighted_primal_residual(problem, u_h, w_primal);
    b.eta_adjoint_signed = j_prime.apply(w_adjoint) - linearized_pairing(problem, u_h, w_adjoint, z_h);
    b.eta_signed = 0.5 * (b.eta_primal_signed + b.eta_adjoint_signed);
    b.eta_h = std::abs(b.eta_signed);

    const Vector primal = weighted_primal_residual_pu(problem, u_h, w_primal, pu, exec);
    const Vector j_part = j_prime.apply_pu(w_adjoint, pu);
    const Vector a_part = linearized_pairing_pu(problem, u_h, w_adjoint, z_h, pu, exec);
    b.nodal.resize(primal.size());
    b.nodal_adjoint.resize(primal.size());
    for (std::size_t i = 0; i < primal.size(); ++i) {
        b.nodal_adjoint[i] = j_part[i] - a_part[i];
        b.nodal[i] = 0.5 * (primal[i] + b.nodal_adjoint[i]);
    }
    b.nodal_primal = primal;
    b.cellwise = distribute_to_cells(b.nodal, pu);
    return b;
}

Vector distribute_to_cells(const Vector& nodal, const FeSpace& pu)
{
    const Mesh& m = pu.mesh();
    Vector eta(static_cast<std::size_t>(m.n_active()), 0.0);
    for (int i = 0; i < pu.n_nodes(); ++i) {
        if (nodal[i] == 0.0) continue;
        const VertexId v = pu.node_vertex(i);
        const auto cells = m.vertex_cells(v);
        const double share = std::abs(nodal[i]) / static_cast<double>(cells.size());
        for (CellId c : cells) eta[m.active_index(c)] += share;
    }
    return eta;
}

Effectivity effectivity(const std::vector<double>& exact, const std::vector<double>& values_h,
                        const std::vector<double>& omegas, const EstimatorBreakdown& b)
{
    if (exact.size() != values_h.size() || omegas.size() != values_h.size())
        throw std::invalid_argument("effectivity: size mismatch");
    Effectivity e;
    for (std::size_t i = 0; i < exact.size(); ++i)
        e.true_error += omegas[i] * std::abs(exact[i] - values_h[i]) / std::abs(values_h[i]);
    if (!(e.true_error > 0.0)) throw ZeroTrueError("true error vanishes, effectivity undefined");
    e.i_eff = b.eta_h / e.true_error;
    e.i_effp = std::abs(b.eta_primal_signed) / e.true_error;
    e.i_effa = std::abs(b.eta_adjoint_signed) / e.true_error;
    return e;
}

}  // namespace mgdwr
