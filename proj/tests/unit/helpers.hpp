#pragma once

#include "mgdwr/assembly.hpp"
#include "mgdwr/fespace.hpp"
#include "mgdwr/linalg.hpp"
#include "mgdwr/problems.hpp"

#include <memory>
#include <random>

namespace mgdwr::test {

inline std::shared_ptr<const Mesh> share(Mesh m)
{
    return std::make_shared<const Mesh>(std::move(m));
}

inline std::shared_ptr<const FeSpace> space_on(std::shared_ptr<const Mesh> m, int r, int nc = 1, int nq = 0)
{
    return std::make_shared<const FeSpace>(std::move(m), r, nc, nq);
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0, double hi = 1.0)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(lo, hi);
    std::vector<double> v(n);
    for (auto& x : v) x = d(rng);
    return v;
}

/// Unit square with one corner cell refined twice: hanging nodes on two levels.
inline Mesh hanging_square()
{
    Mesh m = Mesh::unit_square(3);
    m = m.refined({m.active_cells()[4]});
    m = m.refined({m.locate({0.4, 0.4})->cell});
    return m;
}

/// One Newton step; exact for linear problems.
inline DiscreteFunction newton_step(const ProblemDefinition& problem, const AssemblyPlan& plan, DiscreteFunction u)
{
    plan.constraints().distribute(u.coefficients());
    const auto r = assemble_residual(problem, plan, u);
    const auto j = assemble_jacobian(problem, plan, u);
    auto rhs = r;
    for (auto& v : rhs) v = -v;
    const auto du = solve_direct(j, rhs);
    for (std::size_t i = 0; i < du.size(); ++i) u[i] += du[i];
    plan.constraints().distribute(u.coefficients());
    return u;
}

}  // namespace mgdwr::test
