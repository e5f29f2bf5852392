#include "helpers.hpp"

#include "mgdwr/assembly.hpp"
#include "mgdwr/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mgdwr;
using namespace mgdwr::test;

namespace {

std::shared_ptr<PLaplaceProblem> plaplace(double p, double eps, double f = 1.0)
{
    return build_plaplace({.p = p, .epsilon = eps, .rhs = [f](const Point&) { return f; }});
}

// ||J d - (R(u + h d) - R(u - h d)) / 2h||_inf relative to ||J d||_inf.
double fd_mismatch(const ProblemDefinition& problem, const AssemblyPlan& plan, const DiscreteFunction& u,
                   std::uint64_t seed)
{
    const auto& cs = plan.constraints();
    auto d = random_vector(u.coefficients().size(), seed);
    cs.zero_constrained(d);
    const auto j = assemble_jacobian(problem, plan, u);
    const auto jd = j.multiply(d);
    auto dfull = d;
    cs.homogenized().distribute_homogeneous(dfull);
    double unorm = 0.0;
    for (double v : u.coefficients()) unorm = std::max(unorm, std::abs(v));
    const double h = 1e-6 * (1.0 + unorm);
    DiscreteFunction up = u, um = u;
    for (std::size_t i = 0; i < dfull.size(); ++i) {
        up[i] += h * dfull[i];
        um[i] -= h * dfull[i];
    }
    const auto rp = assemble_residual(problem, plan, up);
    const auto rm = assemble_residual(problem, plan, um);
    double diff = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < jd.size(); ++i) {
        if (cs.is_constrained(static_cast<int>(i))) continue;
        diff = std::max(diff, std::abs(jd[i] - (rp[i] - rm[i]) / (2 * h)));
        scale = std::max(scale, std::abs(jd[i]));
    }
    return diff / scale;
}

}  // namespace

TEST(Assembly, InteriorHatResidual)
{
    const auto s = space_on(share(Mesh::unit_square(2)), 1);
    const auto problem = plaplace(2.0, 1.0);
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    const DiscreteFunction u(s);
    const auto r = assemble_residual(*problem, plan, u);
    for (int n = 0; n < s->n_nodes(); ++n) {
        if (s->node_point(n) == Point{0.5, 0.5})
            EXPECT_NEAR(r[n], -0.25, 1e-15);
        else
            EXPECT_EQ(r[n], 0.0);
    }
    const auto r2 = assemble_residual(*plaplace(2.0, 1.0, 2.0), plan, u);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r2[i], 2.0 * r[i], 1e-15);
}

TEST(Assembly, SingleCellLinearResidual)
{
    // p=2, u=x, v=x, f=0 on the unit cell: A(u)(v) = 1
    const auto s = space_on(share(Mesh::unit_square(1)), 1);
    const auto problem = plaplace(2.0, 0.7, 0.0);
    const AssemblyPlan plan(s, ConstraintSet(s->n_dofs()));
    const auto u = interpolate(s, [](const Point& p, Side, int) { return p.x; });
    const auto r = assemble_residual(*problem, plan, u);
    // v = x is phi_1 + phi_3
    EXPECT_NEAR(r[1] + r[3], 1.0, 1e-15);
    const auto zero = assemble_residual(*problem, plan, DiscreteFunction(s));
    for (double v : zero) EXPECT_EQ(v, 0.0);
}

TEST(Assembly, LaplaceIsEpsilonAndStateIndependent)
{
    const auto s = space_on(share(hanging_square()), 2);
    const auto a = plaplace(2.0, 1.0);
    const auto b = plaplace(2.0, 1e-3);
    const AssemblyPlan plan(s, build_constraints(*s, a->dirichlet()));
    DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 1));
    plan.constraints().distribute(u.coefficients());
    const auto ja = assemble_jacobian(*a, plan, u);
    const auto jb = assemble_jacobian(*b, plan, u);
    const auto j0 = assemble_jacobian(*a, plan, DiscreteFunction(s));
    for (std::size_t k = 0; k < ja.values().size(); ++k) {
        EXPECT_NEAR(ja.values()[k], jb.values()[k], 1e-14);
        EXPECT_NEAR(ja.values()[k], j0.values()[k], 1e-14);
    }
    const auto ra = assemble_residual(*a, plan, u);
    const auto rb = assemble_residual(*b, plan, u);
    for (std::size_t i = 0; i < ra.size(); ++i) EXPECT_NEAR(ra[i], rb[i], 1e-14);
}

TEST(Assembly, PLaplaceJacobianSymmetric)
{
    const auto s = space_on(share(hanging_square()), 2);
    const auto problem = plaplace(4.0, 0.5);
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 2));
    plan.constraints().distribute(u.coefficients());
    const auto j = assemble_jacobian(*problem, plan, u);
    double asym = 0.0;
    for (int i = 0; i < j.n(); ++i)
        for (int k = j.row_ptr()[i]; k < j.row_ptr()[i + 1]; ++k) {
            const int c = j.cols()[k];
            asym = std::max(asym, std::abs(j.values()[k] - j.at(c, i)));
        }
    EXPECT_LE(asym, 1e-12);
}

TEST(Assembly, JacobianMatchesFiniteDifferences)
{
    const auto s = space_on(share(hanging_square().distorted(0.15, 3)), 2);
    for (double p : {1.5, 4.0, 5.0}) {
        const auto problem = plaplace(p, 0.5);
        const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 100 + seed));
            plan.constraints().distribute(u.coefficients());
            EXPECT_LE(fd_mismatch(*problem, plan, u, 200 + seed), 1e-6) << "p=" << p;
        }
    }
}

TEST(Assembly, QuasilinearJacobianMatchesFiniteDifferences)
{
    Mesh m = Mesh::slit().refined_globally(1);
    m = m.refined({m.locate({-0.1, 0.1})->cell});
    const auto s = space_on(share(m), 2, 3);
    const auto problem = build_quasilinear();
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 300 + seed, -0.5, 0.5));
        plan.constraints().distribute(u.coefficients());
        EXPECT_LE(fd_mismatch(*problem, plan, u, 400 + seed), 1e-6);
    }
}

TEST(Assembly, SerialAndParallelAgree)
{
    const auto s = space_on(share(hanging_square()), 3);
    const auto problem = plaplace(4.0, 0.5);
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 5));
    plan.constraints().distribute(u.coefficients());
    const auto rs = assemble_residual(*problem, plan, u, Execution::Serial);
    const auto rp = assemble_residual(*problem, plan, u, Execution::Parallel);
    for (std::size_t i = 0; i < rs.size(); ++i) EXPECT_NEAR(rs[i], rp[i], 1e-13 * (1 + std::abs(rs[i])));
    const auto js = assemble_jacobian(*problem, plan, u, Execution::Serial);
    const auto jp = assemble_jacobian(*problem, plan, u, Execution::Parallel);
    for (std::size_t k = 0; k < js.values().size(); ++k)
        EXPECT_NEAR(js.values()[k], jp.values()[k], 1e-13 * (1 + std::abs(js.values()[k])));
}

TEST(Assembly, MassRowSumsAreBasisIntegrals)
{
    const auto m = share(Mesh::unit_square(3).distorted(0.2, 5));
    for (int r = 1; r <= 4; ++r) {
        const auto s = space_on(m, r, 1, 2 * r + 2);
        const AssemblyPlan plan(s, ConstraintSet(s->n_dofs()));
        const auto mass = assemble_mass(plan);
        double total = 0.0;
        for (double v : mass.values()) total += v;
        EXPECT_NEAR(total, 1.0, 1e-13);
    }
    // exact basis integrals on a uniform Q1 mesh: corners h^2/4, edges h^2/2, interior h^2
    const auto s1 = space_on(share(Mesh::unit_square(2)), 1);
    const auto mass = assemble_mass(AssemblyPlan(s1, ConstraintSet(s1->n_dofs())));
    const auto one = mass.multiply(std::vector<double>(9, 1.0));
    for (int n = 0; n < 9; ++n) {
        const Point p = s1->node_point(n);
        const int on = (p.x == 0 || p.x == 1) + (p.y == 0 || p.y == 1);
        const double expected = on == 2 ? 1.0 / 16 : on == 1 ? 1.0 / 8 : 1.0 / 4;
        EXPECT_NEAR(one[n], expected, 1e-15);
    }
}

TEST(Assembly, NonFiniteIntegrandThrows)
{
    const auto s = space_on(share(Mesh::unit_square(2)), 1);
    const auto problem = build_plaplace({.p = 4.0, .epsilon = 1.0, .rhs = [](const Point&) { return NAN; }});
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    EXPECT_THROW((void)assemble_residual(*problem, plan, DiscreteFunction(s)), QuadratureFailure);
}

TEST(Assembly, HangingCondensationReproducesConformingSolution)
{
    // u = x(1-x)y(1-y) lies in Q2, so both meshes recover it exactly
    auto exact = [](const Point& p) { return p.x * (1 - p.x) * p.y * (1 - p.y); };
    const auto problem = build_plaplace({.p = 2.0, .epsilon = 1.0, .rhs = [](const Point& p) {
                                             return 2.0 * (p.y * (1 - p.y) + p.x * (1 - p.x));
                                         }});
    const Mesh hm = hanging_square();
    const auto sh = space_on(share(hm), 2);
    const AssemblyPlan ph(sh, build_constraints(*sh, problem->dirichlet()));
    const auto uh = newton_step(*problem, ph, DiscreteFunction(sh));
    const auto sc = space_on(share(Mesh::unit_square(12)), 2);
    const AssemblyPlan pc(sc, build_constraints(*sc, problem->dirichlet()));
    const auto uc = newton_step(*problem, pc, DiscreteFunction(sc));
    for (int n = 0; n < sh->n_nodes(); ++n) {
        const Point p = sh->node_point(n);
        EXPECT_NEAR(uh[n], exact(p), 1e-12);
        EXPECT_NEAR(uh[n], evaluate_at_point(uc, p), 1e-10);
    }
}

TEST(Assembly, WeightedResidualProperties)
{
    const auto m = share(hanging_square());
    const auto s = space_on(m, 1, 1, 4);
    const auto s2 = space_on(m, 2, 1, 4);
    const auto problem = plaplace(4.0, 0.5);
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 6));
    plan.constraints().distribute(u.coefficients());

    EXPECT_EQ(weighted_primal_residual(*problem, u, DiscreteFunction(s2)), 0.0);

    DiscreteFunction a(s2, random_vector(static_cast<std::size_t>(s2->n_dofs()), 7));
    DiscreteFunction b(s2, random_vector(static_cast<std::size_t>(s2->n_dofs()), 8));
    DiscreteFunction c(s2, random_vector(static_cast<std::size_t>(s2->n_dofs()), 9));
    DiscreteFunction mix(s2);
    for (std::size_t i = 0; i < mix.coefficients().size(); ++i) mix[i] = 2.0 * a[i] - b[i] + 0.5 * c[i];
    const double lhs = weighted_primal_residual(*problem, u, mix);
    const double rhs = 2.0 * weighted_primal_residual(*problem, u, a) - weighted_primal_residual(*problem, u, b) +
                       0.5 * weighted_primal_residual(*problem, u, c);
    EXPECT_NEAR(lhs, rhs, 1e-12 * (1 + std::abs(lhs)));

    // agrees with the assembled residual for coarse test functions
    DiscreteFunction v(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 10));
    plan.constraints().homogenized().distribute(v.coefficients());
    const auto r = assemble_residual(*problem, plan, u);
    double pair = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!plan.constraints().is_constrained(static_cast<int>(i))) pair += r[i] * v[i];
    EXPECT_NEAR(weighted_primal_residual(*problem, u, v), -pair, 1e-12);
}

TEST(Assembly, GalerkinOrthogonality)
{
    const auto m = share(hanging_square());
    const auto s = space_on(m, 2, 1, 6);
    const auto problem = plaplace(2.0, 1.0);
    const AssemblyPlan plan(s, build_constraints(*s, problem->dirichlet()));
    const auto u = newton_step(*problem, plan, DiscreteFunction(s));
    DiscreteFunction z(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 11));
    plan.constraints().homogenized().distribute(z.coefficients());
    EXPECT_NEAR(weighted_primal_residual(*problem, u, z), 0.0, 1e-12);
}

TEST(Assembly, LinearizedPairingSymmetricForLaplace)
{
    const auto m = share(hanging_square());
    const auto s = space_on(m, 2, 1, 6);
    const auto s4 = space_on(m, 4, 1, 6);
    const auto problem = plaplace(2.0, 1.0);
    const DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 12));
    const DiscreteFunction w(s4, random_vector(static_cast<std::size_t>(s4->n_dofs()), 13));
    const DiscreteFunction z(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 14));
    const double wz = linearized_pairing(*problem, u, w, z);
    const double zw = linearized_pairing(*problem, u, z, w);
    EXPECT_NEAR(wz, zw, 1e-12 * (1 + std::abs(wz)));
    EXPECT_EQ(linearized_pairing(*problem, u, DiscreteFunction(s4), z), 0.0);
}

TEST(Assembly, PartitionOfUnitySums)
{
    const auto m = share(hanging_square().distorted(0.1, 2));
    const auto s = space_on(m, 2, 1, 6);
    const auto s4 = space_on(m, 4, 1, 6);
    const auto pu = space_on(m, 1, 1, 6);
    const auto problem = plaplace(4.0, 0.5);
    DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 15));
    const DiscreteFunction w(s4, random_vector(static_cast<std::size_t>(s4->n_dofs()), 16));
    const DiscreteFunction z(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 17));
    const auto rp = weighted_primal_residual_pu(*problem, u, w, *pu);
    const auto lp = linearized_pairing_pu(*problem, u, w, z, *pu);
    double sr = 0.0, sl = 0.0;
    for (int n = 0; n < pu->n_nodes(); ++n) {
        sr += rp[n];
        sl += lp[n];
        if (pu->hanging_constraints().is_constrained(n)) {
            EXPECT_EQ(rp[n], 0.0);
            EXPECT_EQ(lp[n], 0.0);
        }
    }
    const double r = weighted_primal_residual(*problem, u, w);
    const double l = linearized_pairing(*problem, u, w, z);
    EXPECT_NEAR(sr, r, 1e-12 * (1 + std::abs(r)));
    EXPECT_NEAR(sl, l, 1e-12 * (1 + std::abs(l)));
    const auto serial = weighted_primal_residual_pu(*problem, u, w, *pu, Execution::Serial);
    for (int n = 0; n < pu->n_nodes(); ++n) EXPECT_NEAR(serial[n], rp[n], 1e-13 * (1 + std::abs(rp[n])));
}
