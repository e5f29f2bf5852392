#include "helpers.hpp"

#include "mgdwr/errors.hpp"
#include "mgdwr/goals.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace mgdwr;
using namespace mgdwr::test;

namespace {

FieldFunction constant(double c)
{
    return [c](const Point&, Side, int) { return c; };
}

double fd_derivative(const Functional& j, const DiscreteFunction& u, const DiscreteFunction& v, double h)
{
    DiscreteFunction up = u, um = u;
    for (std::size_t i = 0; i < u.coefficients().size(); ++i) {
        up[i] += h * v[i];
        um[i] -= h * v[i];
    }
    return (eval(j, up) - eval(j, um)) / (2 * h);
}

}  // namespace

TEST(Goals, DomainIntegralOfConstant)
{
    const auto s = space_on(share(Mesh::unit_square(3)), 2);
    const auto j = catalog("example1a")[0].functional;
    EXPECT_NEAR(eval(j, interpolate(s, constant(2.0))), 2.0, 1e-14);
}

TEST(Goals, CheeseFunctionalsAtConstants)
{
    const auto s = space_on(share(Mesh::cheese()), 1);
    const auto js = catalog("example1c");
    ASSERT_EQ(js.size(), 4u);
    EXPECT_NEAR(eval(js[0].functional, DiscreteFunction(s)), 1.0, 1e-15);
    for (double c : {0.0, 1.0, -2.5}) {
        const auto u = interpolate(s, constant(c));
        EXPECT_NEAR(eval(js[1].functional, u), 0.0, 1e-24 + 1e-26 * c * c);
        EXPECT_NEAR(eval(js[2].functional, u), c, 1e-14);
        EXPECT_NEAR(eval(js[3].functional, u), c, 1e-14);
    }
}

TEST(Goals, CatalogShapes)
{
    EXPECT_EQ(catalog("example1a").size(), 1u);
    EXPECT_EQ(catalog("example1b").size(), 1u);
    EXPECT_EQ(catalog("example1c").size(), 4u);
    EXPECT_EQ(catalog("example2").size(), 6u);
    EXPECT_THROW((void)catalog("example3"), UnknownExperiment);
}

TEST(Goals, BoxIntegralAlignedAndClipped)
{
    const auto m = share(Mesh::unit_square(3).distorted(0.2, 8));
    const auto s = space_on(m, 2);
    auto f = [](const Point& p, Side, int) { return p.x * p.y + 1.0; };
    const auto u = interpolate(s, f);
    // integral of xy + 1 over (0.2,0.7)x(0.1,0.5)
    const double exact = (0.7 * 0.7 - 0.2 * 0.2) / 2 * (0.5 * 0.5 - 0.1 * 0.1) / 2 + 0.5 * 0.4;
    const auto j = component_integral(0, Box{{0.2, 0.1}, {0.7, 0.5}});
    EXPECT_NEAR(eval(j, u), exact, 2e-4);
    // axis-aligned cells clip exactly
    const auto s2 = space_on(share(Mesh::unit_square(3)), 2);
    EXPECT_NEAR(eval(j, interpolate(s2, f)), exact, 1e-14);
}

TEST(Goals, BoxIntegralInvariantUnderRefinement)
{
    Mesh m = Mesh::cheese();
    const auto j = catalog("example1c")[2].functional;
    auto f = [](const Point& p, Side, int) { return p.x * p.x * p.y + 0.5 * p.y; };
    const double coarse = eval(j, interpolate(space_on(share(m), 3), f));
    m = m.refined({m.locate({2.5, 2.5})->cell, m.locate({0.5, 0.5})->cell});
    m = m.refined({m.locate({2.2, 2.2})->cell});
    const double fine = eval(j, interpolate(space_on(share(m), 3), f));
    EXPECT_NEAR(coarse, fine, 1e-12);
    // int_2^3 int_2^3 x^2 y + y/2
    EXPECT_NEAR(coarse, (27.0 - 8.0) / 3.0 * 2.5 + 0.5 * 2.5, 1e-12);
}

TEST(Goals, ChainRuleExamples)
{
    const auto s = space_on(share(Mesh::unit_square(2)), 2);
    const auto ja = component_integral(0);
    const auto sq = power(ja, 2);
    DiscreteFunction u(s, random_vector(25, 1));
    DiscreteFunction v(s, random_vector(25, 2));
    EXPECT_NEAR(derivative(sq, u, v), 2.0 * eval(ja, u) * derivative(ja, u, v), 1e-14);
    DiscreteFunction w(s, random_vector(25, 3));
    EXPECT_DOUBLE_EQ(derivative(ja, u, v), derivative(ja, w, v));
}

TEST(Goals, GradientEntries)
{
    const auto s = space_on(share(Mesh::unit_square(2)), 1);
    const DiscreteFunction u(s);
    const auto g = assemble_functional_gradient(point_value({0.3, 0.6}), *s, u);
    const auto loc = s->mesh().locate({0.3, 0.6});
    const auto nodes = s->cell_nodes(loc->cell);
    double sum = 0.0;
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(g[nodes[k]], s->shape_value(k, loc->ref), 1e-15);
    for (double x : g) sum += x;
    EXPECT_NEAR(sum, 1.0, 1e-15);

    const auto gi = assemble_functional_gradient(component_integral(0), *s, u);
    for (int n = 0; n < 9; ++n) {
        const Point p = s->node_point(n);
        const int on = (p.x == 0 || p.x == 1) + (p.y == 0 || p.y == 1);
        EXPECT_NEAR(gi[n], on == 2 ? 1.0 / 16 : on == 1 ? 1.0 / 8 : 0.25, 1e-15);
    }
}

TEST(Goals, GradientMatchesDirectionalDerivative)
{
    const auto s = space_on(share(Mesh::slit().refined_globally(1)), 2, 3);
    DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 4, 0.2, 0.8));
    const DiscreteFunction v(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 5));
    for (const auto& nf : catalog("example2")) {
        const auto g = assemble_functional_gradient(nf.functional, *s, u);
        const double d = derivative(nf.functional, u, v);
        EXPECT_NEAR(dot(g, v.coefficients()), d, 1e-12 * (1 + std::abs(d))) << nf.name;
    }
}

TEST(Goals, ExampleTwoDerivativesMatchFiniteDifferences)
{
    Mesh m = Mesh::slit().refined_globally(2);
    m = m.refined({m.locate({0.01, 0.01})->cell});
    const auto s = space_on(share(m), 2, 3);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 10 + seed, 0.2, 0.8));
        const DiscreteFunction v(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 20 + seed));
        for (const auto& nf : catalog("example2")) {
            const double fd = fd_derivative(nf.functional, u, v, 1e-6);
            EXPECT_NEAR(derivative(nf.functional, u, v), fd, 1e-6 * (1 + std::abs(eval(nf.functional, u))))
                << nf.name;
        }
    }
}

TEST(Goals, CheeseDerivativesMatchFiniteDifferences)
{
    const auto s = space_on(share(Mesh::cheese().refined_globally(1)), 2);
    const DiscreteFunction u(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 30));
    const DiscreteFunction v(s, random_vector(static_cast<std::size_t>(s->n_dofs()), 31));
    for (const auto& nf : catalog("example1c")) {
        const double fd = fd_derivative(nf.functional, u, v, 1e-6);
        EXPECT_NEAR(derivative(nf.functional, u, v), fd, 1e-6 * (1 + std::abs(eval(nf.functional, u)))) << nf.name;
    }
}

TEST(Goals, SlitWeights)
{
    const auto c = phi_c({-0.2, 0.5});
    EXPECT_EQ(c[0], 0.0);
    EXPECT_EQ(c[1], 0.0);
    EXPECT_DOUBLE_EQ(c[2], 0.7);
    EXPECT_EQ(phi_c({0.5, 0.2})[2], 0.0);
    EXPECT_EQ(phi_d({-0.5, 0.5})[1], 0.0);
    const auto d = phi_d({0.3, 0.4});
    EXPECT_DOUBLE_EQ(d[0], -4.0);
    EXPECT_NEAR(d[1], 2.0 / (1.0 - std::sqrt(0.5 - 0.3)), 1e-15);
    EXPECT_DOUBLE_EQ(d[2], 4.0);
}

TEST(Goals, ExampleTwoAtExactSolution)
{
    const auto base = Mesh::slit().refined_globally(4);
    const auto s = space_on(share(base), 2, 3);
    const FieldFunction exact = [](const Point& p, Side side, int c) { return quasilinear_exact(p, side)[c]; };
    const auto u = interpolate(s, exact);
    const auto js = catalog("example2");
    // J_D = integral over the unit square of 2, J_C from an independent 2D quadrature
    const double jd = 2.0;
    const double jc = 1.1070226329754737;
    const double jb = slit_profile({-0.01, 0.01});
    EXPECT_NEAR(eval(js[0].functional, u) / evaluate_at_point(u, {-0.01, 0.01}, 0), jd, 1e-4);
    EXPECT_NEAR(eval(js[5].functional, u), jc, 1e-4);

    // closed-form evaluation on a mesh graded toward the tip
    Mesh g = Mesh::slit().refined_globally(2);
    for (int k = 0; k < 20; ++k) {
        CellMarks marks;
        for (const auto& hit : g.locate_all({0.0, 0.0})) marks.push_back(hit.cell);
        g = g.refined(marks);
    }
    EXPECT_NEAR(eval_field(js[5].functional, exact, g, 8), jc, 1e-9);
    EXPECT_NEAR(eval_field(js[0].functional, exact, g, 8), jb * jd, 1e-9);
}
