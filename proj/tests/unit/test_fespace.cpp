#include "mgdwr/errors.hpp"
#include "mgdwr/fespace.hpp"
#include "mgdwr/problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace mgdwr;

namespace {

std::shared_ptr<const Mesh> share(Mesh m)
{
    return std::make_shared<const Mesh>(std::move(m));
}

std::shared_ptr<const FeSpace> space_on(std::shared_ptr<const Mesh> m, int r, int nc = 1)
{
    return std::make_shared<const FeSpace>(std::move(m), r, nc);
}

FieldFunction scalar(std::function<double(const Point&)> f)
{
    return [f = std::move(f)](const Point& p, Side, int) { return f(p); };
}

}  // namespace

TEST(FeSpace, DofCounts)
{
    const auto m2 = share(Mesh::unit_square(2));
    EXPECT_EQ(space_on(m2, 1)->n_dofs(), 9);
    EXPECT_EQ(space_on(m2, 2)->n_dofs(), 25);
    EXPECT_EQ(space_on(share(Mesh::unit_square(4)), 3)->n_dofs(), 169);
    EXPECT_EQ(space_on(m2, 2, 3)->n_dofs(), 75);
    EXPECT_EQ(space_on(share(Mesh::cheese().refined_globally(1)), 1)->n_dofs(), 117);
}

TEST(FeSpace, SlitLipsDoNotShareNodes)
{
    const auto m = share(Mesh::slit());
    const auto s = space_on(m, 2);
    // 5x5 grid plus the duplicated nodes at (-1,0) and (-0.5,0)
    EXPECT_EQ(s->n_nodes(), 27);
    int at_half = 0;
    for (int n = 0; n < s->n_nodes(); ++n)
        if (s->node_point(n) == Point{-0.5, 0.0}) {
            ++at_half;
            EXPECT_NE(s->node_side(n), Side::None);
        }
    EXPECT_EQ(at_half, 2);
}

TEST(FeSpace, HomogeneousDirichletOnUniformMesh)
{
    const auto s = space_on(share(Mesh::unit_square(3)), 2);
    const auto cs = build_constraints(*s, {{kDirichletTag, 0, [](const Point&, Side) { return 0.0; }}});
    EXPECT_TRUE(s->hanging_constraints().constrained_dofs().empty());
    int boundary = 0;
    for (int n = 0; n < s->n_nodes(); ++n) {
        const Point p = s->node_point(n);
        const bool on = p.x == 0.0 || p.y == 0.0 || p.x == 1.0 || p.y == 1.0;
        EXPECT_EQ(cs.is_constrained(n), on);
        if (on) {
            ++boundary;
            EXPECT_TRUE(cs.line(n).entries.empty());
            EXPECT_EQ(cs.line(n).inhomogeneity, 0.0);
        }
    }
    EXPECT_EQ(boundary, 24);
}

TEST(FeSpace, HangingVertexLinearWeights)
{
    const Mesh base = Mesh::unit_square(2);
    const auto m = share(base.refined({base.active_cells()[0]}));
    const auto s = space_on(m, 1);
    const auto& hc = s->hanging_constraints();
    ASSERT_EQ(hc.n_constraints(), 2u);
    for (int dof : hc.constrained_dofs()) {
        const auto& line = hc.line(dof);
        ASSERT_EQ(line.entries.size(), 2u);
        for (const auto& [master, w] : line.entries) {
            EXPECT_DOUBLE_EQ(w, 0.5);
            EXPECT_NEAR(norm(s->node_point(master) - s->node_point(dof)), 0.25, 1e-15);
        }
    }
}

TEST(FeSpace, HangingWeightsSumToOne)
{
    Mesh m = Mesh::unit_square(2);
    m = m.refined({m.active_cells()[0]});
    m = m.refined({m.locate({0.01, 0.01})->cell});
    for (int r = 1; r <= 4; ++r) {
        const auto s = space_on(share(m), r);
        const auto& hc = s->hanging_constraints();
        EXPECT_GT(hc.n_constraints(), 0u);
        for (int dof : hc.constrained_dofs()) {
            double sum = 0.0;
            for (const auto& e : hc.line(dof).entries) {
                sum += e.second;
                EXPECT_FALSE(hc.is_constrained(e.first));
            }
            EXPECT_NEAR(sum, 1.0, 1e-13);
        }
    }
}

TEST(FeSpace, SlitInterpolantTakesBothBranches)
{
    const auto m = share(Mesh::slit().refined_globally(1));
    const auto s = space_on(m, 1);
    const auto u = interpolate(s, [](const Point& p, Side side, int) { return slit_profile(p, side); });
    const double expected = std::sqrt(std::sqrt(0.25) + 0.5);
    EXPECT_NEAR(expected, 1.0, 1e-15);
    EXPECT_NEAR(evaluate_at_point(u, {-0.5, 0.0}, 0, Side::Above), expected, 1e-14);
    EXPECT_NEAR(evaluate_at_point(u, {-0.5, 0.0}, 0, Side::Below), -expected, 1e-14);
    EXPECT_NEAR(evaluate_at_point(u, {0.0, 0.0}), 0.0, 1e-14);
}

TEST(FeSpace, SlitDirichletConstraintsCarryBothBranches)
{
    // slit with every boundary face Dirichlet, so the lips carry data too
    const Mesh slit = Mesh::slit();
    std::vector<Point> verts;
    std::vector<Side> sides;
    for (VertexId v = 0; v < slit.n_vertices(); ++v) {
        verts.push_back(slit.vertex(v));
        sides.push_back(slit.vertex_side(v));
    }
    std::vector<std::array<VertexId, 4>> cells;
    for (CellId c : slit.active_cells()) cells.push_back(slit.cell(c).vertices);
    const auto m = share(Mesh::from_cells(verts, sides, cells).refined_globally(1));
    const auto s = space_on(m, 1);
    const auto cs = build_constraints(*s, {{kDirichletTag, 0, [](const Point& p, Side side) {
                                               return slit_profile(p, side);
                                           }}});
    // sqrt(sqrt(0.25) + 0.5) = 1
    int found = 0;
    for (int n = 0; n < s->n_nodes(); ++n) {
        if (!(s->node_point(n) == Point{-0.5, 0.0})) continue;
        ASSERT_TRUE(cs.is_constrained(n));
        const double sign = s->node_side(n) == Side::Above ? 1.0 : -1.0;
        EXPECT_NEAR(cs.line(n).inhomogeneity, sign * 1.0, 1e-15);
        ++found;
    }
    EXPECT_EQ(found, 2);
}

TEST(FeSpace, ConflictingConstraintsThrow)
{
    ConstraintSet cs(3);
    cs.add_fixed(0, 1.0);
    cs.add_fixed(0, 1.0 + 1e-14);
    EXPECT_THROW(cs.add_fixed(0, 1.5), ConflictingConstraints);
}

TEST(FeSpace, ConstraintApplicationIsProjection)
{
    Mesh m = Mesh::unit_square(2);
    m = m.refined({m.active_cells()[0]});
    m = m.refined({m.locate({0.01, 0.01})->cell});
    const auto s = space_on(share(m), 3);
    const auto cs = build_constraints(*s, {{kDirichletTag, 0, [](const Point& p, Side) { return p.x * p.y; }}});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<double> x(static_cast<std::size_t>(s->n_dofs()));
    for (auto& v : x) v = d(rng);
    cs.distribute(x);
    auto y = x;
    cs.distribute(y);
    for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(x[i], y[i]);
}

TEST(FeSpace, ContinuousAcrossHangingFaces)
{
    Mesh m = Mesh::unit_square(3).distorted(0.2, 11);
    m = m.refined({m.active_cells()[4]});
    m = m.refined({m.locate({0.45, 0.45})->cell});
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(-1, 1);
    for (int r = 1; r <= 3; ++r) {
        const auto s = space_on(share(m), r);
        DiscreteFunction f(s);
        for (auto& v : f.coefficients()) v = d(rng);
        s->hanging_constraints().distribute(f.coefficients());
        for (const auto& h : m.hanging_edges()) {
            for (int k = 0; k < 5; ++k) {
                const double t = 0.5 * (d(rng) + 1.0);
                const Point p = (1.0 - t) * m.vertex(h.a) + t * m.vertex(h.b);
                const auto hits = m.locate_all(p);
                ASSERT_GE(hits.size(), 2u);
                const double ref = f.value(hits[0].cell, hits[0].ref);
                for (const auto& hit : hits) EXPECT_NEAR(f.value(hit.cell, hit.ref), ref, 1e-12);
            }
        }
    }
}

TEST(FeSpace, EvaluateBilinear)
{
    const auto s = space_on(share(Mesh::unit_square(1)), 1);
    const auto f = interpolate(s, scalar([](const Point& p) { return p.x + p.y; }));
    EXPECT_NEAR(evaluate_at_point(f, {0.5, 0.5}), 1.0, 1e-15);
    EXPECT_THROW((void)evaluate_at_point(f, {1.5, 0.5}), PointOutsideDomain);
}

TEST(FeSpace, EvaluateConstant)
{
    const auto s = space_on(share(Mesh::cheese()), 2);
    const auto f = interpolate(s, scalar([](const Point&) { return 3.25; }));
    for (const Point p : {Point{0.6, 0.6}, Point{2.5, 2.5}, Point{4.99, 0.01}}) EXPECT_NEAR(evaluate_at_point(f, p), 3.25, 1e-14);
}

TEST(FeSpace, SlitExactSolutionPointValue)
{
    const auto m = share(Mesh::slit().refined_globally(5));
    const auto s = space_on(m, 2, 3);
    const auto u = interpolate(s, [](const Point& p, Side side, int c) { return quasilinear_exact(p, side)[c]; });
    const Point x{-0.5, 0.01};
    EXPECT_NEAR(evaluate_at_point(u, x, 2), slit_profile(x), 1e-4);
    EXPECT_NEAR(evaluate_at_point(u, x, 1), 1.0 - slit_profile(x), 1e-4);
}

TEST(FeSpace, InterpolateBetweenDegrees)
{
    const auto m = share(Mesh::unit_square(1));
    const auto s1 = space_on(m, 1);
    const auto s2 = space_on(m, 2);
    const auto c2 = interpolate(s2, scalar([](const Point&) { return 4.0; }));
    const auto down = interpolate_between(c2, s1);
    for (double v : down.coefficients()) EXPECT_NEAR(v, 4.0, 1e-15);

    const auto bubble = interpolate(s2, scalar([](const Point& p) { return p.x * (1.0 - p.x); }));
    const auto flat = interpolate_between(bubble, s1);
    for (double v : flat.coefficients()) EXPECT_NEAR(v, 0.0, 1e-15);

    DiscreteFunction lin(s1, {0.3, -1.0, 2.0, 0.7});
    const auto back = interpolate_between(interpolate_between(lin, s2), s1);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(back[i], lin[i], 1e-15);

    const auto other = space_on(share(Mesh::unit_square(1)), 1);
    EXPECT_THROW((void)interpolate_between(lin, other), MeshMismatch);
}

TEST(FeSpace, InterpolationReproducesPolynomials)
{
    Mesh base = Mesh::unit_square(2).distorted(0.0, 1);
    base = base.refined({base.active_cells()[0]});
    const auto m = share(base);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0, 1);
    for (int rs = 1; rs <= 4; ++rs)
        for (int rt = 1; rt <= 4; ++rt) {
            const int k = std::min(rs, rt);
            auto mono = [k](const Point& p) { return std::pow(p.x, k) * std::pow(p.y, k) + std::pow(p.x, k - 1); };
            const auto src = interpolate(space_on(m, rs), scalar(mono));
            const auto dst = interpolate_between(src, space_on(m, rt));
            for (int t = 0; t < 20; ++t) {
                const Point p{d(rng), d(rng)};
                EXPECT_NEAR(evaluate_at_point(dst, p), mono(p), 1e-12) << rs << "->" << rt;
            }
        }
}

TEST(FeSpace, TransferToRefinedIsExact)
{
    Mesh coarse = Mesh::unit_square(2);
    const auto mc = share(coarse);
    const auto mf = share(coarse.refined({coarse.active_cells()[1], coarse.active_cells()[2]}));
    auto f = [](const Point& p) { return p.x * p.x * p.y - 2.0 * p.y + 1.0; };
    const auto uc = interpolate(space_on(mc, 2), scalar(f));
    const auto uf = transfer_to_refined(uc, space_on(mf, 2));
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(0, 1);
    for (int t = 0; t < 30; ++t) {
        const Point p{d(rng), d(rng)};
        EXPECT_NEAR(evaluate_at_point(uf, p), f(p), 1e-13);
    }
}
