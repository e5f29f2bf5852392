#include "mgdwr/errors.hpp"
#include "mgdwr/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>

using namespace mgdwr;

namespace {

int count_vertices_at(const Mesh& m, const Point& p)
{
    int n = 0;
    for (VertexId v = 0; v < m.n_vertices(); ++v)
        if (m.vertex(v) == p) ++n;
    return n;
}

// Active vertices: corners of active cells.
std::set<VertexId> active_vertices(const Mesh& m)
{
    std::set<VertexId> out;
    for (CellId c : m.active_cells())
        for (VertexId v : m.cell(c).vertices) out.insert(v);
    return out;
}

}  // namespace

TEST(Mesh, UnitSquareCounts)
{
    const Mesh one = Mesh::unit_square(1);
    EXPECT_EQ(one.n_active(), 1);
    EXPECT_EQ(one.n_vertices(), 4);
    const Mesh two = Mesh::unit_square(2);
    EXPECT_EQ(two.n_active(), 4);
    EXPECT_EQ(two.n_vertices(), 9);
    for (const auto& f : two.boundary_faces()) EXPECT_EQ(f.tag, kDirichletTag);
    EXPECT_EQ(two.boundary_faces().size(), 8u);
    EXPECT_DOUBLE_EQ(two.domain_area(), 1.0);
}

TEST(Mesh, CheeseContainsEvaluationPoints)
{
    const Mesh m = Mesh::cheese();
    EXPECT_EQ(m.n_active(), 21);
    EXPECT_DOUBLE_EQ(m.domain_area(), 21.0);
    for (const Point p : {Point{2.9, 2.1}, Point{2.1, 2.9}, Point{2.5, 2.5}, Point{0.6, 0.6}})
        EXPECT_TRUE(m.locate(p).has_value()) << p.x << "," << p.y;
    EXPECT_FALSE(m.locate({1.5, 1.5}).has_value());
    EXPECT_FALSE(m.locate({3.5, 3.5}).has_value());
    EXPECT_FALSE(m.locate({6.0, 0.5}).has_value());
    for (const auto& f : m.boundary_faces()) EXPECT_EQ(f.tag, kDirichletTag);
    // outer perimeter 20 plus four holes of perimeter 4
    EXPECT_EQ(m.boundary_faces().size(), 36u);
}

TEST(Mesh, SlitDuplicatesLipVertices)
{
    const Mesh m = Mesh::slit().refined_globally(2);
    EXPECT_EQ(count_vertices_at(m, {0.0, 0.0}), 1);
    int interior_slit = 0;
    int copies = 0;
    for (int i = 1; i < 4; ++i) {
        const Point p{-0.25 * i, 0.0};
        EXPECT_EQ(count_vertices_at(m, p), 2);
        ++interior_slit;
        copies += count_vertices_at(m, p);
    }
    copies += count_vertices_at(m, {0.0, 0.0});
    EXPECT_EQ(copies, 2 * interior_slit + 1);
}

TEST(Mesh, SlitBoundaryTagsPartition)
{
    const Mesh m = Mesh::slit().refined_globally(1);
    double dirichlet_len = 0.0;
    double neumann_len = 0.0;
    for (const auto& f : m.boundary_faces()) {
        const auto& v = m.cell(f.cell).vertices;
        const Point a = m.vertex(v[kEdgeCorners[f.local_edge][0]]);
        const Point b = m.vertex(v[kEdgeCorners[f.local_edge][1]]);
        const double len = norm(b - a);
        if (f.tag == kNeumannTag) {
            EXPECT_EQ(a.y, 0.0);
            EXPECT_EQ(b.y, 0.0);
            EXPECT_LE(std::max(a.x, b.x), 0.0);
            neumann_len += len;
        } else {
            ASSERT_EQ(f.tag, kDirichletTag);
            dirichlet_len += len;
        }
    }
    EXPECT_NEAR(neumann_len, 2.0, 1e-14);  // both lips
    EXPECT_NEAR(dirichlet_len, 8.0, 1e-14);
}

TEST(Mesh, SlitLocateUsesSideHint)
{
    const Mesh m = Mesh::slit();
    const auto below = m.locate({-0.5, 0.0}, Side::Below);
    const auto above = m.locate({-0.5, 0.0}, Side::Above);
    ASSERT_TRUE(below && above);
    EXPECT_NE(below->cell, above->cell);
    EXPECT_LT(m.centroid(below->cell).y, 0.0);
    EXPECT_GT(m.centroid(above->cell).y, 0.0);
    EXPECT_EQ(m.cell_side(below->cell), Side::Below);
}

TEST(Mesh, LocateSmallestIdOnInterface)
{
    const Mesh m = Mesh::unit_square(2);
    const auto hit = m.locate({0.5, 0.5});
    ASSERT_TRUE(hit);
    EXPECT_EQ(hit->cell, m.active_cells().front());
    EXPECT_EQ(m.locate_all({0.5, 0.5}).size(), 4u);
}

TEST(Mesh, DistortZeroIsIdentity)
{
    const Mesh m = Mesh::unit_square(4);
    const Mesh d = m.distorted(0.0, 7);
    ASSERT_EQ(d.n_vertices(), m.n_vertices());
    for (VertexId v = 0; v < m.n_vertices(); ++v) EXPECT_EQ(d.vertex(v), m.vertex(v));
}

TEST(Mesh, DistortDeterministicAndValid)
{
    const Mesh m = Mesh::unit_square(16);
    const Mesh a = m.distorted(0.2, 42);
    const Mesh b = m.distorted(0.2, 42);
    const Mesh c = m.distorted(0.2, 43);
    bool differs = false;
    for (VertexId v = 0; v < m.n_vertices(); ++v) {
        EXPECT_EQ(a.vertex(v), b.vertex(v));
        differs = differs || !(a.vertex(v) == c.vertex(v));
        if (m.is_boundary_vertex(v)) {
            EXPECT_EQ(a.vertex(v), m.vertex(v));
        } else {
            EXPECT_LE(std::abs(a.vertex(v).x - m.vertex(v).x), 0.2 / 16 + 1e-15);
            EXPECT_LE(std::abs(a.vertex(v).y - m.vertex(v).y), 0.2 / 16 + 1e-15);
        }
    }
    EXPECT_TRUE(differs);
    EXPECT_GT(a.min_corner_jacobian(), 0.0);
    EXPECT_NEAR(a.domain_area(), 1.0, 1e-12);
}

TEST(Mesh, DistortRejectsInversion)
{
    EXPECT_THROW((void)Mesh::unit_square(8).distorted(0.499, 1).distorted(0.499, 2).distorted(0.499, 3),
                 DistortionInvertsCell);
}

TEST(Mesh, RefineExamples)
{
    const Mesh m = Mesh::unit_square(2);
    EXPECT_EQ(m.refined({}).n_active(), 4);

    EXPECT_EQ(Mesh::unit_square(1).refined({0}).n_active(), 4);

    const Mesh r = m.refined({m.active_cells()[0]});
    EXPECT_EQ(r.n_active(), 7);
    EXPECT_EQ(r.hanging_edges().size(), 2u);
    for (const auto& h : r.hanging_edges()) {
        const Point mid = 0.5 * (r.vertex(h.a) + r.vertex(h.b));
        EXPECT_EQ(r.vertex(h.mid), mid);
    }
    EXPECT_TRUE(r.is_one_irregular());
    EXPECT_NEAR(r.domain_area(), 1.0, 1e-14);
}

TEST(Mesh, RefineClosureKeepsOneIrregular)
{
    std::mt19937 rng(5);
    Mesh m = Mesh::unit_square(2);
    for (int step = 0; step < 6; ++step) {
        // always mark the cell touching the origin plus a random one
        const auto loc = m.locate({1e-9, 1e-9});
        ASSERT_TRUE(loc);
        CellMarks marks{loc->cell};
        std::uniform_int_distribution<int> pick(0, m.n_active() - 1);
        marks.push_back(m.active_cells()[pick(rng)]);
        const int before = m.n_active();
        m = m.refined(marks);
        EXPECT_GT(m.n_active(), before);
        EXPECT_TRUE(m.is_one_irregular());
        EXPECT_NEAR(m.domain_area(), 1.0, 1e-13);
        for (const auto& h : m.hanging_edges()) {
            const Point mid = 0.5 * (m.vertex(h.a) + m.vertex(h.b));
            EXPECT_EQ(m.vertex(h.mid), mid);
        }
    }
    EXPECT_EQ(m.max_level(), 6);
}

TEST(Mesh, RefineGloballyCounts)
{
    const Mesh m = Mesh::cheese().refined_globally(2);
    EXPECT_EQ(m.n_active(), 21 * 16);
    EXPECT_TRUE(m.hanging_edges().empty());
    // 21x21 grid points minus the 3x3 interior points of each hole
    EXPECT_EQ(active_vertices(m).size(), 441u - 36u);
}

TEST(Mesh, SiblingSmoothingRefinesWholeFamily)
{
    const Mesh base = Mesh::unit_square(1).refined_globally(1);
    const CellId c = base.active_cells()[0];
    const Mesh plain = base.refined({c});
    const Mesh smooth = base.refined({c}, {.sibling_groups = true, .unrefined_islands = false});
    EXPECT_EQ(plain.n_active(), 7);
    EXPECT_EQ(smooth.n_active(), 16);
}

TEST(Mesh, VertexCellsConsistent)
{
    const Mesh m = Mesh::slit().refined_globally(1);
    std::map<VertexId, int> counts;
    for (CellId c : m.active_cells())
        for (VertexId v : m.cell(c).vertices) ++counts[v];
    for (const auto& [v, n] : counts) EXPECT_EQ(static_cast<int>(m.vertex_cells(v).size()), n);
}
