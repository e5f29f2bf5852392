#pragma once

#include "mgdwr/geometry.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace mgdwr {

using VertexId = int;
using CellId = int;
using EdgeKey = std::uint64_t;
using BoundaryTag = int;

inline constexpr CellId kNoCell = -1;
inline constexpr VertexId kNoVertex = -1;
inline constexpr EdgeKey kNoEdge = ~EdgeKey{0};

inline constexpr BoundaryTag kInteriorTag = -1;
inline constexpr BoundaryTag kDirichletTag = 0;
inline constexpr BoundaryTag kNeumannTag = 1;

[[nodiscard]] constexpr EdgeKey edge_key(VertexId a, VertexId b)
{
    const auto lo = static_cast<std::uint64_t>(a < b ? a : b);
    const auto hi = static_cast<std::uint64_t>(a < b ? b : a);
    return (hi << 32) | lo;
}

/// Corner order of a cell: (0,0), (1,0), (0,1), (1,1) in reference
/// coordinates. Local edges: 0 is xi=0, 1 is xi=1, 2 is eta=0, 3 is eta=1.
inline constexpr std::array<std::array<int, 2>, 4> kEdgeCorners{{{0, 2}, {1, 3}, {0, 1}, {2, 3}}};

struct Cell {
    std::array<VertexId, 4> vertices{};
    int level{0};
    CellId parent{kNoCell};
    std::array<CellId, 4> children{kNoCell, kNoCell, kNoCell, kNoCell};

    [[nodiscard]] bool is_active() const { return children[0] == kNoCell; }
};

struct EdgeRecord {
    VertexId mid{kNoVertex};   // midpoint vertex once the edge has been split
    EdgeKey parent{kNoEdge};   // the edge this one is a half of
    BoundaryTag tag{kInteriorTag};
};

/// An edge of an active cell whose neighbours on the other side are one
/// level finer; `mid` is the hanging vertex. `a` and `b` follow the corner
/// order of the coarse cell's local edge.
struct HangingEdge {
    CellId coarse_cell{kNoCell};
    int local_edge{0};
    VertexId a{kNoVertex};
    VertexId b{kNoVertex};
    VertexId mid{kNoVertex};
};

struct BoundaryFace {
    CellId cell{kNoCell};
    int local_edge{0};
    BoundaryTag tag{kInteriorTag};
};

/// Result of locating a point: owning active cell and reference coordinates.
struct CellPoint {
    CellId cell{kNoCell};
    Point ref;
};

using CellMarks = std::vector<CellId>;

/// Extra flagging applied on top of the 1-irregular closure, mirroring the
/// smoothing flags of common FE libraries.
struct RefinementSmoothing {
    bool sibling_groups{false};     // refine all active siblings of a flagged cell
    bool unrefined_islands{false};  // refine cells most of whose neighbours get refined
};

/// Hierarchical 2D quadrilateral mesh with at most one hanging vertex per
/// edge. Values are immutable: refinement and distortion return new meshes.
class Mesh {
public:
    using BoundaryTagger = std::function<BoundaryTag(const Point& a, const Point& b)>;

    Mesh() = default;

    /// Builds a mesh from root cells. Edges owned by a single cell are
    /// boundary edges and get tagged by `tagger` (Dirichlet if empty).
    static Mesh from_cells(std::vector<Point> vertices, std::vector<Side> sides,
                           const std::vector<std::array<VertexId, 4>>& cells,
                           const BoundaryTagger& tagger = {});

    /// Uniform n x n mesh of the unit square, all boundary Dirichlet.
    static Mesh unit_square(int n);
    /// [0,5]^2 with four unit square holes (1,2)^2, (3,4)^2, (1,2)x(3,4),
    /// (3,4)x(1,2); 21 unit cells, all boundary Dirichlet.
    static Mesh cheese();
    /// (-1,1)^2 cut along (-1,0)x{0}; the slit is realized by duplicated
    /// vertices, its lips are Neumann, the outer boundary is Dirichlet.
    static Mesh slit();

    [[nodiscard]] Mesh refined(const CellMarks& marks, const RefinementSmoothing& smoothing = {}) const;
    [[nodiscard]] Mesh refined_globally(int times = 1) const;
    /// Displaces interior vertices by a uniform random vector with each
    /// component in [-factor*h, factor*h], h being the shortest edge at the
    /// vertex. The hierarchy is flattened: active cells become roots.
    [[nodiscard]] Mesh distorted(double factor, std::uint64_t seed) const;

    /// Cells that would be refined for `marks` after smoothing and closure.
    [[nodiscard]] std::vector<CellId> refinement_closure(const CellMarks& marks,
                                                         const RefinementSmoothing& smoothing) const;

    [[nodiscard]] int n_vertices() const { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] const Point& vertex(VertexId v) const { return vertices_[v]; }
    [[nodiscard]] Side vertex_side(VertexId v) const { return sides_[v]; }

    [[nodiscard]] int n_cells() const { return static_cast<int>(cells_.size()); }
    [[nodiscard]] const Cell& cell(CellId c) const { return cells_[c]; }
    [[nodiscard]] std::span<const CellId> active_cells() const { return active_; }
    [[nodiscard]] int n_active() const { return static_cast<int>(active_.size()); }
    /// Dense index of an active cell, -1 for inactive cells.
    [[nodiscard]] int active_index(CellId c) const { return active_index_[c]; }
    [[nodiscard]] int max_level() const;

    [[nodiscard]] Point map(CellId c, const Point& ref) const;
    [[nodiscard]] Mat2 jacobian(CellId c, const Point& ref) const;
    [[nodiscard]] Point centroid(CellId c) const { return map(c, {0.5, 0.5}); }
    /// Side of the slit a cell lies on (from its centroid), None off the slit.
    [[nodiscard]] Side cell_side(CellId c) const;

    [[nodiscard]] const EdgeRecord* edge(VertexId a, VertexId b) const;
    [[nodiscard]] std::span<const HangingEdge> hanging_edges() const { return hanging_; }
    [[nodiscard]] std::span<const BoundaryFace> boundary_faces() const { return boundary_faces_; }
    [[nodiscard]] bool is_boundary_vertex(VertexId v) const { return boundary_vertex_[v] != 0; }
    /// Active cells having `v` as a corner.
    [[nodiscard]] std::span<const CellId> vertex_cells(VertexId v) const;
    /// Active cells owning the edge (a,b) as one of their own edges.
    [[nodiscard]] std::vector<CellId> edge_owners(VertexId a, VertexId b) const;

    /// Finds the active cell containing `p`. On interfaces the smallest
    /// active cell id wins; on a slit, `side` picks the lip.
    [[nodiscard]] std::optional<CellPoint> locate(const Point& p, Side side = Side::None) const;
    /// All active cells whose closure contains `p`.
    [[nodiscard]] std::vector<CellPoint> locate_all(const Point& p) const;

    /// True if no active edge carries more than one hanging level.
    [[nodiscard]] bool is_one_irregular() const;
    [[nodiscard]] double min_corner_jacobian() const;
    [[nodiscard]] double domain_area() const;

private:
    void build_topology();
    void split_cell(CellId c);
    VertexId midpoint_of(VertexId a, VertexId b);
    void add_edge(VertexId a, VertexId b, EdgeKey parent, BoundaryTag tag);
    void flatten();

    std::vector<Point> vertices_;
    std::vector<Side> sides_;
    std::vector<Cell> cells_;
    std::unordered_map<EdgeKey, EdgeRecord> edges_;

    // derived topology
    std::vector<CellId> active_;
    std::vector<int> active_index_;
    std::vector<CellId> roots_;
    std::unordered_map<EdgeKey, std::array<CellId, 2>> owners_;
    std::vector<HangingEdge> hanging_;
    std::vector<BoundaryFace> boundary_faces_;
    std::vector<char> boundary_vertex_;
    std::vector<int> vertex_cell_offsets_;
    std::vector<CellId> vertex_cell_list_;
};

/// Reference coordinates of a child cell's point in its parent.
[[nodiscard]] constexpr Point child_to_parent(int child, const Point& ref)
{
    return {0.5 * ((child & 1) + ref.x), 0.5 * ((child >> 1) + ref.y)};
}

}  // namespace mgdwr
