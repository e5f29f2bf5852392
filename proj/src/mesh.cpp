#include "mgdwr/mesh.hpp"

#include "mgdwr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

namespace mgdwr {

namespace {

constexpr double kRefTolerance = 1e-10;

bool inside_reference(const Point& r, double tol)
{
    return r.x >= -tol && r.x <= 1.0 + tol && r.y >= -tol && r.y <= 1.0 + tol;
}

Point clamp_reference(const Point& r)
{
    return {std::clamp(r.x, 0.0, 1.0), std::clamp(r.y, 0.0, 1.0)};
}

// Uniform double in [0,1) from the top 53 bits, so results do not depend on
// the standard library's distribution implementation.
double unit_uniform(std::mt19937_64& gen)
{
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

Mesh Mesh::from_cells(std::vector<Point> vertices, std::vector<Side> sides,
                      const std::vector<std::array<VertexId, 4>>& cells, const BoundaryTagger& tagger)
{
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.sides_ = std::move(sides);
    if (m.sides_.empty()) m.sides_.assign(m.vertices_.size(), Side::None);
    if (m.sides_.size() != m.vertices_.size()) throw std::invalid_argument("vertex side list has wrong length");

    std::unordered_map<EdgeKey, int> multiplicity;
    for (const auto& vs : cells) {
        Cell c;
        c.vertices = vs;
        m.cells_.push_back(c);
        for (const auto& ec : kEdgeCorners) ++multiplicity[edge_key(vs[ec[0]], vs[ec[1]])];
    }
    for (const auto& vs : cells) {
        for (const auto& ec : kEdgeCorners) {
            const VertexId a = vs[ec[0]];
            const VertexId b = vs[ec[1]];
            const EdgeKey key = edge_key(a, b);
            if (m.edges_.count(key)) continue;
            BoundaryTag tag = kInteriorTag;
            if (multiplicity[key] == 1) tag = tagger ? tagger(m.vertices_[a], m.vertices_[b]) : kDirichletTag;
            m.add_edge(a, b, kNoEdge, tag);
        }
    }
    m.build_topology();
    if (m.min_corner_jacobian() <= 0.0) throw std::invalid_argument("root cell with non-positive Jacobian");
    return m;
}

Mesh Mesh::unit_square(int n)
{
    if (n < 1) throw std::invalid_argument("unit_square needs n >= 1");
    std::vector<Point> verts;
    verts.reserve(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int j = 0; j <= n; ++j)
        for (int i = 0; i <= n; ++i)
            verts.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    std::vector<std::array<VertexId, 4>> cells;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int v0 = j * (n + 1) + i;
            cells.push_back({v0, v0 + 1, v0 + n + 1, v0 + n + 2});
        }
    return from_cells(std::move(verts), {}, cells);
}

Mesh Mesh::cheese()
{
    std::vector<Point> verts;
    for (int j = 0; j <= 5; ++j)
        for (int i = 0; i <= 5; ++i) verts.push_back({static_cast<double>(i), static_cast<double>(j)});
    auto is_hole = [](int i, int j) { return (i == 1 || i == 3) && (j == 1 || j == 3); };
    std::vector<std::array<VertexId, 4>> cells;
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i) {
            if (is_hole(i, j)) continue;
            const int v0 = j * 6 + i;
            cells.push_back({v0, v0 + 1, v0 + 6, v0 + 7});
        }
    return from_cells(std::move(verts), {}, cells);
}

Mesh Mesh::slit()
{
    // 0..2 bottom row, 3 = (-1,0) lower lip, 4 = tip, 5 = (1,0),
    // 6 = (-1,0) upper lip, 7..9 top row.
    std::vector<Point> verts{{-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {0, 0},
                             {1, 0},   {-1, 0}, {-1, 1}, {0, 1},  {1, 1}};
    std::vector<Side> sides(verts.size(), Side::None);
    sides[3] = Side::Below;
    sides[6] = Side::Above;
    const std::vector<std::array<VertexId, 4>> cells{{0, 1, 3, 4}, {1, 2, 4, 5}, {6, 4, 7, 8}, {4, 5, 8, 9}};
    auto tagger = [](const Point& a, const Point& b) {
        const bool on_slit = a.y == 0.0 && b.y == 0.0 && a.x <= 0.0 && b.x <= 0.0;
        return on_slit ? kNeumannTag : kDirichletTag;
    };
    return from_cells(std::move(verts), std::move(sides), cells, tagger);
}

void Mesh::add_edge(VertexId a, VertexId b, EdgeKey parent, BoundaryTag tag)
{
    auto [it, inserted] = edges_.try_emplace(edge_key(a, b));
    if (inserted) {
        it->second.parent = parent;
        it->second.tag = tag;
    }
}

VertexId Mesh::midpoint_of(VertexId a, VertexId b)
{
    const EdgeKey key = edge_key(a, b);
    EdgeRecord& rec = edges_.at(key);
    if (rec.mid != kNoVertex) return rec.mid;

    const Point pa = vertices_[a];
    const Point pb = vertices_[b];
    const Point mid{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
    Side side = Side::None;
    if (mid.y == 0.0) side = sides_[a] != Side::None ? sides_[a] : sides_[b];

    const auto id = static_cast<VertexId>(vertices_.size());
    vertices_.push_back(mid);
    sides_.push_back(side);
    rec.mid = id;
    const BoundaryTag tag = rec.tag;
    add_edge(a, id, key, tag);
    add_edge(id, b, key, tag);
    return id;
}

void Mesh::split_cell(CellId c)
{
    const auto v = cells_[c].vertices;
    std::array<VertexId, 4> m{};
    for (int e = 0; e < 4; ++e) m[e] = midpoint_of(v[kEdgeCorners[e][0]], v[kEdgeCorners[e][1]]);

    Point ctr{};
    for (VertexId vi : v) ctr += vertices_[vi];
    ctr *= 0.25;
    const auto center = static_cast<VertexId>(vertices_.size());
    vertices_.push_back(ctr);
    sides_.push_back(Side::None);

    const std::array<std::array<VertexId, 4>, 4> child_vertices{{
        {v[0], m[2], m[0], center},
        {m[2], v[1], center, m[1]},
        {m[0], center, v[2], m[3]},
        {center, m[1], m[3], v[3]},
    }};
    for (int i = 0; i < 4; ++i) {
        Cell child;
        child.vertices = child_vertices[i];
        child.level = cells_[c].level + 1;
        child.parent = c;
        cells_[c].children[i] = static_cast<CellId>(cells_.size());
        cells_.push_back(child);
    }
    for (VertexId mv : m) add_edge(mv, center, kNoEdge, kInteriorTag);
}

void Mesh::build_topology()
{
    const auto nc = cells_.size();
    active_.clear();
    roots_.clear();
    active_index_.assign(nc, -1);
    for (std::size_t c = 0; c < nc; ++c) {
        if (cells_[c].parent == kNoCell) roots_.push_back(static_cast<CellId>(c));
        if (cells_[c].is_active()) {
            active_index_[c] = static_cast<int>(active_.size());
            active_.push_back(static_cast<CellId>(c));
        }
    }

    owners_.clear();
    for (CellId c : active_) {
        const auto& vs = cells_[c].vertices;
        for (const auto& ec : kEdgeCorners) {
            auto [it, inserted] = owners_.try_emplace(edge_key(vs[ec[0]], vs[ec[1]]),
                                                      std::array<CellId, 2>{kNoCell, kNoCell});
            auto& slot = it->second;
            (slot[0] == kNoCell ? slot[0] : slot[1]) = c;
        }
    }

    hanging_.clear();
    boundary_faces_.clear();
    boundary_vertex_.assign(vertices_.size(), 0);
    for (CellId c : active_) {
        const auto& vs = cells_[c].vertices;
        for (int e = 0; e < 4; ++e) {
            const VertexId a = vs[kEdgeCorners[e][0]];
            const VertexId b = vs[kEdgeCorners[e][1]];
            const EdgeRecord& rec = edges_.at(edge_key(a, b));
            if (rec.tag != kInteriorTag) {
                boundary_faces_.push_back({c, e, rec.tag});
                boundary_vertex_[a] = 1;
                boundary_vertex_[b] = 1;
            }
            else if (rec.mid != kNoVertex && owners_.count(edge_key(a, rec.mid))) {
                hanging_.push_back({c, e, a, b, rec.mid});
            }
        }
    }

    vertex_cell_offsets_.assign(vertices_.size() + 1, 0);
    for (CellId c : active_)
        for (VertexId v : cells_[c].vertices) ++vertex_cell_offsets_[v + 1];
    for (std::size_t i = 0; i < vertices_.size(); ++i) vertex_cell_offsets_[i + 1] += vertex_cell_offsets_[i];
    vertex_cell_list_.assign(static_cast<std::size_t>(vertex_cell_offsets_.back()), kNoCell);
    std::vector<int> fill(vertex_cell_offsets_.begin(), vertex_cell_offsets_.end() - 1);
    for (CellId c : active_)
        for (VertexId v : cells_[c].vertices) vertex_cell_list_[fill[v]++] = c;
}

std::vector<CellId> Mesh::refinement_closure(const CellMarks& marks, const RefinementSmoothing& smoothing) const
{
    std::vector<char> flag(cells_.size(), 0);
    for (CellId c : marks) {
        if (c < 0 || c >= n_cells() || !cells_[c].is_active())
            throw std::invalid_argument("cell " + std::to_string(c) + " is not an active cell");
        flag[c] = 1;
    }

    auto coarser_owner = [&](const EdgeRecord& rec) -> CellId {
        if (rec.parent == kNoEdge) return kNoCell;
        const auto it = owners_.find(rec.parent);
        return it == owners_.end() ? kNoCell : it->second[0];
    };

    bool changed = true;
    while (changed) {
        changed = false;
        auto set_flag = [&](CellId c) {
            if (!flag[c]) {
                flag[c] = 1;
                changed = true;
            }
        };

        if (smoothing.sibling_groups) {
            for (CellId c : active_) {
                if (!flag[c] || cells_[c].parent == kNoCell) continue;
                for (CellId s : cells_[cells_[c].parent].children)
                    if (cells_[s].is_active()) set_flag(s);
            }
        }

        if (smoothing.unrefined_islands) {
            for (CellId c : active_) {
                if (flag[c]) continue;
                int total = 0;
                int refined = 0;
                const auto& vs = cells_[c].vertices;
                for (const auto& ec : kEdgeCorners) {
                    const VertexId a = vs[ec[0]];
                    const VertexId b = vs[ec[1]];
                    const EdgeKey key = edge_key(a, b);
                    const EdgeRecord& rec = edges_.at(key);
                    if (rec.tag != kInteriorTag) continue;
                    if (rec.mid != kNoVertex && owners_.count(edge_key(a, rec.mid))) {
                        ++total;
                        ++refined;
                        continue;
                    }
                    const auto& own = owners_.at(key);
                    CellId other = own[0] == c ? own[1] : own[0];
                    if (other == kNoCell) other = coarser_owner(rec);
                    if (other == kNoCell) continue;
                    ++total;
                    refined += flag[other] ? 1 : 0;
                }
                if (2 * refined > total) set_flag(c);
            }
        }

        for (CellId c : active_) {
            if (!flag[c]) continue;
            const auto& vs = cells_[c].vertices;
            for (const auto& ec : kEdgeCorners) {
                const EdgeRecord& rec = edges_.at(edge_key(vs[ec[0]], vs[ec[1]]));
                const CellId q = coarser_owner(rec);
                if (q != kNoCell) set_flag(q);
            }
        }
    }

    std::vector<CellId> out;
    for (CellId c : active_)
        if (flag[c]) out.push_back(c);
    return out;
}

Mesh Mesh::refined(const CellMarks& marks, const RefinementSmoothing& smoothing) const
{
    const auto to_split = refinement_closure(marks, smoothing);
    Mesh out = *this;
    for (CellId c : to_split) out.split_cell(c);
    out.build_topology();
    return out;
}

Mesh Mesh::refined_globally(int times) const
{
    Mesh out = *this;
    for (int t = 0; t < times; ++t) {
        const std::vector<CellId> all(out.active_.begin(), out.active_.end());
        out = out.refined(all);
    }
    return out;
}

void Mesh::flatten()
{
    std::vector<Cell> cells;
    cells.reserve(active_.size());
    for (CellId c : active_) {
        Cell root;
        root.vertices = cells_[c].vertices;
        cells.push_back(root);
    }
    cells_ = std::move(cells);
    build_topology();
}

Mesh Mesh::distorted(double factor, std::uint64_t seed) const
{
    if (!(factor >= 0.0 && factor < 0.5)) throw std::invalid_argument("distortion factor must lie in [0, 0.5)");
    Mesh out = *this;
    if (out.n_active() != out.n_cells()) out.flatten();

    const auto nv = out.vertices_.size();
    std::vector<double> h_min(nv, std::numeric_limits<double>::infinity());
    for (CellId c : out.active_) {
        const auto& vs = out.cells_[c].vertices;
        for (const auto& ec : kEdgeCorners) {
            const double len = norm(out.vertices_[vs[ec[0]]] - out.vertices_[vs[ec[1]]]);
            h_min[vs[ec[0]]] = std::min(h_min[vs[ec[0]]], len);
            h_min[vs[ec[1]]] = std::min(h_min[vs[ec[1]]], len);
        }
    }
    std::vector<char> hanging(nv, 0);
    for (const auto& h : out.hanging_) hanging[h.mid] = 1;

    std::mt19937_64 gen(seed);
    for (std::size_t v = 0; v < nv; ++v) {
        if (out.boundary_vertex_[v] || hanging[v] || !std::isfinite(h_min[v])) continue;
        const double dx = (2.0 * unit_uniform(gen) - 1.0) * factor * h_min[v];
        const double dy = (2.0 * unit_uniform(gen) - 1.0) * factor * h_min[v];
        out.vertices_[v] += Vec2{dx, dy};
    }
    // Hanging vertices stay at the midpoint of their coarse edge.
    for (std::size_t pass = 0; pass < out.hanging_.size() + 1; ++pass) {
        bool moved = false;
        for (const auto& h : out.hanging_) {
            const Point mid = 0.5 * (out.vertices_[h.a] + out.vertices_[h.b]);
            if (!(mid == out.vertices_[h.mid])) {
                out.vertices_[h.mid] = mid;
                moved = true;
            }
        }
        if (!moved) break;
    }

    if (out.min_corner_jacobian() <= 0.0) throw DistortionInvertsCell("distortion produced a non-positive cell Jacobian");
    return out;
}

int Mesh::max_level() const
{
    int lvl = 0;
    for (CellId c : active_) lvl = std::max(lvl, cells_[c].level);
    return lvl;
}

Point Mesh::map(CellId c, const Point& r) const
{
    const auto& vs = cells_[c].vertices;
    const Point& p0 = vertices_[vs[0]];
    const Point& p1 = vertices_[vs[1]];
    const Point& p2 = vertices_[vs[2]];
    const Point& p3 = vertices_[vs[3]];
    return (1 - r.x) * (1 - r.y) * p0 + r.x * (1 - r.y) * p1 + (1 - r.x) * r.y * p2 + r.x * r.y * p3;
}

Mat2 Mesh::jacobian(CellId c, const Point& r) const
{
    const auto& vs = cells_[c].vertices;
    const Point& p0 = vertices_[vs[0]];
    const Point& p1 = vertices_[vs[1]];
    const Point& p2 = vertices_[vs[2]];
    const Point& p3 = vertices_[vs[3]];
    const Vec2 dxi = (1 - r.y) * (p1 - p0) + r.y * (p3 - p2);
    const Vec2 deta = (1 - r.x) * (p2 - p0) + r.x * (p3 - p1);
    return {dxi.x, deta.x, dxi.y, deta.y};
}

Side Mesh::cell_side(CellId c) const
{
    for (VertexId v : cells_[c].vertices)
        if (sides_[v] != Side::None) return sides_[v];
    return Side::None;
}

const EdgeRecord* Mesh::edge(VertexId a, VertexId b) const
{
    const auto it = edges_.find(edge_key(a, b));
    return it == edges_.end() ? nullptr : &it->second;
}

std::span<const CellId> Mesh::vertex_cells(VertexId v) const
{
    const auto begin = static_cast<std::size_t>(vertex_cell_offsets_[v]);
    const auto end = static_cast<std::size_t>(vertex_cell_offsets_[v + 1]);
    return std::span<const CellId>(vertex_cell_list_).subspan(begin, end - begin);
}

std::vector<CellId> Mesh::edge_owners(VertexId a, VertexId b) const
{
    std::vector<CellId> out;
    const auto it = owners_.find(edge_key(a, b));
    if (it == owners_.end()) return out;
    for (CellId c : it->second)
        if (c != kNoCell) out.push_back(c);
    return out;
}

std::vector<CellPoint> Mesh::locate_all(const Point& p) const
{
    std::vector<CellPoint> found;
    auto descend = [&](auto&& self, CellId c, const Point& r) -> void {
        if (cells_[c].is_active()) {
            found.push_back({c, clamp_reference(r)});
            return;
        }
        for (int i = 0; i < 4; ++i) {
            const Point rc{2.0 * r.x - (i & 1), 2.0 * r.y - (i >> 1)};
            if (inside_reference(rc, kRefTolerance)) self(self, cells_[c].children[i], rc);
        }
    };

    for (CellId root : roots_) {
        const auto& vs = cells_[root].vertices;
        double xmin = vertices_[vs[0]].x, xmax = xmin, ymin = vertices_[vs[0]].y, ymax = ymin;
        for (VertexId v : vs) {
            xmin = std::min(xmin, vertices_[v].x);
            xmax = std::max(xmax, vertices_[v].x);
            ymin = std::min(ymin, vertices_[v].y);
            ymax = std::max(ymax, vertices_[v].y);
        }
        const double pad = 1e-9 * std::max(xmax - xmin, ymax - ymin);
        if (p.x < xmin - pad || p.x > xmax + pad || p.y < ymin - pad || p.y > ymax + pad) continue;

        Point r{0.5, 0.5};
        for (int it = 0; it < 50; ++it) {
            const Vec2 res = map(root, r) - p;
            const Vec2 step = jacobian(root, r).inverse() * res;
            r -= step;
            if (std::abs(step.x) + std::abs(step.y) < 1e-15) break;
        }
        if (inside_reference(r, kRefTolerance)) descend(descend, root, r);
    }
    return found;
}

std::optional<CellPoint> Mesh::locate(const Point& p, Side side) const
{
    auto candidates = locate_all(p);
    if (candidates.empty()) return std::nullopt;
    if (side != Side::None) {
        std::vector<CellPoint> sided;
        for (const auto& cp : candidates)
            if (cell_side(cp.cell) == side) sided.push_back(cp);
        if (!sided.empty()) candidates = std::move(sided);
    }
    return *std::min_element(candidates.begin(), candidates.end(),
                             [](const CellPoint& a, const CellPoint& b) { return a.cell < b.cell; });
}

bool Mesh::is_one_irregular() const
{
    for (const auto& h : hanging_) {
        for (const auto& [x, y] : {std::pair{h.a, h.mid}, std::pair{h.mid, h.b}}) {
            const EdgeRecord& sub = edges_.at(edge_key(x, y));
            if (sub.mid != kNoVertex && owners_.count(edge_key(x, sub.mid))) return false;
        }
    }
    return true;
}

double Mesh::min_corner_jacobian() const
{
    double m = std::numeric_limits<double>::infinity();
    for (CellId c : active_)
        for (const Point r : {Point{0, 0}, Point{1, 0}, Point{0, 1}, Point{1, 1}})
            m = std::min(m, jacobian(c, r).det());
    return m;
}

double Mesh::domain_area() const
{
    double a = 0.0;
    for (CellId c : active_) a += jacobian(c, {0.5, 0.5}).det();
    return a;
}

}  // namespace mgdwr
