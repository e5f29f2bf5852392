#include "mgdwr/fespace.hpp"

#include "mgdwr/errors.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace mgdwr {

namespace {

constexpr double kDropWeight = 1e-13;

Side edge_node_side(const Mesh& mesh, VertexId a, VertexId b)
{
    if (mesh.vertex(a).y != 0.0 || mesh.vertex(b).y != 0.0) return Side::None;
    if (mesh.vertex_side(a) != Side::None) return mesh.vertex_side(a);
    return mesh.vertex_side(b);
}

}  // namespace

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree, int n_components, int n_quad)
    : mesh_(std::move(mesh)),
      degree_(degree),
      n_components_(n_components),
      n_quad_(n_quad > 0 ? n_quad : degree + 3),
      basis_(degree)
{
    if (n_components < 1 || n_components > kMaxComponents)
        throw std::invalid_argument("unsupported number of components");
    const Mesh& m = *mesh_;
    const int r = degree_;
    const int n1 = r + 1;
    const int npc = nodes_per_cell();

    std::vector<int> vertex_node(static_cast<std::size_t>(m.n_vertices()), -1);
    std::unordered_map<EdgeKey, std::vector<int>> edge_nodes;
    cell_node_list_.assign(static_cast<std::size_t>(m.n_active() * npc), -1);

    auto new_node = [&](const Point& p, Side s, VertexId v) {
        node_points_.push_back(p);
        node_sides_.push_back(s);
        node_vertex_.push_back(v);
        return static_cast<int>(node_points_.size()) - 1;
    };

    for (CellId c : m.active_cells()) {
        const auto& vs = m.cell(c).vertices;
        int* out = &cell_node_list_[static_cast<std::size_t>(m.active_index(c) * npc)];
        for (int j = 0; j <= r; ++j)
            for (int i = 0; i <= r; ++i) {
                const int k = i + n1 * j;
                const bool edge_i = i == 0 || i == r;
                const bool edge_j = j == 0 || j == r;
                if (edge_i && edge_j) {
                    const VertexId v = vs[(i == r ? 1 : 0) + (j == r ? 2 : 0)];
                    if (vertex_node[v] < 0) vertex_node[v] = new_node(m.vertex(v), m.vertex_side(v), v);
                    out[k] = vertex_node[v];
                }
                else if (edge_i || edge_j) {
                    int e = 0;
                    int pos = 0;
                    if (i == 0) { e = 0; pos = j; }
                    else if (i == r) { e = 1; pos = j; }
                    else if (j == 0) { e = 2; pos = i; }
                    else { e = 3; pos = i; }
                    const VertexId a = vs[kEdgeCorners[e][0]];
                    const VertexId b = vs[kEdgeCorners[e][1]];
                    const int idx = a < b ? pos : r - pos;
                    auto& slots = edge_nodes[edge_key(a, b)];
                    if (slots.empty()) slots.assign(static_cast<std::size_t>(r - 1), -1);
                    int& slot = slots[static_cast<std::size_t>(idx - 1)];
                    if (slot < 0) slot = new_node(m.map(c, local_node_point(k)), edge_node_side(m, a, b), kNoVertex);
                    out[k] = slot;
                }
                else {
                    out[k] = new_node(m.map(c, local_node_point(k)), Side::None, kNoVertex);
                }
            }
    }

    // Hanging nodes: fine-side nodes interpolate the coarse edge trace.
    hanging_ = ConstraintSet(n_dofs());
    auto fine_edge_node = [&](VertexId a, VertexId b, int pos) -> int {
        if (pos == 0) return vertex_node[a];
        if (pos == r) return vertex_node[b];
        const auto it = edge_nodes.find(edge_key(a, b));
        if (it == edge_nodes.end()) throw std::logic_error("missing fine edge on hanging face");
        return it->second[static_cast<std::size_t>((a < b ? pos : r - pos) - 1)];
    };
    for (const auto& h : m.hanging_edges()) {
        const auto locals = edge_local_nodes(h.local_edge);
        const auto coarse = cell_nodes(h.coarse_cell);
        std::vector<int> masters;
        for (int k : locals) masters.push_back(coarse[k]);

        auto constrain = [&](int node, double t) {
            std::vector<std::pair<int, double>> entries;
            for (int k = 0; k <= r; ++k) {
                const double w = basis_.value(k, t);
                if (std::abs(w) > kDropWeight) entries.emplace_back(masters[k], w);
            }
            for (int comp = 0; comp < n_components_; ++comp) {
                std::vector<std::pair<int, double>> ce;
                for (const auto& [mn, w] : entries) ce.emplace_back(dof(mn, comp), w);
                hanging_.add_line(dof(node, comp), std::move(ce));
            }
        };
        constrain(vertex_node[h.mid], 0.5);
        for (int pos = 1; pos < r; ++pos) {
            constrain(fine_edge_node(h.a, h.mid, pos), 0.5 * pos / r);
            constrain(fine_edge_node(h.mid, h.b, pos), 0.5 + 0.5 * pos / r);
        }
    }
    hanging_.close();
}

std::span<const int> FeSpace::cell_nodes(CellId c) const
{
    const int ai = mesh_->active_index(c);
    if (ai < 0) throw std::invalid_argument("cell_nodes on inactive cell");
    const auto npc = static_cast<std::size_t>(nodes_per_cell());
    return std::span<const int>(cell_node_list_).subspan(static_cast<std::size_t>(ai) * npc, npc);
}

void FeSpace::cell_dofs(CellId c, std::vector<int>& out) const
{
    const auto nodes = cell_nodes(c);
    out.resize(nodes.size() * static_cast<std::size_t>(n_components_));
    std::size_t i = 0;
    for (int n : nodes)
        for (int comp = 0; comp < n_components_; ++comp) out[i++] = dof(n, comp);
}

std::vector<int> FeSpace::edge_local_nodes(int local_edge) const
{
    const int r = degree_;
    const int n1 = r + 1;
    std::vector<int> out;
    for (int pos = 0; pos <= r; ++pos) {
        switch (local_edge) {
        case 0: out.push_back(n1 * pos); break;
        case 1: out.push_back(r + n1 * pos); break;
        case 2: out.push_back(pos); break;
        default: out.push_back(pos + n1 * r); break;
        }
    }
    return out;
}

Point FeSpace::local_node_point(int k) const
{
    const int n1 = degree_ + 1;
    return {basis_.node(k % n1), basis_.node(k / n1)};
}

double FeSpace::shape_value(int k, const Point& ref) const
{
    const int n1 = degree_ + 1;
    return basis_.value(k % n1, ref.x) * basis_.value(k / n1, ref.y);
}

Vec2 FeSpace::shape_grad(int k, const Point& ref) const
{
    const int n1 = degree_ + 1;
    const int i = k % n1;
    const int j = k / n1;
    return {basis_.derivative(i, ref.x) * basis_.value(j, ref.y), basis_.value(i, ref.x) * basis_.derivative(j, ref.y)};
}

ConstraintSet build_constraints(const FeSpace& space, const std::vector<DirichletData>& dirichlet)
{
    ConstraintSet cs = space.hanging_constraints();
    const Mesh& m = space.mesh();
    for (const auto& face : m.boundary_faces()) {
        const auto nodes = space.cell_nodes(face.cell);
        const auto locals = space.edge_local_nodes(face.local_edge);
        for (const auto& d : dirichlet) {
            if (d.tag != face.tag) continue;
            if (d.component < 0 || d.component >= space.n_components())
                throw std::invalid_argument("Dirichlet component out of range");
            for (int k : locals) {
                const int n = nodes[k];
                cs.add_fixed(space.dof(n, d.component), d.g(space.node_point(n), space.node_side(n)));
            }
        }
    }
    cs.close();
    return cs;
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FeSpace> space)
    : space_(std::move(space)), coeffs_(static_cast<std::size_t>(space_->n_dofs()), 0.0)
{
}

DiscreteFunction::DiscreteFunction(std::shared_ptr<const FeSpace> space, std::vector<double> coefficients)
    : space_(std::move(space)), coeffs_(std::move(coefficients))
{
    if (coeffs_.size() != static_cast<std::size_t>(space_->n_dofs()))
        throw std::invalid_argument("coefficient vector length does not match the space");
}

double DiscreteFunction::value(CellId c, const Point& ref, int comp) const
{
    const FeSpace& s = *space_;
    const int n1 = s.degree() + 1;
    std::array<double, 16> vx{};
    std::array<double, 16> vy{};
    s.basis().evaluate(ref.x, vx.data(), nullptr);
    s.basis().evaluate(ref.y, vy.data(), nullptr);
    const auto nodes = s.cell_nodes(c);
    double v = 0.0;
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i) v += coeffs_[s.dof(nodes[i + n1 * j], comp)] * vx[i] * vy[j];
    return v;
}

Vec2 DiscreteFunction::gradient(CellId c, const Point& ref, int comp) const
{
    const FeSpace& s = *space_;
    const int n1 = s.degree() + 1;
    std::array<double, 16> vx{}, vy{}, dx{}, dy{};
    s.basis().evaluate(ref.x, vx.data(), dx.data());
    s.basis().evaluate(ref.y, vy.data(), dy.data());
    const auto nodes = s.cell_nodes(c);
    Vec2 g{};
    for (int j = 0; j < n1; ++j)
        for (int i = 0; i < n1; ++i) {
            const double u = coeffs_[s.dof(nodes[i + n1 * j], comp)];
            g += u * Vec2{dx[i] * vy[j], vx[i] * dy[j]};
        }
    return s.mesh().jacobian(c, ref).inverse().transpose() * g;
}

double evaluate_at_point(const DiscreteFunction& f, const Point& p, int comp, Side side)
{
    const auto loc = f.space().mesh().locate(p, side);
    if (!loc) throw PointOutsideDomain("point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") is outside the mesh");
    return f.value(loc->cell, loc->ref, comp);
}

DiscreteFunction interpolate(std::shared_ptr<const FeSpace> space, const FieldFunction& f)
{
    DiscreteFunction out(space);
    const FeSpace& s = *space;
    for (int n = 0; n < s.n_nodes(); ++n)
        for (int comp = 0; comp < s.n_components(); ++comp)
            out[static_cast<std::size_t>(s.dof(n, comp))] = f(s.node_point(n), s.node_side(n), comp);
    s.hanging_constraints().distribute(out.coefficients());
    return out;
}

namespace {

// Fills every target node from `eval(cell, ref, comp)` on the first active
// cell (by id) that carries it.
template <typename Eval>
DiscreteFunction sample_nodes(std::shared_ptr<const FeSpace> target, Eval&& eval)
{
    DiscreteFunction out(target);
    const FeSpace& t = *target;
    std::vector<char> done(static_cast<std::size_t>(t.n_nodes()), 0);
    for (CellId c : t.mesh().active_cells()) {
        const auto nodes = t.cell_nodes(c);
        for (int k = 0; k < t.nodes_per_cell(); ++k) {
            const int n = nodes[k];
            if (done[n]) continue;
            done[n] = 1;
            const Point ref = t.local_node_point(k);
            for (int comp = 0; comp < t.n_components(); ++comp)
                out[static_cast<std::size_t>(t.dof(n, comp))] = eval(c, ref, comp);
        }
    }
    t.hanging_constraints().distribute(out.coefficients());
    return out;
}

}  // namespace

DiscreteFunction interpolate_between(const DiscreteFunction& source, std::shared_ptr<const FeSpace> target)
{
    if (source.space().mesh_ptr() != target->mesh_ptr())
        throw MeshMismatch("interpolation between spaces on different meshes");
    if (source.space().n_components() != target->n_components())
        throw MeshMismatch("interpolation between spaces with different component counts");
    return sample_nodes(std::move(target),
                        [&](CellId c, const Point& ref, int comp) { return source.value(c, ref, comp); });
}

DiscreteFunction transfer_to_refined(const DiscreteFunction& source, std::shared_ptr<const FeSpace> target)
{
    const Mesh& old_mesh = source.space().mesh();
    const Mesh& new_mesh = target->mesh();
    if (source.space().n_components() != target->n_components())
        throw MeshMismatch("transfer between spaces with different component counts");
    if (new_mesh.n_cells() < old_mesh.n_cells() || new_mesh.n_vertices() < old_mesh.n_vertices())
        throw MeshMismatch("target mesh is not a refinement of the source mesh");
    for (CellId c = 0; c < old_mesh.n_cells(); ++c)
        if (old_mesh.cell(c).vertices != new_mesh.cell(c).vertices)
            throw MeshMismatch("target mesh is not a refinement of the source mesh");

    return sample_nodes(std::move(target), [&](CellId c, const Point& ref, int comp) {
        CellId cc = c;
        Point r = ref;
        while (cc >= old_mesh.n_cells() || !old_mesh.cell(cc).is_active()) {
            const CellId parent = new_mesh.cell(cc).parent;
            if (parent == kNoCell) throw MeshMismatch("cell without an active ancestor in the source mesh");
            const auto& kids = new_mesh.cell(parent).children;
            int i = 0;
            while (kids[i] != cc) ++i;
            r = child_to_parent(i, r);
            cc = parent;
        }
        return source.value(cc, r, comp);
    });
}

}  // namespace mgdwr
