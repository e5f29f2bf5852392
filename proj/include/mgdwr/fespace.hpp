#pragma once

#include "mgdwr/constraints.hpp"
#include "mgdwr/mesh.hpp"
#include "mgdwr/quadrature.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mgdwr {

inline constexpr int kMaxComponents = 3;

/// Boundary data g(x, side) for one component on faces with a given tag.
/// The side hint is the lip of the slit a node sits on, None elsewhere.
struct DirichletData {
    BoundaryTag tag{kDirichletTag};
    int component{0};
    std::function<double(const Point&, Side)> g;
};

/// Continuous Q_r Lagrange space with equispaced nodes, possibly vector
/// valued with equal degree per component. DOF = node * n_components + comp.
class FeSpace {
public:
    /// `n_quad` is the Gauss points per direction used by every integral on
    /// this space; 0 selects degree + 3.
    FeSpace(std::shared_ptr<const Mesh> mesh, int degree, int n_components = 1, int n_quad = 0);

    [[nodiscard]] const Mesh& mesh() const { return *mesh_; }
    [[nodiscard]] const std::shared_ptr<const Mesh>& mesh_ptr() const { return mesh_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] int n_components() const { return n_components_; }
    [[nodiscard]] int n_quad() const { return n_quad_; }
    [[nodiscard]] int n_nodes() const { return static_cast<int>(node_points_.size()); }
    [[nodiscard]] int n_dofs() const { return n_nodes() * n_components_; }
    [[nodiscard]] int nodes_per_cell() const { return (degree_ + 1) * (degree_ + 1); }
    [[nodiscard]] int dofs_per_cell() const { return nodes_per_cell() * n_components_; }

    /// Global nodes of an active cell (by cell id), local node i + (r+1) j.
    [[nodiscard]] std::span<const int> cell_nodes(CellId c) const;
    [[nodiscard]] const Point& node_point(int node) const { return node_points_[node]; }
    [[nodiscard]] Side node_side(int node) const { return node_sides_[node]; }
    /// Mesh vertex a node sits on, kNoVertex for edge and interior nodes.
    [[nodiscard]] VertexId node_vertex(int node) const { return node_vertex_[node]; }
    [[nodiscard]] int dof(int node, int comp) const { return node * n_components_ + comp; }
    /// Global DOFs of a cell in local order k * n_components + comp.
    void cell_dofs(CellId c, std::vector<int>& out) const;

    /// Local node indices along a local edge, in the edge's corner order.
    [[nodiscard]] std::vector<int> edge_local_nodes(int local_edge) const;
    [[nodiscard]] Point local_node_point(int k) const;

    [[nodiscard]] const LagrangeBasis1D& basis() const { return basis_; }
    [[nodiscard]] double shape_value(int k, const Point& ref) const;
    [[nodiscard]] Vec2 shape_grad(int k, const Point& ref) const;

    /// Closed hanging-node constraints (no boundary data).
    [[nodiscard]] const ConstraintSet& hanging_constraints() const { return hanging_; }

private:
    std::shared_ptr<const Mesh> mesh_;
    int degree_;
    int n_components_;
    int n_quad_;
    LagrangeBasis1D basis_;
    std::vector<int> cell_node_list_;  // by active index
    std::vector<Point> node_points_;
    std::vector<Side> node_sides_;
    std::vector<VertexId> node_vertex_;
    ConstraintSet hanging_;
};

/// Hanging constraints plus nodal interpolation of the boundary data.
[[nodiscard]] ConstraintSet build_constraints(const FeSpace& space, const std::vector<DirichletData>& dirichlet);

/// Coefficient vector on a space.
class DiscreteFunction {
public:
    DiscreteFunction() = default;
    explicit DiscreteFunction(std::shared_ptr<const FeSpace> space);
    DiscreteFunction(std::shared_ptr<const FeSpace> space, std::vector<double> coefficients);

    [[nodiscard]] const FeSpace& space() const { return *space_; }
    [[nodiscard]] const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    [[nodiscard]] std::vector<double>& coefficients() { return coeffs_; }
    [[nodiscard]] const std::vector<double>& coefficients() const { return coeffs_; }
    [[nodiscard]] double& operator[](std::size_t i) { return coeffs_[i]; }
    [[nodiscard]] double operator[](std::size_t i) const { return coeffs_[i]; }

    /// Value and gradient on an active cell at reference coordinates.
    [[nodiscard]] double value(CellId c, const Point& ref, int comp = 0) const;
    [[nodiscard]] Vec2 gradient(CellId c, const Point& ref, int comp = 0) const;

private:
    std::shared_ptr<const FeSpace> space_;
    std::vector<double> coeffs_;
};

using FieldFunction = std::function<double(const Point&, Side, int comp)>;

/// Point value with the smallest-active-id rule on interfaces and the side
/// hint on the slit. Throws PointOutsideDomain.
[[nodiscard]] double evaluate_at_point(const DiscreteFunction& f, const Point& p, int comp = 0, Side side = Side::None);

/// Nodal interpolant of a closed-form field.
[[nodiscard]] DiscreteFunction interpolate(std::shared_ptr<const FeSpace> space, const FieldFunction& f);

/// Nodal interpolation into another space on the same mesh. Throws
/// MeshMismatch.
[[nodiscard]] DiscreteFunction interpolate_between(const DiscreteFunction& source,
                                                   std::shared_ptr<const FeSpace> target);

/// Carries a function to a space on a refinement of its mesh by evaluating
/// the ancestor polynomial at the new nodes. Throws MeshMismatch.
[[nodiscard]] DiscreteFunction transfer_to_refined(const DiscreteFunction& source,
                                                   std::shared_ptr<const FeSpace> target);

}  // namespace mgdwr
