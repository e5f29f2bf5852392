#pragma once

#include "mgdwr/constraints.hpp"
#include "mgdwr/fespace.hpp"
#include "mgdwr/linalg.hpp"
#include "mgdwr/problems.hpp"
#include "mgdwr/quadrature.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace mgdwr {

/// Shape values and physical gradients of a space on one cell.
class CellValues {
public:
    CellValues(const FeSpace& space, QuadratureRule rule);

    void reinit(CellId c);

    [[nodiscard]] int n_q() const { return rule_.size(); }
    [[nodiscard]] int n_shape() const { return n_shape_; }
    [[nodiscard]] double shape(int k, int q) const { return ref_values_[static_cast<std::size_t>(q * n_shape_ + k)]; }
    [[nodiscard]] const Vec2& grad(int k, int q) const { return grads_[static_cast<std::size_t>(q * n_shape_ + k)]; }
    [[nodiscard]] double JxW(int q) const { return jxw_[q]; }
    [[nodiscard]] const Point& point(int q) const { return points_[q]; }
    [[nodiscard]] const Point& ref_point(int q) const { return rule_.points[q]; }
    [[nodiscard]] CellId cell() const { return cell_; }

    /// Values and gradients of all components of a coefficient vector.
    void function_state(const std::vector<double>& coeffs, std::vector<PointState>& out) const;

private:
    const FeSpace* space_;
    QuadratureRule rule_;
    int n_shape_;
    CellId cell_{kNoCell};
    std::vector<double> ref_values_;
    std::vector<Vec2> ref_grads_;
    std::vector<Vec2> grads_;
    std::vector<double> jxw_;
    std::vector<Point> points_;
    std::vector<int> dofs_;
};

enum class Execution { Serial, Parallel };

/// Sparsity pattern and cell colouring of a space under a constraint set.
/// Constrained rows are identity rows; cells of one colour scatter into
/// disjoint rows, so a colour can be assembled concurrently.
class AssemblyPlan {
public:
    AssemblyPlan(std::shared_ptr<const FeSpace> space, ConstraintSet constraints);

    [[nodiscard]] const FeSpace& space() const { return *space_; }
    [[nodiscard]] const std::shared_ptr<const FeSpace>& space_ptr() const { return space_; }
    [[nodiscard]] const ConstraintSet& constraints() const { return constraints_; }
    [[nodiscard]] const SparseMatrix& pattern() const { return pattern_; }
    [[nodiscard]] const std::vector<std::vector<CellId>>& colors() const { return colors_; }

private:
    std::shared_ptr<const FeSpace> space_;
    ConstraintSet constraints_;
    SparseMatrix pattern_;
    std::vector<std::vector<CellId>> colors_;
};

/// Entry i = A(u)(phi_i) for unconstrained i, 0 for constrained i.
[[nodiscard]] Vector assemble_residual(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                       const DiscreteFunction& u, Execution exec = Execution::Parallel);

/// Entry (i,j) = A'(u)(phi_j, phi_i) after condensation.
[[nodiscard]] SparseMatrix assemble_jacobian(const ProblemDefinition& problem, const AssemblyPlan& plan,
                                             const DiscreteFunction& u, Execution exec = Execution::Parallel);

/// Scatters a full-length vector of pairings with basis functions onto the
/// unconstrained DOFs (transposed constraint distribution).
[[nodiscard]] Vector condense_vector(const std::vector<double>& raw, const ConstraintSet& constraints);

/// -A(u)(w); w may live in any space on the same mesh.
[[nodiscard]] double weighted_primal_residual(const ProblemDefinition& problem, const DiscreteFunction& u,
                                             const DiscreteFunction& w);

/// A'(u)(w, z).
[[nodiscard]] double linearized_pairing(const ProblemDefinition& problem, const DiscreteFunction& u,
                                        const DiscreteFunction& w, const DiscreteFunction& z);

/// Per node i of the scalar Q1 space `pu`: -A(u)(w psi_i), respectively
/// A'(u)(w psi_i, z). Hanging PU nodes are folded into their masters.
[[nodiscard]] Vector weighted_primal_residual_pu(const ProblemDefinition& problem, const DiscreteFunction& u,
                                                 const DiscreteFunction& w, const FeSpace& pu,
                                                 Execution exec = Execution::Parallel);
[[nodiscard]] Vector linearized_pairing_pu(const ProblemDefinition& problem, const DiscreteFunction& u,
                                           const DiscreteFunction& w, const DiscreteFunction& z, const FeSpace& pu,
                                           Execution exec = Execution::Parallel);

/// Folds values on hanging PU nodes into their masters.
void fold_hanging(const FeSpace& pu, Vector& nodal);

/// Mass matrix of a scalar space with constraints condensed.
[[nodiscard]] SparseMatrix assemble_mass(const AssemblyPlan& plan);

/// Greedy colouring such that cells of one colour have disjoint `targets`.
[[nodiscard]] std::vector<std::vector<CellId>> color_cells(
    std::span<const CellId> cells, int n_targets, const std::function<void(CellId, std::vector<int>&)>& targets);

}  // namespace mgdwr
