#pragma once

#include <span>
#include <utility>
#include <vector>

namespace mgdwr {

/// Affine constraints x_i = sum_j w_ij x_j + g_i. After close() no master
/// is itself constrained.
class ConstraintSet {
public:
    struct Line {
        std::vector<std::pair<int, double>> entries;
        double inhomogeneity{0.0};
    };

    ConstraintSet() = default;
    explicit ConstraintSet(int n_dofs);

    /// Adds a homogeneous linear constraint (hanging nodes).
    void add_line(int dof, std::vector<std::pair<int, double>> entries);
    /// Fixes a DOF to a value. Throws ConflictingConstraints if the DOF is
    /// already fixed to a value differing by more than 1e-12.
    void add_fixed(int dof, double value);
    /// Substitutes chained constraints so that masters are unconstrained.
    void close();

    [[nodiscard]] int n_dofs() const { return static_cast<int>(index_.size()); }
    [[nodiscard]] std::size_t n_constraints() const { return lines_.size(); }
    [[nodiscard]] bool is_constrained(int dof) const { return index_[dof] >= 0; }
    [[nodiscard]] const Line& line(int dof) const { return lines_[index_[dof]]; }
    [[nodiscard]] std::span<const int> constrained_dofs() const { return dofs_; }
    [[nodiscard]] bool is_closed() const { return closed_; }

    void distribute(std::span<double> x) const;
    void distribute_homogeneous(std::span<double> x) const;
    void zero_constrained(std::span<double> x) const;
    /// Copy with every inhomogeneity set to zero.
    [[nodiscard]] ConstraintSet homogenized() const;

    /// Maps a global DOF to the unconstrained DOFs it scatters into:
    /// itself with weight 1, or its masters.
    template <typename F>
    void for_each_target(int dof, F&& f) const
    {
        const int li = index_[dof];
        if (li < 0) {
            f(dof, 1.0);
            return;
        }
        for (const auto& [m, w] : lines_[li].entries) f(m, w);
    }

private:
    void resolve(int li, std::vector<char>& state);

    std::vector<int> index_;
    std::vector<int> dofs_;
    std::vector<Line> lines_;
    std::vector<char> fixed_;
    bool closed_{true};
};

}  // namespace mgdwr
