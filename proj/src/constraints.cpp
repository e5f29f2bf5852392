#include "mgdwr/constraints.hpp"

#include "mgdwr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mgdwr {

namespace {
constexpr double kConflictTolerance = 1e-12;
}

ConstraintSet::ConstraintSet(int n_dofs) : index_(static_cast<std::size_t>(n_dofs), -1) {}

void ConstraintSet::add_line(int dof, std::vector<std::pair<int, double>> entries)
{
    if (index_[dof] >= 0) {
        if (fixed_[index_[dof]]) return;  // boundary values win over hanging interpolation
        throw ConflictingConstraints("dof " + std::to_string(dof) + " constrained twice");
    }
    index_[dof] = static_cast<int>(lines_.size());
    dofs_.push_back(dof);
    lines_.push_back({std::move(entries), 0.0});
    fixed_.push_back(0);
    closed_ = false;
}

void ConstraintSet::add_fixed(int dof, double value)
{
    const int li = index_[dof];
    if (li >= 0) {
        if (fixed_[li]) {
            if (std::abs(lines_[li].inhomogeneity - value) > kConflictTolerance)
                throw ConflictingConstraints("dof " + std::to_string(dof) + " fixed to " +
                                             std::to_string(lines_[li].inhomogeneity) + " and " +
                                             std::to_string(value));
            return;
        }
        lines_[li] = {{}, value};
        fixed_[li] = 1;
        return;
    }
    index_[dof] = static_cast<int>(lines_.size());
    dofs_.push_back(dof);
    lines_.push_back({{}, value});
    fixed_.push_back(1);
}

void ConstraintSet::resolve(int li, std::vector<char>& state)
{
    if (state[li] == 2) return;
    if (state[li] == 1) throw ConflictingConstraints("cyclic constraint chain");
    state[li] = 1;
    Line& ln = lines_[li];
    std::vector<std::pair<int, double>> out;
    double inhom = ln.inhomogeneity;
    for (const auto& [m, w] : ln.entries) {
        const int mi = index_[m];
        if (mi < 0) {
            out.emplace_back(m, w);
            continue;
        }
        resolve(mi, state);
        const Line& ml = lines_[mi];
        inhom += w * ml.inhomogeneity;
        for (const auto& [mm, ww] : ml.entries) out.emplace_back(mm, w * ww);
    }
    std::sort(out.begin(), out.end());
    std::vector<std::pair<int, double>> merged;
    for (const auto& e : out) {
        if (!merged.empty() && merged.back().first == e.first)
            merged.back().second += e.second;
        else
            merged.push_back(e);
    }
    std::erase_if(merged, [](const auto& e) { return e.second == 0.0; });
    lines_[li].entries = std::move(merged);
    lines_[li].inhomogeneity = inhom;
    state[li] = 2;
}

void ConstraintSet::close()
{
    std::vector<char> state(lines_.size(), 0);
    for (std::size_t li = 0; li < lines_.size(); ++li) resolve(static_cast<int>(li), state);
    closed_ = true;
}

void ConstraintSet::distribute(std::span<double> x) const
{
    for (std::size_t li = 0; li < lines_.size(); ++li) {
        double v = lines_[li].inhomogeneity;
        for (const auto& [m, w] : lines_[li].entries) v += w * x[m];
        x[dofs_[li]] = v;
    }
}

void ConstraintSet::distribute_homogeneous(std::span<double> x) const
{
    for (std::size_t li = 0; li < lines_.size(); ++li) {
        double v = 0.0;
        for (const auto& [m, w] : lines_[li].entries) v += w * x[m];
        x[dofs_[li]] = v;
    }
}

void ConstraintSet::zero_constrained(std::span<double> x) const
{
    for (int d : dofs_) x[d] = 0.0;
}

ConstraintSet ConstraintSet::homogenized() const
{
    ConstraintSet out = *this;
    for (auto& ln : out.lines_) ln.inhomogeneity = 0.0;
    return out;
}

}  // namespace mgdwr
