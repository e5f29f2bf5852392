#pragma once

#include "mgdwr/fespace.hpp"
#include "mgdwr/geometry.hpp"
#include "mgdwr/linalg.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace mgdwr {

/// Vector weight paired componentwise with u in an integral functional.
using VectorWeight = std::function<std::array<double, kMaxComponents>(const Point&)>;

struct PointTerm {
    Point x;
    Side side{Side::None};
    int component{0};
    double coeff{1.0};
};

/// Half-plane {x : normal . x + offset >= 0}.
struct HalfPlane {
    Vec2 normal;
    double offset{0.0};
    [[nodiscard]] double eval(const Point& p) const { return dot(normal, p) + offset; }
};

/// Integration region: the domain, optionally cut by a box and a half-plane.
struct Region {
    std::optional<Box> box;
    std::optional<HalfPlane> half_plane;
    [[nodiscard]] bool is_domain() const { return !box && !half_plane; }
    [[nodiscard]] bool contains(const Point& p) const
    {
        return (!box || box->contains(p)) && (!half_plane || half_plane->eval(p) >= 0.0);
    }
};

struct IntegralTerm {
    std::shared_ptr<const VectorWeight> weight;
    Region region;
    double coeff{1.0};
};

/// Linear functional v -> sum of point values and weighted integrals of v.
/// This is the form of every derivative J'(u) in the catalog.
class LinearForm {
public:
    std::vector<PointTerm> points;
    std::vector<IntegralTerm> integrals;

    void append(const LinearForm& other, double scale);

    [[nodiscard]] double apply(const DiscreteFunction& v) const;
    /// Raw pairings with every basis function of `space` (no constraints).
    [[nodiscard]] Vector assemble(const FeSpace& space) const;
    /// Pairings with v psi_i for every node i of the scalar Q1 space `pu`,
    /// hanging nodes folded into their masters.
    [[nodiscard]] Vector apply_pu(const DiscreteFunction& v, const FeSpace& pu) const;
};

/// Node of a goal functional expression tree.
class FunctionalExpr {
public:
    virtual ~FunctionalExpr() = default;
    [[nodiscard]] virtual double eval(const DiscreteFunction& u) const = 0;
    /// Appends scale * J'(u) to `out`.
    virtual void linearize(const DiscreteFunction& u, double scale, LinearForm& out) const = 0;
    /// Value at a closed-form field; integrals use `n_quad` Gauss points per
    /// direction on every cell of `mesh`.
    [[nodiscard]] virtual double eval_field(const FieldFunction& u, const Mesh& mesh, int n_quad) const = 0;
    [[nodiscard]] virtual std::string describe() const = 0;
};

using Functional = std::shared_ptr<const FunctionalExpr>;

[[nodiscard]] Functional point_value(const Point& x, int component = 0, Side side = Side::None);
/// Cells cut by the region boundary are integrated over the exact overlap
/// when their map is affine, by recursive subdivision otherwise.
[[nodiscard]] Functional weighted_integral(VectorWeight weight, Region region = {}, std::string label = "integral");
/// Integral of one component over the domain or a box.
[[nodiscard]] Functional component_integral(int component = 0, std::optional<Box> box = std::nullopt);
[[nodiscard]] Functional sum(Functional a, Functional b);
[[nodiscard]] Functional scale(double c, Functional a);
[[nodiscard]] Functional product(Functional a, Functional b);
[[nodiscard]] Functional power(Functional a, int k);
[[nodiscard]] Functional shift(Functional a, double c);

[[nodiscard]] inline double eval(const Functional& j, const DiscreteFunction& u)
{
    return j->eval(u);
}
[[nodiscard]] inline double eval_field(const Functional& j, const FieldFunction& u, const Mesh& mesh, int n_quad)
{
    return j->eval_field(u, mesh, n_quad);
}
[[nodiscard]] LinearForm linearize(const Functional& j, const DiscreteFunction& u);
/// Exact directional derivative J'(u)(v).
[[nodiscard]] double derivative(const Functional& j, const DiscreteFunction& u, const DiscreteFunction& v);

/// Raw vector of J'(u)(phi_i) over the basis of `space`.
[[nodiscard]] Vector assemble_functional_gradient(const Functional& j, const FeSpace& space,
                                                  const DiscreteFunction& u);

struct NamedFunctional {
    std::string name;
    Functional functional;
};

/// Goal sets of the experiments: "example1a", "example1b", "example1c",
/// "example2". Throws UnknownExperiment.
[[nodiscard]] std::vector<NamedFunctional> catalog(const std::string& experiment);

// Building blocks of the slit example.
[[nodiscard]] std::array<double, kMaxComponents> phi_c(const Point& x);
/// Throws FunctionalSingular where the second component's denominator is
/// below 1e-8.
[[nodiscard]] std::array<double, kMaxComponents> phi_d(const Point& x);

}  // namespace mgdwr
