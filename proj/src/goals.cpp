#include "mgdwr/goals.hpp"

#include "mgdwr/assembly.hpp"
#include "mgdwr/errors.hpp"
#include "mgdwr/problems.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mgdwr {

namespace {

constexpr int kMaxCutDepth = 8;

enum class Overlap { None, Full, Cut };

std::vector<HalfPlane> region_planes(const Region& r)
{
    std::vector<HalfPlane> out;
    if (r.box) {
        out.push_back({{1.0, 0.0}, -r.box->lo.x});
        out.push_back({{-1.0, 0.0}, r.box->hi.x});
        out.push_back({{0.0, 1.0}, -r.box->lo.y});
        out.push_back({{0.0, -1.0}, r.box->hi.y});
    }
    if (r.half_plane) out.push_back(*r.half_plane);
    return out;
}

// Cells and their iso-parametric sub-rectangles have straight edges and
// positive Jacobians, hence are convex: the corners decide the overlap.
Overlap classify(const std::array<Point, 4>& corners, const std::vector<HalfPlane>& planes)
{
    const double diam = std::max(norm(corners[3] - corners[0]), norm(corners[2] - corners[1]));
    bool full = true;
    for (const auto& h : planes) {
        const double tol = 1e-12 * norm(h.normal) * diam;
        int in = 0;
        int out = 0;
        for (const Point& p : corners) {
            const double v = h.eval(p);
            if (v >= -tol) ++in;
            if (v <= tol) ++out;
        }
        if (out == 4) return Overlap::None;
        if (in < 4) full = false;
    }
    return full ? Overlap::Full : Overlap::Cut;
}

std::array<Point, 4> mapped_corners(const Mesh& m, CellId c, const Point& lo, const Point& hi)
{
    return {m.map(c, lo), m.map(c, {hi.x, lo.y}), m.map(c, {lo.x, hi.y}), m.map(c, hi)};
}

bool is_parallelogram(const Mesh& m, CellId c)
{
    const auto& v = m.cell(c).vertices;
    const Point d = m.vertex(v[0]) + m.vertex(v[3]) - m.vertex(v[1]) - m.vertex(v[2]);
    const double scale = norm(m.vertex(v[3]) - m.vertex(v[0]));
    return norm(d) <= 1e-14 * scale;
}

// Clips the reference square by the preimages of the half-planes under the
// affine cell map and integrates the resulting polygon by triangles.
QuadratureRule clip_affine(const Mesh& m, CellId c, const std::vector<HalfPlane>& planes, int nq)
{
    const auto& v = m.cell(c).vertices;
    const Point o = m.vertex(v[0]);
    const Vec2 a1 = m.vertex(v[1]) - o;
    const Vec2 a2 = m.vertex(v[2]) - o;
    std::vector<Point> poly{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    for (const auto& h : planes) {
        const Vec2 n{dot(h.normal, a1), dot(h.normal, a2)};
        const double off = h.eval(o);
        const double tol = 1e-13 * (std::abs(n.x) + std::abs(n.y) + std::abs(off));
        auto value = [&](const Point& p) {
            const double val = dot(n, p) + off;
            return std::abs(val) <= tol ? 0.0 : val;
        };
        std::vector<Point> next;
        for (std::size_t i = 0; i < poly.size(); ++i) {
            const Point& p = poly[i];
            const Point& q = poly[(i + 1) % poly.size()];
            const double vp = value(p);
            const double vq = value(q);
            if (vp >= 0.0) next.push_back(p);
            if ((vp > 0.0 && vq < 0.0) || (vp < 0.0 && vq > 0.0)) next.push_back(p + (vp / (vp - vq)) * (q - p));
        }
        poly = std::move(next);
        if (poly.size() < 3) return {};
    }
    QuadratureRule rule;
    for (std::size_t i = 1; i + 1 < poly.size(); ++i) rule.append(QuadratureRule::triangle(nq, poly[0], poly[i], poly[i + 1]));
    return rule;
}

void subdivide(const Mesh& m, CellId c, const std::vector<HalfPlane>& planes, const Region& region, const Point& lo,
               const Point& hi, int depth, int nq, QuadratureRule& out)
{
    const Overlap o = classify(mapped_corners(m, c, lo, hi), planes);
    if (o == Overlap::None) return;
    if (o == Overlap::Full) {
        out.append(QuadratureRule(nq, lo, hi));
        return;
    }
    if (depth == kMaxCutDepth) {
        if (region.contains(m.map(c, 0.5 * (lo + hi)))) out.append(QuadratureRule(nq, lo, hi));
        return;
    }
    const Point mid = 0.5 * (lo + hi);
    subdivide(m, c, planes, region, lo, mid, depth + 1, nq, out);
    subdivide(m, c, planes, region, {mid.x, lo.y}, {hi.x, mid.y}, depth + 1, nq, out);
    subdivide(m, c, planes, region, {lo.x, mid.y}, {mid.x, hi.y}, depth + 1, nq, out);
    subdivide(m, c, planes, region, mid, hi, depth + 1, nq, out);
}

// Reference-space rule for cell c intersected with the region; only filled
// for cut cells.
Overlap overlap_rule(const Mesh& m, CellId c, const Region& region, const std::vector<HalfPlane>& planes, int nq,
                     QuadratureRule& rule)
{
    if (region.is_domain()) return Overlap::Full;
    const Overlap o = classify(mapped_corners(m, c, {0, 0}, {1, 1}), planes);
    if (o != Overlap::Cut) return o;
    rule = is_parallelogram(m, c) ? clip_affine(m, c, planes, nq) : QuadratureRule{};
    if (!is_parallelogram(m, c)) subdivide(m, c, planes, region, {0, 0}, {1, 1}, 0, nq, rule);
    return rule.size() == 0 ? Overlap::None : Overlap::Cut;
}

// Calls f(values) for every cell meeting the region of an integral term,
// where `values` are CellValues of the given spaces reinitialized on the
// cell with a rule covering the overlap.
template <typename F>
void for_each_piece(const IntegralTerm& term, std::initializer_list<const FeSpace*> spaces, F&& f)
{
    const FeSpace& first = **spaces.begin();
    const Mesh& mesh = first.mesh();
    int nq = 1;
    for (const FeSpace* s : spaces) nq = std::max(nq, s->n_quad());
    std::vector<CellValues> full;
    for (const FeSpace* s : spaces) full.emplace_back(*s, QuadratureRule(nq));
    const auto planes = region_planes(term.region);
    QuadratureRule rule;
    for (CellId c : mesh.active_cells()) {
        const Overlap o = overlap_rule(mesh, c, term.region, planes, nq, rule);
        if (o == Overlap::None) continue;
        if (o == Overlap::Full) {
            for (auto& cv : full) cv.reinit(c);
            f(full);
            continue;
        }
        std::vector<CellValues> piece;
        for (const FeSpace* s : spaces) piece.emplace_back(*s, rule);
        for (auto& cv : piece) cv.reinit(c);
        f(piece);
    }
}

double integrate_field(const VectorWeight& weight, const Region& region, const FieldFunction& u, const Mesh& mesh,
                       int nq)
{
    const QuadratureRule whole(nq);
    const auto planes = region_planes(region);
    QuadratureRule cut;
    double acc = 0.0;
    for (CellId c : mesh.active_cells()) {
        const Overlap o = overlap_rule(mesh, c, region, planes, nq, cut);
        if (o == Overlap::None) continue;
        const QuadratureRule& rule = o == Overlap::Full ? whole : cut;
        for (int q = 0; q < rule.size(); ++q) {
            const Point x = mesh.map(c, rule.points[q]);
            const double jxw = rule.weights[q] * mesh.jacobian(c, rule.points[q]).det();
            const auto w = weight(x);
            double d = 0.0;
            for (int k = 0; k < kMaxComponents; ++k)
                if (w[k] != 0.0) d += w[k] * u(x, Side::None, k);
            acc += jxw * d;
        }
    }
    return acc;
}

class PointValueExpr final : public FunctionalExpr {
public:
    PointValueExpr(const Point& x, int comp, Side side) : x_(x), comp_(comp), side_(side) {}
    double eval(const DiscreteFunction& u) const override { return evaluate_at_point(u, x_, comp_, side_); }
    double eval_field(const FieldFunction& u, const Mesh&, int) const override { return u(x_, side_, comp_); }
    void linearize(const DiscreteFunction&, double s, LinearForm& out) const override
    {
        out.points.push_back({x_, side_, comp_, s});
    }
    std::string describe() const override
    {
        std::ostringstream os;
        os << "u" << comp_ + 1 << "(" << x_.x << "," << x_.y << ")";
        return os.str();
    }

private:
    Point x_;
    int comp_;
    Side side_;
};

class IntegralExpr final : public FunctionalExpr {
public:
    IntegralExpr(VectorWeight w, Region region, std::string label)
        : weight_(std::make_shared<const VectorWeight>(std::move(w))), region_(region), label_(std::move(label))
    {
    }
    double eval(const DiscreteFunction& u) const override
    {
        LinearForm f;
        f.integrals.push_back({weight_, region_, 1.0});
        return f.apply(u);
    }
    double eval_field(const FieldFunction& u, const Mesh& mesh, int nq) const override
    {
        return integrate_field(*weight_, region_, u, mesh, nq);
    }
    void linearize(const DiscreteFunction&, double s, LinearForm& out) const override
    {
        out.integrals.push_back({weight_, region_, s});
    }
    std::string describe() const override { return label_; }

private:
    std::shared_ptr<const VectorWeight> weight_;
    Region region_;
    std::string label_;
};

class SumExpr final : public FunctionalExpr {
public:
    SumExpr(Functional a, Functional b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const DiscreteFunction& u) const override { return a_->eval(u) + b_->eval(u); }
    double eval_field(const FieldFunction& u, const Mesh& m, int nq) const override
    {
        return a_->eval_field(u, m, nq) + b_->eval_field(u, m, nq);
    }
    void linearize(const DiscreteFunction& u, double s, LinearForm& out) const override
    {
        a_->linearize(u, s, out);
        b_->linearize(u, s, out);
    }
    std::string describe() const override { return "(" + a_->describe() + " + " + b_->describe() + ")"; }

private:
    Functional a_, b_;
};

class ScaleExpr final : public FunctionalExpr {
public:
    ScaleExpr(double c, Functional a) : c_(c), a_(std::move(a)) {}
    double eval(const DiscreteFunction& u) const override { return c_ * a_->eval(u); }
    double eval_field(const FieldFunction& u, const Mesh& m, int nq) const override
    {
        return c_ * a_->eval_field(u, m, nq);
    }
    void linearize(const DiscreteFunction& u, double s, LinearForm& out) const override
    {
        a_->linearize(u, s * c_, out);
    }
    std::string describe() const override { return std::to_string(c_) + "*" + a_->describe(); }

private:
    double c_;
    Functional a_;
};

class ProductExpr final : public FunctionalExpr {
public:
    ProductExpr(Functional a, Functional b) : a_(std::move(a)), b_(std::move(b)) {}
    double eval(const DiscreteFunction& u) const override { return a_->eval(u) * b_->eval(u); }
    double eval_field(const FieldFunction& u, const Mesh& m, int nq) const override
    {
        return a_->eval_field(u, m, nq) * b_->eval_field(u, m, nq);
    }
    void linearize(const DiscreteFunction& u, double s, LinearForm& out) const override
    {
        const double va = a_->eval(u);
        const double vb = b_->eval(u);
        a_->linearize(u, s * vb, out);
        b_->linearize(u, s * va, out);
    }
    std::string describe() const override { return a_->describe() + "*" + b_->describe(); }

private:
    Functional a_, b_;
};

class PowerExpr final : public FunctionalExpr {
public:
    PowerExpr(Functional a, int k) : a_(std::move(a)), k_(k) {}
    double eval(const DiscreteFunction& u) const override { return std::pow(a_->eval(u), k_); }
    double eval_field(const FieldFunction& u, const Mesh& m, int nq) const override
    {
        return std::pow(a_->eval_field(u, m, nq), k_);
    }
    void linearize(const DiscreteFunction& u, double s, LinearForm& out) const override
    {
        a_->linearize(u, s * k_ * std::pow(a_->eval(u), k_ - 1), out);
    }
    std::string describe() const override { return a_->describe() + "^" + std::to_string(k_); }

private:
    Functional a_;
    int k_;
};

class ShiftExpr final : public FunctionalExpr {
public:
    ShiftExpr(Functional a, double c) : a_(std::move(a)), c_(c) {}
    double eval(const DiscreteFunction& u) const override { return a_->eval(u) + c_; }
    double eval_field(const FieldFunction& u, const Mesh& m, int nq) const override
    {
        return a_->eval_field(u, m, nq) + c_;
    }
    void linearize(const DiscreteFunction& u, double s, LinearForm& out) const override { a_->linearize(u, s, out); }
    std::string describe() const override { return "(" + a_->describe() + " + " + std::to_string(c_) + ")"; }

private:
    Functional a_;
    double c_;
};

}  // namespace

void LinearForm::append(const LinearForm& other, double s)
{
    for (auto t : other.points) {
        t.coeff *= s;
        points.push_back(t);
    }
    for (auto t : other.integrals) {
        t.coeff *= s;
        integrals.push_back(t);
    }
}

double LinearForm::apply(const DiscreteFunction& v) const
{
    double total = 0.0;
    for (const auto& p : points) total += p.coeff * evaluate_at_point(v, p.x, p.component, p.side);
    const FeSpace& space = v.space();
    const int nc = space.n_components();
    std::vector<PointState> st;
    for (const auto& term : integrals) {
        double acc = 0.0;
        for_each_piece(term, {&space}, [&](std::vector<CellValues>& cv) {
            cv[0].function_state(v.coefficients(), st);
            for (int q = 0; q < cv[0].n_q(); ++q) {
                const auto w = (*term.weight)(cv[0].point(q));
                double d = 0.0;
                for (int c = 0; c < nc; ++c) d += w[c] * st[q].u[c];
                acc += cv[0].JxW(q) * d;
            }
        });
        total += term.coeff * acc;
    }
    return total;
}

Vector LinearForm::assemble(const FeSpace& space) const
{
    Vector out(static_cast<std::size_t>(space.n_dofs()), 0.0);
    const int nc = space.n_components();
    for (const auto& p : points) {
        const auto loc = space.mesh().locate(p.x, p.side);
        if (!loc) throw PointOutsideDomain("point functional outside the mesh");
        const auto nodes = space.cell_nodes(loc->cell);
        for (int k = 0; k < space.nodes_per_cell(); ++k)
            out[static_cast<std::size_t>(space.dof(nodes[k], p.component))] += p.coeff * space.shape_value(k, loc->ref);
    }
    std::vector<int> dofs;
    for (const auto& term : integrals) {
        for_each_piece(term, {&space}, [&](std::vector<CellValues>& cv) {
            const CellValues& v = cv[0];
            space.cell_dofs(v.cell(), dofs);
            for (int q = 0; q < v.n_q(); ++q) {
                const auto w = (*term.weight)(v.point(q));
                for (int k = 0; k < v.n_shape(); ++k) {
                    const double base = term.coeff * v.JxW(q) * v.shape(k, q);
                    for (int c = 0; c < nc; ++c) out[static_cast<std::size_t>(dofs[k * nc + c])] += base * w[c];
                }
            }
        });
    }
    return out;
}

Vector LinearForm::apply_pu(const DiscreteFunction& v, const FeSpace& pu) const
{
    Vector nodal(static_cast<std::size_t>(pu.n_nodes()), 0.0);
    const FeSpace& space = v.space();
    const int nc = space.n_components();
    for (const auto& p : points) {
        const auto loc = space.mesh().locate(p.x, p.side);
        if (!loc) throw PointOutsideDomain("point functional outside the mesh");
        const double val = v.value(loc->cell, loc->ref, p.component);
        const auto nodes = pu.cell_nodes(loc->cell);
        for (int a = 0; a < 4; ++a) nodal[nodes[a]] += p.coeff * val * pu.shape_value(a, loc->ref);
    }
    std::vector<PointState> st;
    for (const auto& term : integrals) {
        for_each_piece(term, {&space, &pu}, [&](std::vector<CellValues>& cv) {
            cv[0].function_state(v.coefficients(), st);
            const auto nodes = pu.cell_nodes(cv[0].cell());
            for (int q = 0; q < cv[0].n_q(); ++q) {
                const auto w = (*term.weight)(cv[0].point(q));
                double d = 0.0;
                for (int c = 0; c < nc; ++c) d += w[c] * st[q].u[c];
                d *= term.coeff * cv[0].JxW(q);
                for (int a = 0; a < 4; ++a) nodal[nodes[a]] += d * cv[1].shape(a, q);
            }
        });
    }
    fold_hanging(pu, nodal);
    return nodal;
}

Functional point_value(const Point& x, int component, Side side)
{
    return std::make_shared<PointValueExpr>(x, component, side);
}

Functional weighted_integral(VectorWeight weight, Region region, std::string label)
{
    return std::make_shared<IntegralExpr>(std::move(weight), region, std::move(label));
}

Functional component_integral(int component, std::optional<Box> box)
{
    auto w = [component](const Point&) {
        std::array<double, kMaxComponents> out{};
        out[component] = 1.0;
        return out;
    };
    std::string label = "int u" + std::to_string(component + 1);
    if (box) {
        std::ostringstream os;
        os << label << " over (" << box->lo.x << "," << box->hi.x << ")x(" << box->lo.y << "," << box->hi.y << ")";
        label = os.str();
    }
    return weighted_integral(w, Region{box, std::nullopt}, label);
}

Functional sum(Functional a, Functional b)
{
    return std::make_shared<SumExpr>(std::move(a), std::move(b));
}

Functional scale(double c, Functional a)
{
    return std::make_shared<ScaleExpr>(c, std::move(a));
}

Functional product(Functional a, Functional b)
{
    return std::make_shared<ProductExpr>(std::move(a), std::move(b));
}

Functional power(Functional a, int k)
{
    if (k < 1) throw std::invalid_argument("power exponent must be a positive integer");
    return std::make_shared<PowerExpr>(std::move(a), k);
}

Functional shift(Functional a, double c)
{
    return std::make_shared<ShiftExpr>(std::move(a), c);
}

LinearForm linearize(const Functional& j, const DiscreteFunction& u)
{
    LinearForm f;
    j->linearize(u, 1.0, f);
    return f;
}

double derivative(const Functional& j, const DiscreteFunction& u, const DiscreteFunction& v)
{
    return linearize(j, u).apply(v);
}

Vector assemble_functional_gradient(const Functional& j, const FeSpace& space, const DiscreteFunction& u)
{
    return linearize(j, u).assemble(space);
}

std::array<double, kMaxComponents> phi_c(const Point& x)
{
    return {0.0, 0.0, x.x < x.y ? x.y - x.x : 0.0};
}

std::array<double, kMaxComponents> phi_d(const Point& x)
{
    if (!(x.x > 0.0 && x.y > 0.0)) return {0.0, 0.0, 0.0};
    const double denom = 1.0 - slit_profile(x);
    if (std::abs(denom) < 1e-8) throw FunctionalSingular("Phi_D denominator vanishes near the evaluation point");
    return {-4.0, 2.0 / denom, 4.0};
}

std::vector<NamedFunctional> catalog(const std::string& experiment)
{
    if (experiment == "example1a") return {{"J1", component_integral(0)}};
    if (experiment == "example1b") return {{"J1", point_value({0.6, 0.6})}};
    if (experiment == "example1c") {
        const auto a = point_value({2.9, 2.1});
        const auto b = point_value({2.1, 2.9});
        // |Omega| of the cheese domain: 25 minus four unit holes.
        constexpr double area = 21.0;
        const auto mean_gap = sum(component_integral(0), scale(-area, point_value({2.5, 2.5})));
        return {
            {"J1", product(shift(a, 1.0), shift(b, 1.0))},
            {"J2", power(mean_gap, 2)},
            {"J3", component_integral(0, Box{{2.0, 2.0}, {3.0, 3.0}})},
            {"J4", point_value({0.6, 0.6})},
        };
    }
    if (experiment == "example2") {
        const auto ja = point_value({-0.5, 0.01}, 2);
        const auto jb = point_value({-0.01, 0.01}, 0);
        // chi_C has a kink on y = x; cutting there keeps the quadrature exact
        const auto jc = weighted_integral(phi_c, Region{std::nullopt, HalfPlane{{-1.0, 1.0}, 0.0}}, "J_C");
        const auto jd = weighted_integral(phi_d, Region{Box{{0.0, 0.0}, {1.0, 1.0}}, std::nullopt}, "J_D");
        const auto je = point_value({-0.9, -0.9}, 0);
        const auto jf = point_value({-0.9, -0.1}, 1);
        return {
            {"J1", product(jb, jd)},
            {"J2", product(ja, jc)},
            {"J3", product(product(ja, jc), jf)},
            {"J4", product(jb, je)},
            {"J5", product(power(jb, 3), je)},
            {"J6", jc},
        };
    }
    throw UnknownExperiment("unknown experiment '" + experiment + "'");
}

}  // namespace mgdwr
