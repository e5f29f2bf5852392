#pragma once

#include "mgdwr/fespace.hpp"
#include "mgdwr/geometry.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace mgdwr {

/// State of the solution at one quadrature point.
struct PointState {
    Point x;
    std::array<double, kMaxComponents> u{};
    std::array<Vec2, kMaxComponents> grad{};
};

/// A(u)(v) = sum_c integral of source_c * v_c + flux_c . grad v_c.
struct ResidualDensity {
    std::array<double, kMaxComponents> source{};
    std::array<Vec2, kMaxComponents> flux{};
};

/// Partial derivatives of the residual density: [c][d] is the derivative of
/// equation c with respect to component d (value or gradient).
struct JacobianDensity {
    std::array<std::array<double, kMaxComponents>, kMaxComponents> source_u{};
    std::array<std::array<Vec2, kMaxComponents>, kMaxComponents> source_grad{};
    std::array<std::array<Vec2, kMaxComponents>, kMaxComponents> flux_u{};
    std::array<std::array<Mat2, kMaxComponents>, kMaxComponents> flux_grad{};
};

class ProblemDefinition {
public:
    virtual ~ProblemDefinition() = default;
    [[nodiscard]] virtual int n_components() const = 0;
    virtual void residual(const PointState& s, ResidualDensity& out) const = 0;
    virtual void jacobian(const PointState& s, JacobianDensity& out) const = 0;
    [[nodiscard]] virtual const std::vector<DirichletData>& dirichlet() const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
};

using ScalarField = std::function<double(const Point&)>;

struct PLaplaceParams {
    double p{2.0};
    double epsilon{1.0};
    ScalarField rhs{[](const Point&) { return 1.0; }};
    std::function<double(const Point&, Side)> g{[](const Point&, Side) { return 0.0; }};
};

/// (eps^2 + |grad u|^2)^((p-2)/2) grad u
[[nodiscard]] Vec2 plaplace_flux(const Vec2& grad_u, double p, double epsilon);
/// Directional derivative of the flux at grad_u in direction grad_dir.
[[nodiscard]] Vec2 plaplace_flux_jacobian(const Vec2& grad_u, const Vec2& grad_dir, double p, double epsilon);
/// Derivative matrix of the flux with respect to the gradient.
[[nodiscard]] Mat2 plaplace_flux_derivative(const Vec2& grad_u, double p, double epsilon);

class PLaplaceProblem final : public ProblemDefinition {
public:
    explicit PLaplaceProblem(PLaplaceParams params);
    [[nodiscard]] int n_components() const override { return 1; }
    void residual(const PointState& s, ResidualDensity& out) const override;
    void jacobian(const PointState& s, JacobianDensity& out) const override;
    [[nodiscard]] const std::vector<DirichletData>& dirichlet() const override { return dirichlet_; }
    [[nodiscard]] std::string name() const override { return "p-laplace"; }
    [[nodiscard]] const PLaplaceParams& params() const { return params_; }

private:
    PLaplaceParams params_;
    std::vector<DirichletData> dirichlet_;
};

[[nodiscard]] std::shared_ptr<PLaplaceProblem> build_plaplace(PLaplaceParams params);

// Nonlinearities of the quasilinear system.
[[nodiscard]] double g1(double t);
[[nodiscard]] double g1_prime(double t);
[[nodiscard]] double g2(double t);
[[nodiscard]] double g2_prime(double t);

/// sign(y) sqrt(sqrt(x^2+y^2) - x) with the side hint deciding y = 0.
[[nodiscard]] double slit_profile(const Point& p, Side side = Side::None);
/// Exact solution (u1, u2, u3) = (s, 1 - s, s) with s = slit_profile.
[[nodiscard]] std::array<double, 3> quasilinear_exact(const Point& p, Side side = Side::None);

/// -lap u1 + u2 + u3 = 1, -lap u2 + g1(1-u2) = g1(u3),
/// -div(g2(u1+u2) grad u3) + g1(u3) = g1(u1); Dirichlet data from the exact
/// solution on tag 0, natural conditions on tag 1.
class QuasilinearProblem final : public ProblemDefinition {
public:
    QuasilinearProblem();
    [[nodiscard]] int n_components() const override { return 3; }
    void residual(const PointState& s, ResidualDensity& out) const override;
    void jacobian(const PointState& s, JacobianDensity& out) const override;
    [[nodiscard]] const std::vector<DirichletData>& dirichlet() const override { return dirichlet_; }
    [[nodiscard]] std::string name() const override { return "quasilinear"; }

private:
    std::vector<DirichletData> dirichlet_;
};

[[nodiscard]] std::shared_ptr<QuasilinearProblem> build_quasilinear();

/// Closed-form scalar with gradient and Hessian.
struct SmoothFunction {
    std::function<double(const Point&)> value;
    std::function<Vec2(const Point&)> gradient;
    std::function<Mat2(const Point&)> hessian;
};

/// f = -div a(grad u) for the regularized p-Laplacian.
[[nodiscard]] ScalarField manufactured_rhs(const SmoothFunction& u, double p, double epsilon);

/// u = sin(6x + 6y).
[[nodiscard]] SmoothFunction sine_solution();

}  // namespace mgdwr
