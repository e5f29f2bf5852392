#include "mgdwr/problems.hpp"

#include <cmath>
#include <stdexcept>

namespace mgdwr {

Vec2 plaplace_flux(const Vec2& grad_u, double p, double epsilon)
{
    const double s = epsilon * epsilon + dot(grad_u, grad_u);
    return std::pow(s, 0.5 * (p - 2.0)) * grad_u;
}

Mat2 plaplace_flux_derivative(const Vec2& grad_u, double p, double epsilon)
{
    const double s = epsilon * epsilon + dot(grad_u, grad_u);
    const double a = std::pow(s, 0.5 * (p - 2.0));
    const double b = (p - 2.0) * std::pow(s, 0.5 * (p - 4.0));
    return a * Mat2::identity() + b * Mat2::outer(grad_u, grad_u);
}

Vec2 plaplace_flux_jacobian(const Vec2& grad_u, const Vec2& grad_dir, double p, double epsilon)
{
    return plaplace_flux_derivative(grad_u, p, epsilon) * grad_dir;
}

PLaplaceProblem::PLaplaceProblem(PLaplaceParams params) : params_(std::move(params))
{
    if (!(params_.p > 1.0)) throw std::invalid_argument("p-Laplacian needs p > 1");
    if (!(params_.epsilon > 0.0)) throw std::invalid_argument("p-Laplacian needs epsilon > 0");
    dirichlet_.push_back({kDirichletTag, 0, params_.g});
}

void PLaplaceProblem::residual(const PointState& s, ResidualDensity& out) const
{
    out.source[0] = -params_.rhs(s.x);
    out.flux[0] = plaplace_flux(s.grad[0], params_.p, params_.epsilon);
}

void PLaplaceProblem::jacobian(const PointState& s, JacobianDensity& out) const
{
    out = {};
    out.flux_grad[0][0] = plaplace_flux_derivative(s.grad[0], params_.p, params_.epsilon);
}

std::shared_ptr<PLaplaceProblem> build_plaplace(PLaplaceParams params)
{
    return std::make_shared<PLaplaceProblem>(std::move(params));
}

double g1(double t)
{
    return std::exp(t) - std::sin(t - 1.0);
}

double g1_prime(double t)
{
    return std::exp(t) - std::cos(t - 1.0);
}

double g2(double t)
{
    return std::exp(t * t - t);
}

double g2_prime(double t)
{
    return (2.0 * t - 1.0) * std::exp(t * t - t);
}

double slit_profile(const Point& p, Side side)
{
    double sign = 0.0;
    if (p.y > 0.0)
        sign = 1.0;
    else if (p.y < 0.0)
        sign = -1.0;
    else
        sign = static_cast<double>(static_cast<int>(side));
    if (sign == 0.0) return 0.0;
    const double r = std::hypot(p.x, p.y);
    return sign * std::sqrt(std::max(r - p.x, 0.0));
}

std::array<double, 3> quasilinear_exact(const Point& p, Side side)
{
    const double s = slit_profile(p, side);
    return {s, 1.0 - s, s};
}

QuasilinearProblem::QuasilinearProblem()
{
    constexpr double h = 1e-6;
    for (const double t : {-1.3, 0.0, 0.4, 1.0, 2.2}) {
        const double d1 = (g1(t + h) - g1(t - h)) / (2.0 * h);
        const double d2 = (g2(t + h) - g2(t - h)) / (2.0 * h);
        if (std::abs(d1 - g1_prime(t)) > 1e-6 * (1.0 + std::abs(d1)) ||
            std::abs(d2 - g2_prime(t)) > 1e-6 * (1.0 + std::abs(d2)))
            throw std::logic_error("nonlinearity derivative does not match finite differences");
    }

    dirichlet_.push_back({kDirichletTag, 0, [](const Point& p, Side s) { return slit_profile(p, s); }});
    dirichlet_.push_back({kDirichletTag, 1, [](const Point& p, Side s) { return 1.0 - slit_profile(p, s); }});
    dirichlet_.push_back({kDirichletTag, 2, [](const Point& p, Side s) { return slit_profile(p, s); }});
}

void QuasilinearProblem::residual(const PointState& s, ResidualDensity& out) const
{
    const auto& u = s.u;
    out.source[0] = u[1] + u[2] - 1.0;
    out.source[1] = g1(1.0 - u[1]) - g1(u[2]);
    out.source[2] = g1(u[2]) - g1(u[0]);
    out.flux[0] = s.grad[0];
    out.flux[1] = s.grad[1];
    out.flux[2] = g2(u[0] + u[1]) * s.grad[2];
}

void QuasilinearProblem::jacobian(const PointState& s, JacobianDensity& out) const
{
    out = {};
    const auto& u = s.u;
    out.source_u[0][1] = 1.0;
    out.source_u[0][2] = 1.0;
    out.source_u[1][1] = -g1_prime(1.0 - u[1]);
    out.source_u[1][2] = -g1_prime(u[2]);
    out.source_u[2][2] = g1_prime(u[2]);
    out.source_u[2][0] = -g1_prime(u[0]);
    out.flux_grad[0][0] = Mat2::identity();
    out.flux_grad[1][1] = Mat2::identity();
    out.flux_grad[2][2] = g2(u[0] + u[1]) * Mat2::identity();
    const Vec2 coupling = g2_prime(u[0] + u[1]) * s.grad[2];
    out.flux_u[2][0] = coupling;
    out.flux_u[2][1] = coupling;
}

std::shared_ptr<QuasilinearProblem> build_quasilinear()
{
    return std::make_shared<QuasilinearProblem>();
}

ScalarField manufactured_rhs(const SmoothFunction& u, double p, double epsilon)
{
    return [u, p, epsilon](const Point& x) {
        const Vec2 g = u.gradient(x);
        const Mat2 h = u.hessian(x);
        const double s = epsilon * epsilon + dot(g, g);
        const double lap = h.a11 + h.a22;
        const double ghg = dot(g, h * g);
        return -(std::pow(s, 0.5 * (p - 2.0)) * lap + (p - 2.0) * std::pow(s, 0.5 * (p - 4.0)) * ghg);
    };
}

SmoothFunction sine_solution()
{
    SmoothFunction f;
    f.value = [](const Point& x) { return std::sin(6.0 * x.x + 6.0 * x.y); };
    f.gradient = [](const Point& x) {
        const double c = 6.0 * std::cos(6.0 * x.x + 6.0 * x.y);
        return Vec2{c, c};
    };
    f.hessian = [](const Point& x) {
        const double s = -36.0 * std::sin(6.0 * x.x + 6.0 * x.y);
        return Mat2{s, s, s, s};
    };
    return f;
}

}  // namespace mgdwr
