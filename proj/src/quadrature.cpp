#include "mgdwr/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mgdwr {

GaussRule1D::GaussRule1D(int n)
{
    if (n < 1) throw std::invalid_argument("Gauss rule needs at least one point");
    points.resize(static_cast<std::size_t>(n));
    weights.resize(static_cast<std::size_t>(n));
    // Newton iteration on P_n from the Chebyshev-like initial guesses, then
    // the map [-1,1] -> [0,1].
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        const auto lo = static_cast<std::size_t>(i);
        const auto hi = static_cast<std::size_t>(n - 1 - i);
        points[lo] = 0.5 * (1.0 - x);
        points[hi] = 0.5 * (1.0 + x);
        weights[lo] = 0.5 * w;
        weights[hi] = 0.5 * w;
    }
    if (n % 2 == 1) points[static_cast<std::size_t>(n / 2)] = 0.5;
}

QuadratureRule::QuadratureRule(int n) : QuadratureRule(n, {0.0, 0.0}, {1.0, 1.0}) {}

QuadratureRule::QuadratureRule(int n, const Point& lo, const Point& hi)
{
    const GaussRule1D g(n);
    const double sx = hi.x - lo.x;
    const double sy = hi.y - lo.y;
    points.reserve(static_cast<std::size_t>(n * n));
    weights.reserve(static_cast<std::size_t>(n * n));
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            points.push_back({lo.x + sx * g.points[i], lo.y + sy * g.points[j]});
            weights.push_back(sx * sy * g.weights[i] * g.weights[j]);
        }
}

QuadratureRule QuadratureRule::triangle(int n, const Point& a, const Point& b, const Point& c)
{
    // (s, t) in [0,1]^2 -> a + s (b - a) + s t (c - b), Jacobian s |det|
    const GaussRule1D g(n);
    const Vec2 e1 = b - a;
    const Vec2 e2 = c - b;
    const double det = std::abs(e1.x * e2.y - e1.y * e2.x);
    QuadratureRule r;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const double s = g.points[i];
            const double t = g.points[j];
            r.points.push_back(a + s * e1 + (s * t) * e2);
            r.weights.push_back(g.weights[i] * g.weights[j] * s * det);
        }
    return r;
}

void QuadratureRule::append(const QuadratureRule& other)
{
    points.insert(points.end(), other.points.begin(), other.points.end());
    weights.insert(weights.end(), other.weights.begin(), other.weights.end());
}

LagrangeBasis1D::LagrangeBasis1D(int degree) : degree_(degree)
{
    if (degree < 1) throw std::invalid_argument("Lagrange degree must be >= 1");
    for (int k = 0; k <= degree; ++k) nodes_.push_back(static_cast<double>(k) / degree);
    for (int k = 0; k <= degree; ++k) {
        double d = 1.0;
        for (int m = 0; m <= degree; ++m)
            if (m != k) d *= nodes_[k] - nodes_[m];
        denominators_.push_back(d);
    }
}

double LagrangeBasis1D::value(int k, double t) const
{
    double v = 1.0;
    for (int m = 0; m <= degree_; ++m)
        if (m != k) v *= t - nodes_[m];
    return v / denominators_[k];
}

double LagrangeBasis1D::derivative(int k, double t) const
{
    double sum = 0.0;
    for (int j = 0; j <= degree_; ++j) {
        if (j == k) continue;
        double prod = 1.0;
        for (int m = 0; m <= degree_; ++m)
            if (m != k && m != j) prod *= t - nodes_[m];
        sum += prod;
    }
    return sum / denominators_[k];
}

void LagrangeBasis1D::evaluate(double t, double* values, double* derivatives) const
{
    for (int k = 0; k <= degree_; ++k) {
        values[k] = value(k, t);
        if (derivatives) derivatives[k] = derivative(k, t);
    }
}

}  // namespace mgdwr
