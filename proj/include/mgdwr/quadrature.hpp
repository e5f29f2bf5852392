#pragma once

#include "mgdwr/geometry.hpp"

#include <vector>

namespace mgdwr {

/// Gauss-Legendre rule on [0,1].
struct GaussRule1D {
    std::vector<double> points;
    std::vector<double> weights;

    explicit GaussRule1D(int n);
    [[nodiscard]] int size() const { return static_cast<int>(points.size()); }
};

/// Tensor Gauss rule on the unit square; point q = i + n*j.
struct QuadratureRule {
    std::vector<Point> points;
    std::vector<double> weights;

    QuadratureRule() = default;
    explicit QuadratureRule(int n_per_direction);
    /// Tensor rule mapped onto the reference sub-rectangle [lo, hi].
    QuadratureRule(int n_per_direction, const Point& lo, const Point& hi);
    [[nodiscard]] int size() const { return static_cast<int>(points.size()); }

    /// Collapsed tensor rule on the triangle (a, b, c), exact for total
    /// degree 2n - 2.
    static QuadratureRule triangle(int n_per_direction, const Point& a, const Point& b, const Point& c);
    void append(const QuadratureRule& other);
};

/// Lagrange polynomials on the equispaced nodes k/r, k = 0..r.
class LagrangeBasis1D {
public:
    explicit LagrangeBasis1D(int degree);

    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] double node(int k) const { return nodes_[k]; }
    [[nodiscard]] double value(int k, double t) const;
    [[nodiscard]] double derivative(int k, double t) const;
    /// All r+1 values (and derivatives) at t.
    void evaluate(double t, double* values, double* derivatives) const;

private:
    int degree_;
    std::vector<double> nodes_;
    std::vector<double> denominators_;
};

}  // namespace mgdwr
