#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mgdwr {

struct Vec2 {
    double x{0.0};
    double y{0.0};

    constexpr Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    constexpr Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
    constexpr Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
    friend constexpr Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
    friend constexpr Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
    friend constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
    friend constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

using Point = Vec2;

[[nodiscard]] constexpr double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
[[nodiscard]] inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }

/// Row-major 2x2 matrix.
struct Mat2 {
    double a11{0.0}, a12{0.0}, a21{0.0}, a22{0.0};

    [[nodiscard]] constexpr double det() const { return a11 * a22 - a12 * a21; }
    [[nodiscard]] constexpr Mat2 transpose() const { return {a11, a21, a12, a22}; }
    [[nodiscard]] constexpr Mat2 inverse() const
    {
        const double d = det();
        return {a22 / d, -a12 / d, -a21 / d, a11 / d};
    }
    [[nodiscard]] constexpr Vec2 operator*(const Vec2& v) const
    {
        return {a11 * v.x + a12 * v.y, a21 * v.x + a22 * v.y};
    }
    static constexpr Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Mat2 outer(const Vec2& a, const Vec2& b) { return {a.x * b.x, a.x * b.y, a.y * b.x, a.y * b.y}; }
    constexpr Mat2& operator+=(const Mat2& o)
    {
        a11 += o.a11; a12 += o.a12; a21 += o.a21; a22 += o.a22;
        return *this;
    }
    friend constexpr Mat2 operator*(double s, Mat2 m)
    {
        m.a11 *= s; m.a12 *= s; m.a21 *= s; m.a22 *= s;
        return m;
    }
    friend constexpr Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
};

/// Which lip of an interior slit a point belongs to. Only meaningful for
/// points lying exactly on a slit; everywhere else it is None.
enum class Side : std::int8_t { Below = -1, None = 0, Above = 1 };

/// Axis-aligned box [lo.x, hi.x] x [lo.y, hi.y].
struct Box {
    Point lo;
    Point hi;

    [[nodiscard]] constexpr bool contains(const Point& p) const
    {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    }
};

}  // namespace mgdwr
