#pragma once

#include <array>
#include <cmath>

namespace mtb {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator-() const { return {-x, -y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(Vec2 o) const { return x * o.x + y * o.y; }
    double norm2() const { return x * x + y * y; }
    double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// Symmetric 2x2 matrix.
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    double det() const { return xx * yy - xy * xy; }
    double trace() const { return xx + yy; }
};

/// Flat rectangular torus R^2 / (aZ x bZ).
class TorusGeometry {
public:
    TorusGeometry() = default;
    TorusGeometry(double a, double b);

    double a() const { return a_; }
    double b() const { return b_; }
    double tau() const { return b_ / a_; }
    double area() const { return a_ * b_; }
    double min_side() const { return a_ < b_ ? a_ : b_; }

    TorusGeometry scaled(double s) const { return {a_ * s, b_ * s}; }

    /// Half period p_i, i in {1, 2, 3}.
    Vec2 half_period(int i) const;

    /// Representative in the half-open cell [-a/2, a/2) x [-b/2, b/2).
    /// Points on the upper/right boundary map to the lower/left one.
    Vec2 reduce(Vec2 z) const;

    double distance(Vec2 p, Vec2 q) const { return reduce(p - q).norm(); }

private:
    double a_ = 1.0;
    double b_ = 1.0;
};

inline Vec2 reduce_to_fundamental(Vec2 z, const TorusGeometry& g) { return g.reduce(z); }

}  // namespace mtb
