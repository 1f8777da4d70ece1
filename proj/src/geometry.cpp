#include "mtb/geometry.hpp"

#include "mtb/errors.hpp"

namespace mtb {

TorusGeometry::TorusGeometry(double a, double b) : a_(a), b_(b) {
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
        throw ConfigError("torus sides must be positive and finite");
}

Vec2 TorusGeometry::half_period(int i) const {
    switch (i) {
        case 1: return {0.5 * a_, 0.0};
        case 2: return {0.0, 0.5 * b_};
        case 3: return {0.5 * a_, 0.5 * b_};
        default: throw ConfigError("half period index must be 1, 2 or 3");
    }
}

Vec2 TorusGeometry::reduce(Vec2 z) const {
    double x = z.x - a_ * std::floor(z.x / a_ + 0.5);
    double y = z.y - b_ * std::floor(z.y / b_ + 0.5);
    // rounding in z/a + 0.5 can land exactly on the excluded edge
    if (x >= 0.5 * a_) x -= a_;
    if (y >= 0.5 * b_) y -= b_;
    if (x < -0.5 * a_) x += a_;
    if (y < -0.5 * b_) y += b_;
    return {x, y};
}

}  // namespace mtb
