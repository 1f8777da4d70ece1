#pragma once

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>

#include "mtb/errors.hpp"

namespace mtb {

/// Adaptive Gauss-Kronrod (G30/K61) on [lo, hi]. Relative tolerance is measured against the
/// L1 norm of the integrand; abs_floor guards integrands that are tiny everywhere.
template <class F>
double integrate_adaptive(F&& f, double lo, double hi, double rel_tol = 1e-13,
                          double abs_floor = 0.0, unsigned max_depth = 18) {
    if (hi == lo) return 0.0;
    // Boost keeps bisecting once the tolerance sits at roundoff level and the summed error
    // estimate then grows with depth, so deepen gradually and stop once the estimate stops improving.
    double best_err = INFINITY;
    double best_l1 = 0.0;
    double val = 0.0;
    for (unsigned depth = 0; depth <= max_depth; ++depth) {
        double err = 0.0;
        double l1 = 0.0;
        double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, depth, rel_tol,
                                                                                 &err, &l1);
        if (!std::isfinite(v) || err >= best_err) break;  // roundoff floor reached
        best_err = err;
        best_l1 = l1;
        val = v;
        if (best_err <= rel_tol * best_l1 + abs_floor) break;
    }
    if (!std::isfinite(best_err) || best_err > std::max(100.0 * rel_tol, 1e-10) * best_l1 + abs_floor)
    {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "adaptive quadrature did not converge on [%.6g, %.6g]: error %.3e, L1 %.3e", lo,
                      hi, best_err, best_l1);
        throw QuadratureFailure(buf);
    }
    return val;
}

/// Fixed 20-point Gauss-Legendre rule on [lo, hi].
template <class F>
double integrate_gauss20(F&& f, double lo, double hi) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
}

}  // namespace mtb
