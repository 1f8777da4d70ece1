#pragma once

#include <array>
#include <complex>
#include <string>
#include <vector>

#include "mtb/geometry.hpp"

namespace mtb {

struct GreenValue {
    double value = 0.0;
    Vec2 gradient;
    Sym2 hessian;
};

/// Zero-mean Green's function of the flat torus: -Lap G = delta_0 - 1/area, int G = 0.
///
/// Implementations are immutable after construction and safe to share between threads.
class GreenEvaluator {
public:
    explicit GreenEvaluator(const TorusGeometry& geom) : geom_(geom) {}
    virtual ~GreenEvaluator() = default;

    const TorusGeometry& geometry() const { return geom_; }

    /// Points closer than this to a lattice point raise SingularPole.
    double singular_radius() const { return 1e-8 * geom_.min_side(); }

    virtual double value(Vec2 z) const = 0;
    virtual GreenValue eval(Vec2 z) const = 0;

    /// G(z) + log|z|/(2 pi) with z taken in the fundamental cell. Finite at z = 0.
    virtual double regular_part(Vec2 z) const = 0;

    /// Robin constant H(xi, xi) = regular_part(0).
    virtual double robin() const = 0;

protected:
    Vec2 checked_reduce(Vec2 z) const;

    TorusGeometry geom_;
};

/// Product form of Jacobi theta_1 plus the quadratic correction y^2/(2ab).
/// The axes are swapped internally when tau < 1 so that the nome stays below e^{-pi}.
class ThetaGreen final : public GreenEvaluator {
public:
    explicit ThetaGreen(const TorusGeometry& geom);

    double value(Vec2 z) const override;
    GreenValue eval(Vec2 z) const override;
    double regular_part(Vec2 z) const override;
    double robin() const override { return robin_; }

    int product_terms() const { return static_cast<int>(qpow_.size()); }

private:
    Vec2 to_internal(Vec2 zr) const { return swap_ ? Vec2{zr.y, zr.x} : zr; }
    double raw_value(Vec2 zi) const;
    double log_sin_abs(std::complex<double> v) const;
    double product_log_abs(std::complex<double> v) const;

    bool swap_ = false;
    double ap_ = 1.0;  // real period of the internal frame
    double bp_ = 1.0;
    double log_q_ = 0.0;
    std::vector<double> qpow_;  // q^{2n}, n = 1..N
    double constant_ = 0.0;
    double robin_ = 0.0;
};

/// Ewald split: Gaussian-screened reciprocal sum plus exponential-integral image sum.
/// Independent of the theta representation; used to cross-check it.
class EwaldGreen final : public GreenEvaluator {
public:
    explicit EwaldGreen(const TorusGeometry& geom);

    double value(Vec2 z) const override;
    GreenValue eval(Vec2 z) const override;
    double regular_part(Vec2 z) const override;
    double robin() const override { return robin_; }

private:
    struct Wave {
        Vec2 k;
        double coef;  // exp(-|k|^2/(4 alpha)) / (area |k|^2)
    };
    double fourier_value(Vec2 r) const;
    double image_value(Vec2 r, bool skip_origin) const;

    double alpha_ = 1.0;
    std::vector<Wave> waves_;
    std::vector<Vec2> images_;
    double shift_ = 0.0;
    double robin_ = 0.0;
};

struct HalfPeriodTable {
    double tau = 1.0;
    double f1 = 0.0;
    double f2 = 0.0;
    double f3 = 0.0;
    int truncation_terms = 0;
    double truncation_bound = 0.0;
};

/// Series values of G at the half periods. Each tail is bounded by a geometric series and
/// summation stops once the bound drops below tol; more than 1e4 terms raises TruncationFailure.
HalfPeriodTable half_period_values(double tau, double tol = 1e-16);

struct TauThresholds {
    double tau0 = 0.0;  // f2(tau0) = 0
    double tau1 = 0.0;  // f1(tau1) = 0
};

TauThresholds tau_thresholds(double tol = 1e-15);

/// Richardson extrapolation of G(z) + log|z|/(2 pi) along z = r e, r -> 0, using the theta
/// evaluator. Throws TruncationFailure when the last two diagonal entries differ by more than tol.
double robin_constant(const TorusGeometry& geom, double tol = 1e-10);

struct CriticalPointReport {
    int index = 0;
    Vec2 point;
    double value = 0.0;
    double gradient_norm = 0.0;
    Sym2 hessian;
    std::string kind;  // "minimum", "maximum", "saddle" or "degenerate"
};

std::array<CriticalPointReport, 3> half_period_criticality(const TorusGeometry& geom);

/// Trapezoid-rule mean of G over the cell, with the log singularity removed by a smooth radial
/// bump and integrated back in polar coordinates.
double zero_mean_quadrature(const GreenEvaluator& green, int n);

}  // namespace mtb
