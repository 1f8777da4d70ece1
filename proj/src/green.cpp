#include "mtb/green.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtb/errors.hpp"
#include "mtb/quadrature.hpp"

namespace mtb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr int kTermCap = 10000;

using cplx = std::complex<double>;

double expint_e1(double x) { return -std::expint(-x); }

// E1(x) + log(x), finite at 0
double e1_plus_log(double x) {
    if (x < 1.0) {
        double term = 1.0;
        double sum = 0.0;
        for (int n = 1; n < 60; ++n) {
            term *= -x / n;
            double add = term / n;
            sum += add;
            if (std::abs(add) < 1e-18) break;
        }
        return -kEulerGamma - sum;
    }
    return expint_e1(x) + std::log(x);
}

// log|sin(v)/v|
double log_sinc_abs(cplx v) {
    if (std::abs(v) < 1e-2) {
        cplx v2 = v * v;
        cplx s = 1.0 - v2 / 6.0 * (1.0 - v2 / 20.0 * (1.0 - v2 / 42.0 * (1.0 - v2 / 72.0)));
        return std::log(std::abs(s));
    }
    return std::log(std::abs(std::sin(v) / v));
}

}  // namespace

Vec2 GreenEvaluator::checked_reduce(Vec2 z) const {
    Vec2 zr = geom_.reduce(z);
    if (zr.norm() < singular_radius())
        throw SingularPole("Green's function evaluated within the singularity radius of the pole");
    return zr;
}

// ---------------------------------------------------------------------------------------------
// theta representation

ThetaGreen::ThetaGreen(const TorusGeometry& geom) : GreenEvaluator(geom) {
    swap_ = geom.tau() < 1.0;
    ap_ = swap_ ? geom.b() : geom.a();
    bp_ = swap_ ? geom.a() : geom.b();
    log_q_ = -kPi * bp_ / ap_;
    // |q^{2n} e^{+-2iv}| <= q^{2n-1}; stop once that is negligible in every derivative
    for (int n = 1; n < 1000; ++n) {
        double lw = (2.0 * n - 1.0) * log_q_;
        qpow_.push_back(std::exp(2.0 * n * log_q_));
        if (lw < -48.0) break;
    }
    constant_ = 0.0;
    double g3 = raw_value({0.5 * ap_, 0.5 * bp_});
    constant_ = half_period_values(geom.tau()).f3 - g3;
    double prod = 0.0;
    for (double qn : qpow_) prod += std::log1p(-qn);
    robin_ = constant_ - std::log(kPi / ap_) / kTwoPi - prod / kPi;
}

double ThetaGreen::log_sin_abs(cplx v) const {
    if (std::abs(v) < 0.5) return std::log(std::abs(std::sin(v)));
    double s = v.imag();
    cplx e = s >= 0.0 ? std::exp(cplx(-2.0 * s, 2.0 * v.real()))
                      : std::exp(cplx(2.0 * s, -2.0 * v.real()));
    return std::abs(s) - std::numbers::ln2 + std::log(std::abs(1.0 - e));
}

double ThetaGreen::product_log_abs(cplx v) const {
    double sum = 0.0;
    double two_re = 2.0 * v.real();
    double two_im = 2.0 * v.imag();
    for (std::size_t n = 1; n <= qpow_.size(); ++n) {
        double l = 2.0 * n * log_q_;
        cplx wp = std::exp(cplx(l - two_im, two_re));
        cplx wm = std::exp(cplx(l + two_im, -two_re));
        sum += std::log(std::abs(1.0 - wp)) + std::log(std::abs(1.0 - wm));
    }
    return sum;
}

double ThetaGreen::raw_value(Vec2 zi) const {
    cplx v = kPi / ap_ * cplx(zi.x, zi.y);
    double re_f = log_sin_abs(v) + product_log_abs(v);
    return -re_f / kTwoPi + zi.y * zi.y / (2.0 * ap_ * bp_) + constant_;
}

double ThetaGreen::value(Vec2 z) const { return raw_value(to_internal(checked_reduce(z))); }

double ThetaGreen::regular_part(Vec2 z) const {
    Vec2 zi = to_internal(geom_.reduce(z));
    cplx v = kPi / ap_ * cplx(zi.x, zi.y);
    double re_f = log_sinc_abs(v) + std::log(kPi / ap_) + product_log_abs(v);
    return -re_f / kTwoPi + zi.y * zi.y / (2.0 * ap_ * bp_) + constant_;
}

GreenValue ThetaGreen::eval(Vec2 z) const {
    Vec2 zi = to_internal(checked_reduce(z));
    cplx v = kPi / ap_ * cplx(zi.x, zi.y);

    cplx d1;
    cplx d2;
    if (std::abs(v) < 0.5) {
        cplx s = std::sin(v);
        d1 = std::cos(v) / s;
        d2 = -1.0 / (s * s);
    } else if (v.imag() >= 0.0) {
        cplx e = std::exp(cplx(-2.0 * v.imag(), 2.0 * v.real()));
        d1 = cplx(0.0, 1.0) * (e + 1.0) / (e - 1.0);
        d2 = 4.0 * e / ((e - 1.0) * (e - 1.0));
    } else {
        cplx e = std::exp(cplx(2.0 * v.imag(), -2.0 * v.real()));
        d1 = cplx(0.0, 1.0) * (1.0 + e) / (1.0 - e);
        d2 = 4.0 * e / ((1.0 - e) * (1.0 - e));
    }
    double two_re = 2.0 * v.real();
    double two_im = 2.0 * v.imag();
    const cplx i2(0.0, 2.0);
    for (std::size_t n = 1; n <= qpow_.size(); ++n) {
        double l = 2.0 * n * log_q_;
        cplx wp = std::exp(cplx(l - two_im, two_re));
        cplx wm = std::exp(cplx(l + two_im, -two_re));
        d1 += -i2 * wp / (1.0 - wp) + i2 * wm / (1.0 - wm);
        d2 += 4.0 * wp / ((1.0 - wp) * (1.0 - wp)) + 4.0 * wm / ((1.0 - wm) * (1.0 - wm));
    }
    double re_f = log_sin_abs(v) + product_log_abs(v);
    double c = kPi / ap_;
    cplx fz = c * d1;
    cplx fzz = c * c * d2;
    double inv_area = 1.0 / (ap_ * bp_);

    GreenValue out;
    out.value = -re_f / kTwoPi + zi.y * zi.y * 0.5 * inv_area + constant_;
    Vec2 g{-fz.real() / kTwoPi, fz.imag() / kTwoPi + zi.y * inv_area};
    Sym2 h{-fzz.real() / kTwoPi, fzz.imag() / kTwoPi, fzz.real() / kTwoPi + inv_area};
    if (swap_) {
        out.gradient = {g.y, g.x};
        out.hessian = {h.yy, h.xy, h.xx};
    } else {
        out.gradient = g;
        out.hessian = h;
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// Ewald representation

namespace {
constexpr double kEwaldCut = 46.0;  // exp(-46) ~ 1e-20
}

EwaldGreen::EwaldGreen(const TorusGeometry& geom) : GreenEvaluator(geom) {
    const double a = geom.a();
    const double b = geom.b();
    const double area = geom.area();
    alpha_ = kPi / area;

    double kmax = std::sqrt(4.0 * alpha_ * kEwaldCut);
    int nx = static_cast<int>(std::ceil(kmax * a / kTwoPi)) + 1;
    int ny = static_cast<int>(std::ceil(kmax * b / kTwoPi)) + 1;
    for (int i = -nx; i <= nx; ++i) {
        for (int j = -ny; j <= ny; ++j) {
            if (i == 0 && j == 0) continue;
            Vec2 k{kTwoPi * i / a, kTwoPi * j / b};
            double k2 = k.norm2();
            if (k2 / (4.0 * alpha_) > kEwaldCut) continue;
            waves_.push_back({k, std::exp(-k2 / (4.0 * alpha_)) / (area * k2)});
        }
    }

    // images within reach of any point in the cell
    double rmax = std::sqrt(kEwaldCut / alpha_) + 0.5 * std::hypot(a, b);
    int ix = static_cast<int>(std::ceil(rmax / a)) + 1;
    int iy = static_cast<int>(std::ceil(rmax / b)) + 1;
    for (int i = -ix; i <= ix; ++i)
        for (int j = -iy; j <= iy; ++j)
            if (std::hypot(i * a, j * b) <= rmax) images_.push_back({i * a, j * b});
    // origin first so that skip_origin can drop it
    std::stable_partition(images_.begin(), images_.end(),
                          [](Vec2 l) { return l.x == 0.0 && l.y == 0.0; });

    shift_ = -1.0 / (4.0 * alpha_ * area);
    robin_ = regular_part({0.0, 0.0});
}

double EwaldGreen::fourier_value(Vec2 r) const {
    double s = 0.0;
    for (const Wave& w : waves_) s += w.coef * std::cos(w.k.dot(r));
    return s;
}

double EwaldGreen::image_value(Vec2 r, bool skip_origin) const {
    double s = 0.0;
    for (std::size_t i = skip_origin ? 1 : 0; i < images_.size(); ++i) {
        double x = alpha_ * (r + images_[i]).norm2();
        if (x > kEwaldCut) continue;
        s += expint_e1(x);
    }
    return s / (4.0 * kPi);
}

double EwaldGreen::value(Vec2 z) const {
    Vec2 r = checked_reduce(z);
    return fourier_value(r) + image_value(r, false) + shift_;
}

double EwaldGreen::regular_part(Vec2 z) const {
    Vec2 r = geom_.reduce(z);
    double x0 = alpha_ * r.norm2();
    double core = (e1_plus_log(x0) - std::log(alpha_)) / (4.0 * kPi);
    return fourier_value(r) + image_value(r, true) + core + shift_;
}

GreenValue EwaldGreen::eval(Vec2 z) const {
    Vec2 r = checked_reduce(z);
    GreenValue out;
    out.value = shift_;
    for (const Wave& w : waves_) {
        double ph = w.k.dot(r);
        double c = std::cos(ph);
        double s = std::sin(ph);
        out.value += w.coef * c;
        out.gradient.x -= w.coef * w.k.x * s;
        out.gradient.y -= w.coef * w.k.y * s;
        out.hessian.xx -= w.coef * w.k.x * w.k.x * c;
        out.hessian.xy -= w.coef * w.k.x * w.k.y * c;
        out.hessian.yy -= w.coef * w.k.y * w.k.y * c;
    }
    const double inv4pi = 1.0 / (4.0 * kPi);
    for (Vec2 l : images_) {
        Vec2 p = r + l;
        double p2 = p.norm2();
        double x = alpha_ * p2;
        if (x > kEwaldCut) continue;
        double e = std::exp(-x);
        out.value += inv4pi * expint_e1(x);
        out.gradient.x += inv4pi * (-2.0 * p.x * e / p2);
        out.gradient.y += inv4pi * (-2.0 * p.y * e / p2);
        double cross = 4.0 * (alpha_ / p2 + 1.0 / (p2 * p2));
        out.hessian.xx += inv4pi * e * (-2.0 / p2 + p.x * p.x * cross);
        out.hessian.xy += inv4pi * e * (p.x * p.y * cross);
        out.hessian.yy += inv4pi * e * (-2.0 / p2 + p.y * p.y * cross);
    }
    return out;
}

// ---------------------------------------------------------------------------------------------
// half-period series

HalfPeriodTable half_period_values(double tau, double tol) {
    if (!(tau > 0.0) || !(tol > 0.0)) throw ConfigError("half_period_values needs tau > 0, tol > 0");
    HalfPeriodTable t;
    t.tau = tau;
    const double x = std::exp(-kTwoPi * tau);   // ratio of consecutive terms
    const double geo = 1.0 / (1.0 - x);

    // f1: terms log(1 + x^n) <= x^n
    double s1 = 0.0;
    double b1 = 0.0;
    int n1 = 0;
    for (int n = 1;; ++n) {
        double xn = std::exp(-kTwoPi * n * tau);
        s1 += std::log1p(xn);
        n1 = n;
        b1 = xn * x * geo / kPi;
        if (b1 <= tol) break;
        if (n >= kTermCap) throw TruncationFailure("f1 series not certified within term cap");
    }

    // f2, f3: y_n = exp(-pi (2n+1) tau)
    double s2 = 0.0;
    double s3 = 0.0;
    double b23 = 0.0;
    int n23 = 0;
    for (int n = 0;; ++n) {
        double yn = std::exp(-kPi * (2.0 * n + 1.0) * tau);
        s2 += std::log1p(-yn);
        s3 += std::log1p(yn);
        n23 = n + 1;
        double ynext = yn * x;
        b23 = ynext / (1.0 - ynext) * geo / kPi;
        if (b23 <= tol) break;
        if (n + 1 >= kTermCap) throw TruncationFailure("f2/f3 series not certified within term cap");
    }

    t.f1 = tau / 12.0 - std::numbers::ln2 / kTwoPi - s1 / kPi;
    t.f2 = -tau / 24.0 - s2 / kPi;
    t.f3 = -tau / 24.0 - s3 / kPi;
    t.truncation_terms = std::max(n1, n23);
    t.truncation_bound = std::max(b1, b23);
    return t;
}

namespace {

template <class F>
double bisect(F&& f, double lo, double hi) {
    double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return std::abs(f(lo)) < std::abs(f(hi)) ? lo : hi;
}

}  // namespace

TauThresholds tau_thresholds(double tol) {
    TauThresholds t;
    auto f1 = [&](double tau) { return half_period_values(tau, tol * 1e-3).f1; };
    auto f2 = [&](double tau) { return half_period_values(tau, tol * 1e-3).f2; };
    t.tau1 = bisect(f1, 1.0, 2.0);
    t.tau0 = bisect(f2, 0.5, 1.0);
    return t;
}

double robin_constant(const TorusGeometry& geom, double tol) {
    ThetaGreen green(geom);
    constexpr int kLevels = 7;
    const Vec2 dir{std::cos(0.3), std::sin(0.3)};
    double r = 0.1 * geom.min_side();
    std::array<std::array<double, kLevels>, kLevels> t{};
    for (int k = 0; k < kLevels; ++k, r *= 0.5) {
        t[k][0] = green.value(dir * r) + std::log(r) / kTwoPi;
        double f = 1.0;
        for (int j = 1; j <= k; ++j) {
            f *= 4.0;
            t[k][j] = t[k][j - 1] + (t[k][j - 1] - t[k - 1][j - 1]) / (f - 1.0);
        }
    }
    double best = t[kLevels - 1][kLevels - 1];
    double prev = t[kLevels - 2][kLevels - 2];
    if (std::abs(best - prev) > tol)
        throw TruncationFailure("Robin extrapolation disagreement " + std::to_string(best - prev));
    return best;
}

std::array<CriticalPointReport, 3> half_period_criticality(const TorusGeometry& geom) {
    ThetaGreen green(geom);
    std::array<CriticalPointReport, 3> out;
    for (int i = 1; i <= 3; ++i) {
        CriticalPointReport& r = out[i - 1];
        r.index = i;
        r.point = geom.half_period(i);
        GreenValue g = green.eval(r.point);
        r.value = g.value;
        r.gradient_norm = g.gradient.norm();
        r.hessian = g.hessian;
        double scale = std::abs(g.hessian.xx) + std::abs(g.hessian.yy) + std::abs(g.hessian.xy);
        double det = g.hessian.det();
        if (std::abs(det) <= 1e-10 * scale * scale)
            r.kind = "degenerate";
        else if (det < 0.0)
            r.kind = "saddle";
        else
            r.kind = g.hessian.trace() > 0.0 ? "minimum" : "maximum";
    }
    return out;
}

double zero_mean_quadrature(const GreenEvaluator& green, int n) {
    const TorusGeometry& geom = green.geometry();
    const double rho1 = 0.1 * geom.min_side();
    const double rho2 = 0.45 * geom.min_side();
    auto smooth_step = [](double t) {
        if (t <= 0.0) return 0.0;
        if (t >= 1.0) return 1.0;
        double e0 = std::exp(-1.0 / t);
        double e1 = std::exp(-1.0 / (1.0 - t));
        return e0 / (e0 + e1);
    };
    auto bump = [&](double r) { return smooth_step((rho2 - r) / (rho2 - rho1)); };

    const double hx = geom.a() / n;
    const double hy = geom.b() / n;
    double sum = 0.0;
    for (int j = 0; j < n; ++j) {
        double row = 0.0;
        for (int i = 0; i < n; ++i) {
            Vec2 z = geom.reduce({i * hx, j * hy});
            double r = z.norm();
            if (r < rho1)
                row += green.regular_part(z);
            else
                row += green.value(z) + bump(r) * std::log(r) / kTwoPi;
        }
        sum += row;
    }
    double smooth_integral = sum * hx * hy;
    // integral of bump(r) log r over the plane, in polar coordinates
    double inner = 0.5 * rho1 * rho1 * (std::log(rho1) - 0.5);
    double outer = integrate_adaptive([&](double r) { return bump(r) * r * std::log(r); }, rho1, rho2,
                                      1e-12);
    double log_integral = kTwoPi * (inner + outer);
    return (smooth_integral - log_integral / kTwoPi) / geom.area();
}

}  // namespace mtb
