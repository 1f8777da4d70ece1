#include "mtb/ansatz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/quadrature.hpp"

namespace mtb {

namespace {

constexpr double kPi = std::numbers::pi;
const double kLog8 = std::log(8.0);

}  // namespace

double Cutoff::unit(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    double t = s - 1.0;
    return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

double Cutoff::unit_d1(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    double t = s - 1.0;
    return -30.0 * t * t * (1.0 - t) * (1.0 - t);
}

double Cutoff::unit_d2(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    double t = s - 1.0;
    return -60.0 * t * (1.0 - t) * (1.0 - 2.0 * t);
}

double standard_bubble(Vec2 y, double mu) {
    double mu2 = mu * mu;
    double d = mu2 + y.norm2();
    return std::log(8.0 * mu2 / (d * d));
}

double log_sum_squares(double log_x, double log_y) {
    double hi = std::max(log_x, log_y);
    double lo = std::min(log_x, log_y);
    if (hi == -INFINITY) return -INFINITY;
    return 2.0 * hi + std::log1p(std::exp(2.0 * (lo - hi)));
}

double BubbleParams::min_delta() const {
    double d = INFINITY;
    for (const Bubble& b : bubbles) d = std::min(d, b.delta());
    return d;
}

Configuration BubbleParams::configuration() const {
    Configuration c;
    for (const Bubble& b : bubbles) {
        c.points.push_back(b.center);
        c.weights.push_back(b.m);
    }
    return c;
}

double BubbleParams::log_exp_u_log(std::size_t j, double log_r) const {
    double ld = bubbles[j].log_delta;
    return kLog8 + 2.0 * ld - 2.0 * log_sum_squares(ld, log_r);
}

double BubbleParams::source(std::size_t j, Vec2 x) const {
    double r = local(j, x).norm();
    double c = cutoff(r);
    if (c == 0.0) return 0.0;
    return c * std::exp(log_exp_u(j, r));
}

double BubbleParams::surrogate(std::size_t j, Vec2 x) const {
    Vec2 y = local(j, x);
    return surrogate_local(j, std::log(y.norm()), y);
}

double BubbleParams::surrogate_local(std::size_t j, double log_r, Vec2 y) const {
    const double ld = bubbles[j].log_delta;
    const double r = std::exp(log_r);
    if (r < cutoff.r0()) return 8.0 * kPi * green->regular_part(y) - 2.0 * log_sum_squares(ld, log_r);
    double ell = std::log1p(std::exp(2.0 * (ld - log_r)));
    return 8.0 * kPi * green->value(y) - 2.0 * cutoff(r) * ell;
}

Probe BubbleParams::probe(Vec2 x) const {
    Probe p;
    p.x = geometry().reduce(x);
    for (std::size_t j = 0; j < bubbles.size(); ++j) {
        Vec2 y = local(j, x);
        double r = y.norm();
        if (r < 2.0 * cutoff.r0()) {
            p.bubble = static_cast<int>(j);
            p.log_r = std::log(r);
            p.theta = std::atan2(y.y, y.x);
            break;
        }
    }
    return p;
}

Probe BubbleParams::probe(std::size_t j, double log_r, double theta) const {
    Probe p;
    p.bubble = static_cast<int>(j);
    p.log_r = log_r;
    p.theta = theta;
    const double r = std::exp(log_r);
    p.x = geometry().reduce(bubbles[j].center + Vec2{r * std::cos(theta), r * std::sin(theta)});
    return p;
}

double BubbleParams::profile(std::size_t j, Vec2 x) const {
    return log_exp_u(j, local(j, x).norm()) + 2.0 * bubbles[j].log_eps;
}

void fill_bubble_integrals(Bubble& b, const Cutoff& cutoff, double area) {
    const double rr = cutoff.r0();
    const double d2 = std::exp(2.0 * b.log_delta);
    const double annulus_mass = integrate_adaptive(
        [&](double r) {
            double q = d2 + r * r;
            return cutoff(r) * 16.0 * kPi * d2 * r / (q * q);
        },
        rr, 2.0 * rr, 1e-12, 1e-300);
    b.mass = 8.0 * kPi / (1.0 + d2 / (rr * rr)) + annulus_mass;

    double tail = d2 > 1e-300 ? d2 * std::log1p(rr * rr / d2) : d2 * (2.0 * std::log(rr) - 2.0 * b.log_delta);
    double core = kPi * (rr * rr * std::log1p(d2 / (rr * rr)) + tail);
    double ann = 2.0 * kPi * integrate_adaptive([&](double r) { return cutoff(r) * std::log1p(d2 / (r * r)) * r; },
                                                rr, 2.0 * rr, 1e-12, 1e-300);
    b.surrogate_mean = -2.0 * (core + ann) / area;
}

BubbleParams bubble_at_scale(std::shared_ptr<const GreenEvaluator> green, Vec2 center, double log_delta,
                             double r0) {
    const TorusGeometry& geom = green->geometry();
    BubbleParams p;
    p.lambda = 1.0;
    p.cutoff = Cutoff(r0 > 0.0 ? r0 : geom.min_side() / 8.0);
    p.green = green;
    Bubble b;
    b.center = center;
    b.m = 1.0;
    b.log_delta = log_delta;
    b.log_mu = log_delta;
    fill_bubble_integrals(b, p.cutoff, geom.area());
    p.bubbles.push_back(b);
    return p;
}

BubbleParams close_parameters(const Configuration& cfg, double lambda,
                              std::shared_ptr<const GreenEvaluator> green, double r0) {
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
    const TorusGeometry& geom = green->geometry();
    validate_configuration(cfg, geom);
    BubbleParams p;
    p.lambda = lambda;
    p.cutoff = Cutoff(r0 > 0.0 ? r0 : geom.min_side() / 8.0);
    p.green = green;
    const double rr = p.cutoff.r0();
    const std::size_t k = cfg.size();
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            if (geom.distance(cfg.points[i], cfg.points[j]) < 4.0 * rr * (1.0 - 1e-12))
                throw SeparationViolation("bubble centers closer than 4 r0");

    const double robin = green->robin();
    for (std::size_t j = 0; j < k; ++j) {
        Bubble b;
        b.center = cfg.points[j];
        b.m = cfg.weights[j];
        const double l2m2 = std::log(2.0 * b.m * b.m);
        double log8mu2 = -2.0 * l2m2 + 8.0 * kPi * robin;
        for (std::size_t i = 0; i < k; ++i)
            if (i != j) log8mu2 += 8.0 * kPi * cfg.weights[i] / b.m * green->value(cfg.points[i] - b.center);
        b.log_mu = 0.5 * (log8mu2 - kLog8);
        b.log_eps = -0.25 * (1.0 / (2.0 * lambda * b.m * b.m) - 2.0 * l2m2);
        b.log_delta = b.log_mu + b.log_eps;

        fill_bubble_integrals(b, p.cutoff, geom.area());
        if (b.log_delta < std::log(1e-12))
            p.warnings.push_back("UnresolvableScale: bubble " + std::to_string(j) + " has delta = exp(" +
                                 std::to_string(b.log_delta) + ")");
        p.bubbles.push_back(b);
    }
    return p;
}

const char* to_string(ProjectionMode m) {
    switch (m) {
        case ProjectionMode::grid: return "grid";
        case ProjectionMode::expansion: return "expansion";
        case ProjectionMode::corrected: return "corrected";
    }
    return "?";
}

Field projection_remainder(std::size_t j, const BubbleParams& params, const SpectralOps& ops) {
    const PeriodicGrid& grid = ops.grid();
    const Bubble& b = params.bubbles[j];
    const double d2 = std::exp(2.0 * b.log_delta);
    const double area = params.geometry().area();
    const Cutoff& chi = params.cutoff;
    // -Lap D = -2 ell Lap(chi) - 4 chi' ell' + (8 pi - M) / area
    const double shift = (8.0 * kPi - b.mass) / area;
    Field rhs;
    sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(),
                 [&](Vec2 x) {
                     double r = params.local(j, x).norm();
                     if (r <= chi.r0() || r >= 2.0 * chi.r0()) return shift;
                     double ell = std::log1p(d2 / (r * r));
                     double dell = -2.0 * d2 / (r * (r * r + d2));
                     return -2.0 * ell * chi.laplacian(r) - 4.0 * chi.d1(r) * dell + shift;
                 },
                 rhs);
    for (double& v : rhs) v = -v;
    Field d = ops.solve_poisson(rhs);
    for (double& v : d) v -= b.surrogate_mean;
    return d;
}

Field project_bubble(std::size_t j, const BubbleParams& params, const SpectralOps& ops, ProjectionMode mode) {
    const PeriodicGrid& grid = ops.grid();
    Field out;
    if (mode == ProjectionMode::grid) {
        if (params.bubbles[j].delta() < 4.0 * grid.h_max())
            throw GridTooCoarse("grid spacing " + std::to_string(grid.h_max()) + " does not resolve delta = " +
                                std::to_string(params.bubbles[j].delta()));
        Field src;
        sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(), [&](Vec2 x) { return -params.source(j, x); },
                     src);
        return ops.solve_poisson(src);
    }
    sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(), [&](Vec2 x) { return params.surrogate(j, x); }, out);
    if (mode == ProjectionMode::corrected) {
        Field d = projection_remainder(j, params, ops);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += d[i];
    }
    return out;
}

AnsatzField::AnsatzField(BubbleParams params, ProjectionMode mode, int grid_nx, int grid_ny)
    : params_(std::move(params)), mode_(mode) {
    if (mode_ == ProjectionMode::expansion) return;
    const TorusGeometry& g = params_.geometry();
    if (grid_nx <= 0) grid_nx = 256;
    if (grid_ny <= 0) grid_ny = 2 * std::max(8, static_cast<int>(std::lround(0.5 * grid_nx * g.b() / g.a())));
    grid_ = std::make_unique<PeriodicGrid>(g, grid_nx, grid_ny);
    SpectralOps ops(*grid_);
    for (std::size_t j = 0; j < params_.size(); ++j) {
        Field pu = project_bubble(j, params_, ops, mode_);
        Field s;
        sample_nodes(grid_->nx(), grid_->ny(), grid_->hx(), grid_->hy(),
                     [&](Vec2 x) { return params_.surrogate(j, x); }, s);
        for (std::size_t i = 0; i < pu.size(); ++i) pu[i] -= s[i];
        corrections_.push_back(std::move(pu));
    }
}

double AnsatzField::correction(std::size_t j, Vec2 x) const {
    if (corrections_.empty()) return 0.0;
    return interpolate_cubic(*grid_, corrections_[j], x);
}

double AnsatzField::value(Vec2 x) const {
    double v = 0.0;
    for (std::size_t j = 0; j < params_.size(); ++j)
        v += params_.bubbles[j].m * (params_.surrogate(j, x) + correction(j, x));
    return v;
}

double AnsatzField::value(const Probe& p) const {
    if (p.bubble < 0) return value(p.x);
    const std::size_t jb = static_cast<std::size_t>(p.bubble);
    const double r = std::exp(p.log_r);
    const Vec2 y{r * std::cos(p.theta), r * std::sin(p.theta)};
    double v = 0.0;
    for (std::size_t j = 0; j < params_.size(); ++j) {
        double s = j == jb ? params_.surrogate_local(j, p.log_r, y) : params_.surrogate(j, p.x);
        v += params_.bubbles[j].m * (s + correction(j, p.x));
    }
    return v;
}

double AnsatzField::mean() const {
    if (mode_ != ProjectionMode::expansion) return 0.0;
    double s = 0.0;
    for (const Bubble& b : params_.bubbles) s += b.m * b.surrogate_mean;
    return s;
}

double AnsatzField::laplacian(Vec2 x) const {
    const double area = params_.geometry().area();
    double s = 0.0;
    for (std::size_t j = 0; j < params_.size(); ++j) {
        const Bubble& b = params_.bubbles[j];
        s += b.m * (b.mass / area - params_.source(j, x));
    }
    return s;
}

Field AnsatzField::nodal_values(const PeriodicGrid& grid) const {
    Field out;
    sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(), [&](Vec2 x) { return value(x); }, out);
    return out;
}

ConcentrationIntegrals concentration_integrals(const TestFunction& fbar, double delta, Vec2 xi,
                                               const Cutoff& cutoff, double a, int angular_nodes) {
    const double d2 = delta * delta;
    auto angular_mean = [&](double r) {
        double s = 0.0;
        for (int k = 0; k < angular_nodes; ++k) {
            double th = 2.0 * kPi * (k + 0.5) / angular_nodes;
            s += fbar.value(xi + Vec2{r * std::cos(th), r * std::sin(th)});
        }
        return s / angular_nodes;
    };
    std::vector<double> breaks{0.0};
    for (double s = delta; s < cutoff.r0(); s *= 10.0) breaks.push_back(s);
    breaks.push_back(cutoff.r0());
    breaks.push_back(2.0 * cutoff.r0());

    ConcentrationIntegrals out;
    for (int which = 0; which < 3; ++which) {
        auto integrand = [&](double r) {
            double q = d2 + r * r;
            double eu = 8.0 * d2 / (q * q);
            double k = which == 0 ? eu : which == 1 ? eu / q : eu * (a * d2 - r * r) / (q * q);
            return 2.0 * kPi * r * cutoff(r) * k * angular_mean(r);
        };
        double total = 0.0;
        for (std::size_t p = 0; p + 1 < breaks.size(); ++p)
            total += integrate_adaptive(integrand, breaks[p], breaks[p + 1], 1e-13, 1e-300);
        out.values[which] = total;
    }
    const double f = fbar.value(xi);
    const double lf = fbar.laplacian ? fbar.laplacian(xi) : 0.0;
    out.leading[0] = 8.0 * kPi * f;
    out.leading[1] = 4.0 * kPi * f / d2 + kPi * lf;
    out.leading[2] = 4.0 * kPi / (3.0 * d2) * (2.0 * a - 1.0) * f + (a - 2.0) * kPi / 3.0 * lf;
    return out;
}

}  // namespace mtb
