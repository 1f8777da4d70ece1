#include "mtb/residual.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/quadrature.hpp"

namespace mtb {

namespace {

constexpr double kPi = std::numbers::pi;

double log_add(double a, double b) {
    if (a == -INFINITY) return b;
    if (b == -INFINITY) return a;
    double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// C-infinity step: 1 on [0, 1], 0 on [2, inf)
double smooth_step(double s) {
    if (s <= 1.0) return 1.0;
    if (s >= 2.0) return 0.0;
    double a = std::exp(-1.0 / (2.0 - s));
    double b = std::exp(-1.0 / (s - 1.0));
    return a / (a + b);
}

}  // namespace

const char* to_string(Regime r) {
    switch (r) {
        case Regime::core: return "core";
        case Regime::log_annulus: return "log_annulus";
        case Regime::sqrt_annulus: return "sqrt_annulus";
        case Regime::outer: return "outer";
        case Regime::far: return "far";
    }
    return "?";
}

WeightProfile::WeightProfile(const BubbleParams& params, double delta_const)
    : params_(&params), delta_const_(delta_const) {
    if (!(delta_const > 0.0)) throw ConfigError("delta_const must be positive");
}

double WeightProfile::log_inner_radius(std::size_t j) const {
    const double le = params_->bubbles[j].log_eps;
    return std::log(delta_const_) + le + 2.0 * std::log(std::abs(le));
}

double WeightProfile::log_sqrt_radius(std::size_t j) const { return 0.5 * params_->bubbles[j].log_eps; }

double WeightProfile::log_rho_j(std::size_t j, double log_r) const {
    const Bubble& b = params_->bubbles[j];
    const double log_e = params_->log_exp_u_log(j, log_r);
    const double w = log_e + 2.0 * b.log_eps;
    const double s = std::exp(log_r - log_inner_radius(j));
    const double c1 = Cutoff::unit(s);
    const double c2 = 1.0 - Cutoff::unit(2.0 * s);
    double out = -INFINITY;
    if (c1 > 0.0) out = std::log(c1) + std::log(1.0 + std::abs(w) + w * w) + log_e;
    if (c2 > 0.0) {
        const double lam = params_->lambda;
        double inner = log_add(std::log(1.0 + std::abs(log_r)) + lam * b.m * b.m * w * w, -std::log(lam));
        out = log_add(out, std::log(c2) + inner + log_e);
    }
    return out;
}

double WeightProfile::log_rho(const Probe& p) const {
    if (p.bubble < 0 || p.log_r >= std::log(params_->cutoff.r0())) return 0.0;
    return log_add(0.0, log_rho_j(static_cast<std::size_t>(p.bubble), p.log_r));
}

Regime WeightProfile::regime(const Probe& p) const {
    if (p.bubble < 0) return Regime::far;
    const std::size_t j = static_cast<std::size_t>(p.bubble);
    if (p.log_r >= std::log(params_->cutoff.r0())) return Regime::outer;
    if (p.log_r < log_inner_radius(j)) return Regime::core;
    if (p.log_r < log_sqrt_radius(j)) return Regime::log_annulus;
    return Regime::sqrt_annulus;
}

SampleCloud build_cloud(const BubbleParams& params, const WeightProfile& rho, const CloudSpec& spec) {
    SampleCloud cloud;
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double lr0 = std::log(params.cutoff.r0());
    const double lr2 = std::log(2.0 * params.cutoff.r0()) - 1e-9;
    for (std::size_t j = 0; j < params.size(); ++j) {
        const double lo = params.bubbles[j].log_delta + std::log(1e-3);
        const double t1 = std::clamp(rho.log_inner_radius(j), lo, lr0);
        const double t2 = std::clamp(rho.log_sqrt_radius(j), t1, lr0);
        const double bounds[5] = {lo, t1, t2, lr0, lr2};
        for (int reg = 0; reg < 4; ++reg) {
            const double a = bounds[reg];
            const double b = bounds[reg + 1];
            if (!(b - a > 1e-12)) continue;
            for (int s = 0; s < spec.shells; ++s) {
                const double t = a + (s + 0.5) / spec.shells * (b - a);
                const double phase = unif(rng);
                for (int k = 0; k < spec.angular; ++k) {
                    const double th = 2.0 * kPi * (k + phase) / spec.angular;
                    cloud.probes.push_back(params.probe(j, t, th));
                    cloud.regimes.push_back(static_cast<Regime>(reg));
                }
            }
            cloud.shells[reg] += spec.shells;
        }
    }
    const TorusGeometry& g = params.geometry();
    const int nx = spec.far_nodes;
    const int ny = std::max(1, static_cast<int>(std::lround(spec.far_nodes * g.b() / g.a())));
    const double u = unif(rng);
    const double v = unif(rng);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            Probe p = params.probe(Vec2{(i + u) * g.a() / nx, (j + v) * g.b() / ny});
            if (p.bubble >= 0) continue;
            cloud.probes.push_back(p);
            cloud.regimes.push_back(Regime::far);
        }
    cloud.shells[static_cast<int>(Regime::far)] = ny;
    return cloud;
}

StarNorm star_norm(const std::function<Scaled(const Probe&)>& h, const WeightProfile& rho,
                   const SampleCloud& cloud) {
    const long n = static_cast<long>(cloud.probes.size());
    std::vector<double> ratio(n), absval(n);
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) {
        Scaled s = h(cloud.probes[i]);
        if (s.mantissa == 0.0) {
            ratio[i] = 0.0;
            absval[i] = 0.0;
            continue;
        }
        const double la = s.log_abs();
        ratio[i] = std::exp(la - rho.log_rho(cloud.probes[i]));
        absval[i] = std::exp(la);
    }
    StarNorm out;
    for (long i = 0; i < n; ++i) {
        if (!std::isfinite(ratio[i])) throw Overflow("non-finite weighted sample in star norm");
        const int reg = static_cast<int>(cloud.regimes[i]);
        out.regime_sup[reg] = std::max(out.regime_sup[reg], ratio[i]);
        out.sup_norm = std::max(out.sup_norm, absval[i]);
        if (ratio[i] > out.value) {
            out.value = ratio[i];
            out.regime = cloud.regimes[i];
            out.where = cloud.probes[i];
        }
    }
    return out;
}

double integrate_torus(const BubbleParams& params,
                       const std::function<double(const Probe&, double)>& integrand,
                       const MomentOptions& opt) {
    const double r0 = params.cutoff.r0();
    const double lr0 = std::log(r0);
    const double lr2 = std::log(2.0 * r0);
    const int m = opt.angular;
    double total = 0.0;
    for (std::size_t j = 0; j < params.size(); ++j) {
        const double ld = params.bubbles[j].log_delta;
        std::vector<double> br{ld - 40.0, ld - 10.0};
        for (int k = -9; k <= 10; ++k) br.push_back(ld + k);
        for (double t = ld + 18.0; t < lr0; t += 32.0) br.push_back(t);
        br.push_back(lr0);
        for (double& t : br) t = std::min(t, lr2);
        br.push_back(lr2);
        std::sort(br.begin(), br.end());
        br.erase(std::unique(br.begin(), br.end()), br.end());
        auto radial = [&](double t) {
            const double beta = smooth_step(std::exp(t) / r0);
            if (beta == 0.0) return 0.0;
            double s = 0.0;
            for (int k = 0; k < m; ++k) s += integrand(params.probe(j, t, 2.0 * kPi * k / m), 2.0 * t);
            return beta * s * (2.0 * kPi / m);
        };
        for (std::size_t p = 0; p + 1 < br.size(); ++p)
            total += integrate_adaptive(radial, br[p], br[p + 1], opt.rel_tol, 1e-300);
    }
    const TorusGeometry& g = params.geometry();
    const int nx = opt.far_nodes;
    const int ny = std::max(16, static_cast<int>(std::lround(opt.far_nodes * g.b() / g.a())));
    const double hx = g.a() / nx;
    const double hy = g.b() / ny;
    Field vals;
    sample_nodes(nx, ny, hx, hy,
                 [&](Vec2 x) {
                     Probe p = params.probe(x);
                     double w = 1.0;
                     if (p.bubble >= 0) w -= smooth_step(std::exp(p.log_r) / r0);
                     return w == 0.0 ? 0.0 : w * integrand(p, 0.0);
                 },
                 vals);
    total += field_sum(vals, nx) * hx * hy;
    return total;
}

Moments compute_moments(const AnsatzField& v, const MomentOptions& opt) {
    const BubbleParams& par = v.params();
    const double lam = par.lambda;
    Moments mo;
    mo.lambda = lam;
    mo.vev = integrate_torus(
        par, [&](const Probe& p, double lj) { double x = v.value(p); return lam * x * std::exp(lam * x * x + lj); },
        opt);
    mo.ev = integrate_torus(
        par, [&](const Probe& p, double lj) { double x = v.value(p); return std::exp(lam * x * x + lj); }, opt);
    auto source = [&](const Probe& p, double lj, bool times_v) {
        if (p.bubble < 0) return 0.0;
        const std::size_t j = static_cast<std::size_t>(p.bubble);
        const double c = par.cutoff(std::exp(p.log_r));
        if (c == 0.0) return 0.0;
        double s = par.bubbles[j].m * c * std::exp(par.log_exp_u_log(j, p.log_r) + lj);
        return times_v ? s * v.value(p) : s;
    };
    mo.source_mass = integrate_torus(par, [&](const Probe& p, double lj) { return source(p, lj, false); }, opt);
    const double sv = integrate_torus(par, [&](const Probe& p, double lj) { return source(p, lj, true); }, opt);
    double msum = 0.0;
    double m2sum = 0.0;
    double mass = 0.0;
    for (const Bubble& b : par.bubbles) {
        msum += b.m;
        m2sum += b.m * b.m;
        mass += b.m * b.mass;
    }
    // -int V Lap V with Lap V = sum m_j (M_j / |S| - chi_j e^{U_j})
    mo.grad2 = sv - mass * v.mean();
    mo.vev_target = 8.0 * kPi * msum;
    mo.ev_target = 16.0 * kPi * m2sum + par.geometry().area();
    return mo;
}

double ansatz_energy(const Moments& m) { return 0.5 * m.lambda * (m.grad2 - m.ev); }

ResidualField::ResidualField(const AnsatzField& v, const MomentOptions& opt) : v_(&v) {
    moments_ = compute_moments(v, opt);
    double mass = 0.0;
    for (const Bubble& b : v.params().bubbles) mass += b.m * b.mass;
    shift_ = (mass - moments_.vev) / v.params().geometry().area();
}

Scaled ResidualField::residual(const Probe& p) const {
    const BubbleParams& par = v_->params();
    const double lam = par.lambda;
    const double x = v_->value(p);
    const double q = lam * x * x;
    double mc = 0.0;
    double log_e = -INFINITY;
    if (p.bubble >= 0) {
        const std::size_t j = static_cast<std::size_t>(p.bubble);
        log_e = par.log_exp_u_log(j, p.log_r);
        mc = par.bubbles[j].m * par.cutoff(std::exp(p.log_r));
    }
    // shift - m chi e^U + lambda V e^{lambda V^2}, on the scale of the largest exponent
    const double s = std::max({0.0, q, mc > 0.0 ? log_e : 0.0});
    double mant = shift_ * std::exp(-s) + lam * x * std::exp(q - s);
    if (mc > 0.0) mant -= mc * std::exp(log_e - s);
    return {mant, s};
}

Scaled ResidualField::linearization_gap(const Probe& p) const {
    const BubbleParams& par = v_->params();
    const double lam = par.lambda;
    const double x = v_->value(p);
    const double q = lam * x * x;
    double c = 0.0;
    double log_e = -INFINITY;
    if (p.bubble >= 0) {
        const std::size_t j = static_cast<std::size_t>(p.bubble);
        log_e = par.log_exp_u_log(j, p.log_r);
        c = par.cutoff(std::exp(p.log_r));
    }
    const double s = std::max(q, c > 0.0 ? log_e : q);
    double mant = lam * (1.0 + 2.0 * q) * std::exp(q - s);
    if (c > 0.0) mant -= c * std::exp(log_e - s);
    return {mant, s};
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw ConfigError("slope fit needs at least two points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double lx = std::log(x[i]);
        double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    SlopeFit f;
    const double d = n * sxx - sx * sx;
    f.slope = (n * sxy - sx * sy) / d;
    f.intercept = (sy - f.slope * sx) / n;
    if (n > 2) {
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double e = std::log(y[i]) - f.intercept - f.slope * std::log(x[i]);
            ss += e * e;
        }
        f.stderr_slope = std::sqrt(ss / (n - 2) * n / d);
    }
    return f;
}

ResidualReport residual_report(const Configuration& cfg, double lambda,
                               std::shared_ptr<const GreenEvaluator> green, const ResidualOptions& opt,
                               double r0) {
    BubbleParams params = close_parameters(cfg, lambda, green, r0);
    ResidualReport rep;
    rep.lambda = lambda;
    rep.warnings = params.warnings;
    AnsatzField v(std::move(params), ProjectionMode::expansion);
    WeightProfile rho(v.params(), opt.delta_const);
    SampleCloud cloud = build_cloud(v.params(), rho, opt.cloud);
    ResidualField rf(v, opt.moments);
    rep.moments = rf.moments();
    rep.energy = ansatz_energy(rep.moments);
    rep.residual = star_norm([&](const Probe& p) { return rf.residual(p); }, rho, cloud);
    rep.gap = star_norm([&](const Probe& p) { return rf.linearization_gap(p); }, rho, cloud);
    return rep;
}

}  // namespace mtb
