#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/residual.hpp"

using namespace mtb;

namespace {

constexpr double kPi = std::numbers::pi;

std::shared_ptr<const GreenEvaluator> torus(double a, double b) {
    return std::make_shared<ThetaGreen>(TorusGeometry(a, b));
}

Configuration single(double m) {
    Configuration c;
    c.points = {{0.2, 0.3}};
    c.weights = {m};
    return c;
}

// square-torus p3 diagonal weight for two equal bubbles
Configuration square_pair() {
    Configuration c;
    c.points = {{0.0, 0.0}, {0.5, 0.5}};
    c.weights = {0.0785986404075, 0.0785986404075};
    return c;
}

// direct transcription of the weight, in plain arithmetic
double rho_direct(const BubbleParams& p, double dc, double r) {
    const Bubble& b = p.bubbles[0];
    if (r >= p.cutoff.r0()) return 1.0;
    const double eps = b.eps();
    const double mu = b.mu();
    const double le = std::abs(std::log(eps));
    const double s = r / eps;
    const double w = std::log(8.0 * mu * mu / std::pow(mu * mu + s * s, 2));
    const double rad = dc * eps * le * le;
    const double eu = std::exp(w) / (eps * eps);
    const double t1 = Cutoff::unit(r / rad) * (1.0 + std::abs(w) + w * w) * eu;
    const double t2 = (1.0 - Cutoff::unit(2.0 * r / rad)) *
                      ((1.0 + std::abs(std::log(r))) * std::exp(p.lambda * b.m * b.m * w * w) + 1.0 / p.lambda) * eu;
    return 1.0 + t1 + t2;
}

}  // namespace

TEST_CASE("weight profile matches its formula") {
    auto green = torus(1.0, 1.0);
    BubbleParams p = close_parameters(single(1.0 / std::sqrt(2.0)), 0.027, green);
    WeightProfile rho(p, 10.0);
    REQUIRE(std::exp(rho.log_inner_radius(0)) < p.cutoff.r0());
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(std::log(1e-3 * p.bubbles[0].delta()), std::log(0.3));
    for (int i = 0; i < 100; ++i) {
        double lr = u(rng);
        Probe pr = p.probe(0, lr, 0.7);
        double lr_impl = rho.log_rho(pr);
        CHECK(lr_impl >= 0.0);
        CHECK(std::exp(lr_impl) == doctest::Approx(rho_direct(p, 10.0, std::exp(lr))).epsilon(1e-12));
    }
    CHECK(rho.log_rho(p.probe(Vec2{0.7, 0.8})) == 0.0);
}

TEST_CASE("sample cloud covers each regime") {
    auto green = torus(1.0, 1.0);
    BubbleParams p = close_parameters(square_pair(), 0.01, green);
    WeightProfile rho(p);
    CloudSpec spec;
    SampleCloud cloud = build_cloud(p, rho, spec);
    for (int r = 0; r < 4; ++r) CHECK(cloud.shells[r] >= 2 * spec.shells);  // two bubbles
    int far = 0;
    for (Regime r : cloud.regimes) far += r == Regime::far;
    CHECK(far > 1000);
    for (std::size_t i = 0; i < cloud.probes.size(); i += 97) CHECK(rho.regime(cloud.probes[i]) == cloud.regimes[i]);
}

TEST_CASE("star norm elementary bounds") {
    auto green = torus(1.0, 1.0);
    BubbleParams p = close_parameters(single(1.0 / std::sqrt(2.0)), 0.05, green);
    WeightProfile rho(p);
    SampleCloud cloud = build_cloud(p, rho, {});
    StarNorm c = star_norm([](const Probe&) { return Scaled{-2.5, 0.0}; }, rho, cloud);
    CHECK(c.value <= 2.5);
    CHECK(c.sup_norm == doctest::Approx(2.5));
    StarNorm f = star_norm([](const Probe& q) { return Scaled{std::cos(q.x.x * 7.0), 0.0}; }, rho, cloud);
    CHECK(f.value <= f.sup_norm);
}

TEST_CASE("multiscale moments agree with a brute-force trapezoid") {
    // moderate lambda: delta ~ 0.02 is resolved by a fine lattice
    auto green = torus(1.0, 1.0);
    BubbleParams p = close_parameters(single(1.0 / std::sqrt(2.0)), 2.0, green);
    AnsatzField v(p, ProjectionMode::expansion);
    Moments mo = compute_moments(v);
    const int n = 2048;
    const double h = 1.0 / n;
    double ev = 0.0;
    double vev = 0.0;
    double mass = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            Vec2 x{i * h, j * h};
            double val = v.value(x);
            double e = std::exp(p.lambda * val * val);
            ev += e;
            vev += p.lambda * val * e;
            mass += p.source(0, x);
        }
    CHECK(mo.ev == doctest::Approx(ev * h * h).epsilon(1e-8));
    CHECK(mo.vev == doctest::Approx(vev * h * h).epsilon(1e-8));
    CHECK(mo.source_mass == doctest::Approx(p.bubbles[0].m * mass * h * h).epsilon(1e-8));
    CHECK(mo.source_mass == doctest::Approx(p.bubbles[0].m * p.bubbles[0].mass).epsilon(1e-9));
}

TEST_CASE("residual agrees with plain evaluation and integrates to zero") {
    auto green = torus(1.0, 1.0);
    BubbleParams p = close_parameters(single(1.0 / std::sqrt(2.0)), 0.5, green);
    AnsatzField v(p, ProjectionMode::expansion);
    ResidualField rf(v);
    const double lam = p.lambda;
    const double area = 1.0;
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        Vec2 x{u(rng), u(rng)};
        if (i < 50) x = p.bubbles[0].center + Vec2{0.05 * u(rng), 0.05 * u(rng)};
        double val = v.value(x);
        double direct = v.laplacian(x) + lam * val * std::exp(lam * val * val) - rf.moments().vev / area;
        CHECK(rf.residual(x) == doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    }
    double total = integrate_torus(
        p,
        [&](const Probe& q, double lj) {
            Scaled s = rf.residual(q);
            return s.mantissa * std::exp(s.log_scale + lj);
        },
        {});
    CHECK(std::abs(total) < 1e-10 * rf.moments().vev);
}

TEST_CASE("residual stays finite where e^U overflows") {
    auto green = torus(1.0, 1.0);
    ResidualReport rep = residual_report(square_pair(), 0.005, green);
    CHECK(std::isfinite(rep.residual.value));
    CHECK(std::isfinite(rep.gap.value));
    CHECK(rep.moments.vev == doctest::Approx(rep.moments.vev_target).epsilon(0.01));
    CHECK(rep.moments.ev == doctest::Approx(rep.moments.ev_target).epsilon(0.01));
    // mass normalizations of the limit profile
    CHECK(rep.energy == doctest::Approx(4.0 * kPi).epsilon(0.01));
}

TEST_CASE("log-log slope fit") {
    std::vector<double> x{1, 2, 4, 8}, y;
    for (double t : x) y.push_back(3.0 * std::pow(t, 1.5));
    SlopeFit f = fit_loglog(x, y);
    CHECK(f.slope == doctest::Approx(1.5));
    CHECK(std::exp(f.intercept) == doctest::Approx(3.0));
    CHECK(f.stderr_slope < 1e-12);
}

TEST_CASE("kernel fields and Gram matrix") {
    auto green = torus(0.5, 0.5);
    BubbleParams p = bubble_at_scale(green, {0.125, 0.25}, std::log(1e-2));
    PeriodicGrid grid(green->geometry(), 256, 256);
    SpectralOps ops(grid);
    KernelFields kf = kernel_fields(0, p, ops);
    // node (i, j) = center
    const std::size_t c = static_cast<std::size_t>(std::lround(0.125 / grid.hx())) +
                          256 * static_cast<std::size_t>(std::lround(0.25 / grid.hy()));
    CHECK(kf.z[0][c] == doctest::Approx(2.0));
    for (int i = 0; i < 3; ++i) CHECK(std::abs(ops.mean(kf.pz[i])) < 1e-12);
    // PZ_1 ~ chi Z_1 and PZ_0 ~ chi (Z_0 + 2) near the bubble
    for (std::size_t n = 0; n < grid.size(); ++n) {
        Vec2 y = p.local(0, grid.node(n));
        if (y.norm() > p.cutoff.r0()) continue;
        CHECK(std::abs(kf.pz[1][n] - kf.z[1][n]) < 0.05);
        CHECK(std::abs(kf.pz[0][n] - kf.z[0][n] - 2.0) < 0.1);
    }
    Eigen::MatrixXd g = kernel_gram({kf}, ops);
    for (int i = 0; i < 3; ++i) {
        CHECK(g(i, i) == doctest::Approx(-32.0 * kPi / 3.0).epsilon(0.05));
        for (int j = 0; j < 3; ++j)
            if (j != i) CHECK(std::abs(g(i, j)) < 0.05 * std::abs(g(i, i)));
    }
    CHECK((g - g.transpose()).norm() < 1e-6 * g.norm());
    PeriodicGrid coarse(green->geometry(), 64, 64);
    SpectralOps oc(coarse);
    CHECK_THROWS_AS(kernel_fields(0, p, oc), GridTooCoarse);
}

TEST_CASE("near-kernel Lanczos matches a dense eigensolve") {
    auto green = torus(0.5, 0.5);
    BubbleParams p = bubble_at_scale(green, {0.05, 0.1}, std::log(0.07), 0.1);
    PeriodicGrid grid(green->geometry(), 32, 32);
    SpectralOps ops(grid);
    const Field k = kernel_potential(p, grid);
    const int n = static_cast<int>(grid.size());
    Eigen::MatrixXd m(n, n);
    Field e(n), out;
    for (int c = 0; c < n; ++c) {
        e.assign(n, 0.0);
        e[c] = 1.0;
        apply_linearized(ops, k, e, out);
        for (int r = 0; r < n; ++r) m(r, c) = out[r];
    }
    // restrict to mean-zero functions and push the constant mode far away
    Eigen::MatrixXd proj = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    Eigen::MatrixXd s = proj * m * proj;
    CHECK((s - s.transpose()).norm() < 1e-9 * s.norm());
    s += Eigen::MatrixXd::Constant(n, n, 1e7 / n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (s + s.transpose()));
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + n);
    std::sort(ev.begin(), ev.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });

    SpectrumReport rep = near_kernel_spectrum(p, grid);
    REQUIRE(rep.eigenvalues.size() == 6);
    CHECK(rep.converged);
    for (int i = 0; i < 6; ++i) CHECK(rep.eigenvalues[i] == doctest::Approx(ev[i]).epsilon(1e-7));
    CHECK(rep.principal_angles_deg.size() == 3);
}

TEST_CASE("principal angles of simple subspaces") {
    Field a1{1, 0, 0}, a2{0, 1, 0};
    Field b1{1, 0, 0}, b2{0, 1, 1};
    std::vector<double> ang = principal_angles({a1, a2}, {b1, b2});
    CHECK(ang[0] == doctest::Approx(0.0).epsilon(1e-12).scale(1.0));
    CHECK(ang[1] == doctest::Approx(45.0));
}
