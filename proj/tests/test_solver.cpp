#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/residual.hpp"
#include "mtb/solver.hpp"

using namespace mtb;

namespace {

constexpr double kPi = std::numbers::pi;

const TorusGeometry kSquare(1.0, 1.0);

Field random_field(const DiscreteProblem& p, unsigned seed, double scale = 1.0) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd;
    Field f(p.grid().size());
    for (double& x : f) x = scale * nd(rng);
    // smooth it a little so the nonlinearity stays tame
    Field s = p.ops().solve_poisson(f);
    return p.project(s);
}

// diagonal weights at the given half period of the square torus
Configuration diagonal_pair(int period) {
    const FamilyCatalog cat = family_catalog(1.0, kSquare);
    const WeightBranch& b = cat.periods[period - 1].branches[0];
    Configuration c;
    c.points = {{0.0, 0.0}, cat.periods[period - 1].point};
    c.weights = {b.m1, b.m2};
    return c;
}

Field roll(const Field& f, const PeriodicGrid& g, int di, int dj) {
    Field r(f.size());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            r[((i + di) % g.nx()) + g.nx() * ((j + dj) % g.ny())] = f[i + g.nx() * j];
    return r;
}

}  // namespace

TEST_CASE("discrete residual basics") {
    PeriodicGrid g(kSquare, 64, 64);
    DiscreteProblem p(g, 3.0);
    Field f = p.residual(g.zeros());
    CHECK(field_max_abs(f) == 0.0);
    Field v = random_field(p, 1, 20.0);
    Field r = p.residual(v);
    CHECK(std::abs(p.ops().mean(r)) < 1e-13 * field_max_abs(r));
    Field big(g.size(), 0.0);
    big[5] = 100.0;
    big[6] = -100.0;
    CHECK_THROWS_AS(p.residual(big), Overflow);
}

TEST_CASE("jacobian matches finite differences and is symmetric") {
    PeriodicGrid g(kSquare, 64, 64);
    DiscreteProblem p(g, 20.0);
    auto green = std::make_shared<ThetaGreen>(kSquare);
    BubbleParams bp = close_parameters(diagonal_pair(3), 20.0, green);
    Field v = p.project(ansatz_seed(bp, g));
    p.linearize(v);
    Field d = random_field(p, 2, 10.0);
    Field jd = p.jacobian(d);
    const double e = 1e-5;
    Field vp = v;
    Field vm = v;
    for (std::size_t i = 0; i < v.size(); ++i) {
        vp[i] += e * d[i];
        vm[i] -= e * d[i];
    }
    Field fp = p.residual(vp);
    Field fm = p.residual(vm);
    double err = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) err = std::max(err, std::abs((fp[i] - fm[i]) / (2 * e) - jd[i]));
    CHECK(err < 1e-6 * field_max_abs(jd));

    Field x = random_field(p, 3);
    Field y = random_field(p, 4);
    const double a = p.ops().inner(p.jacobian(x), y);
    const double b = p.ops().inner(x, p.jacobian(y));
    CHECK(std::abs(a - b) < 1e-12 * std::max(std::abs(a), 1.0));
}

TEST_CASE("energy functional") {
    PeriodicGrid g(TorusGeometry(1.0, 0.5), 32, 16);
    SpectralOps ops(g);
    CHECK(energy(ops, g.zeros(), 0.7) == doctest::Approx(-0.35 * 0.5).epsilon(1e-14));

    // u = a cos(2 pi x): 1/2 int |u'|^2 = a^2 pi^2 |S| and int e^{u^2} = |S| e^{a^2/2} I0(a^2/2)
    const double a = 0.6;
    const double lam = 2.0;
    Field u(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) u[n] = a * std::cos(2 * kPi * g.node(n).x);
    const double exact = a * a * kPi * kPi * 0.5 - 0.5 * lam * 0.5 * std::exp(a * a / 2) * std::cyl_bessel_i(0.0, a * a / 2);
    CHECK(energy(ops, u, lam) == doctest::Approx(exact).epsilon(1e-13));

    // spectral convergence on a fixed smooth field
    auto smooth = [](Vec2 x) { return 0.4 * std::sin(2 * kPi * x.x) * std::cos(4 * kPi * x.y) + 0.3 * std::cos(2 * kPi * (x.x + 2 * x.y)); };
    PeriodicGrid g1(kSquare, 32, 32);
    PeriodicGrid g2(kSquare, 64, 64);
    SpectralOps o1(g1);
    SpectralOps o2(g2);
    Field u1(g1.size());
    Field u2(g2.size());
    for (std::size_t n = 0; n < g1.size(); ++n) u1[n] = smooth(g1.node(n));
    for (std::size_t n = 0; n < g2.size(); ++n) u2[n] = smooth(g2.node(n));
    const double j1 = energy(o1, u1, 1.5);
    CHECK(std::abs(j1 - energy(o2, u2, 1.5)) < 1e-10 * std::abs(j1));
    // lattice-commensurate translation
    CHECK(energy(o1, roll(u1, g1, 5, 11), 1.5) == doctest::Approx(j1).epsilon(1e-13));
}

TEST_CASE("grid residual of the ansatz agrees with the mesh-free residual") {
    // The C^2 cut-off limits spectral differentiation of PU at r0 to first order, so the
    // tolerance is relative and shrinks with refinement.
    auto green = std::make_shared<ThetaGreen>(kSquare);
    BubbleParams bp = close_parameters(diagonal_pair(3), 20.0, green);
    double prev = INFINITY;
    for (int n : {128, 256}) {
        PeriodicGrid g(kSquare, n, n);
        DiscreteProblem p(g, 20.0);
        AnsatzField v(bp, ProjectionMode::corrected, n, n);
        MomentOptions mo;
        mo.rel_tol = 1e-7;  // the interpolated correction is only C^1 between nodes
        ResidualField rf(v, mo);
        Field f = p.residual(v.nodal_values(g));
        double diff = 0.0;
        double scale = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double r = rf.residual(g.node(i));
            diff = std::max(diff, std::abs(r - f[i]));
            scale = std::max(scale, std::abs(r));
        }
        CHECK(diff < 1e-3 * scale);
        CHECK(diff < 0.75 * prev);
        prev = diff;
    }
}

TEST_CASE("newton converges on the p3 diagonal seed") {
    auto green = std::make_shared<ThetaGreen>(kSquare);
    const Configuration cfg = diagonal_pair(3);
    const double lam = 20.0;
    BubbleParams bp = close_parameters(cfg, lam, green);
    PeriodicGrid g(kSquare, 128, 128);
    DiscreteProblem p(g, lam);
    REQUIRE(reflection_symmetric(cfg, kSquare));
    p.set_reflection_symmetry(true);
    int calls = 0;
    SolverConfig sc;
    sc.monitor = [&](int, const Field&, double, double, int) { ++calls; };
    SolveResult r = newton_solve(ansatz_seed(bp, g), p, sc);
    CHECK(r.converged);
    CHECK(r.residual <= 1e-10);
    CHECK(calls == r.iterations);
    CHECK(std::abs(p.ops().mean(r.v)) < 1e-14);
    CHECK(r.distance_to_seed / lam < 0.01);
    CHECK(field_max_abs(p.residual(r.v)) < 1e-9);

    // a converged solution is a fixed point
    SolveResult again = newton_solve(r.v, p, sc);
    CHECK(again.iterations == 0);
    CHECK(again.distance_to_seed < 1e-12);

    // half-period swap symmetry of the far field
    FarFieldReport ff = far_field_check(r.v, g, bp, 0.3);
    CHECK(ff.nodes > 0);
    Field swapped = roll(r.v, g, 64, 64);
    FarFieldReport fs = far_field_check(swapped, g, bp, 0.3);
    CHECK(fs.sup == doctest::Approx(ff.sup).epsilon(1e-10));
    for (std::size_t i = 0; i < g.size(); ++i) REQUIRE(std::abs(swapped[i] - r.v[i]) < 1e-10);

    // energy report
    Field u = r.v;
    for (double& x : u) x *= std::sqrt(lam);
    EnergyReport er = energy_report(energy(p.ops(), u, lam), cfg, lam, *green);
    CHECK(er.k == 2);
    CHECK(std::isfinite(er.scaled));
    CHECK(er.prediction == doctest::Approx(4 * kPi - 0.5 * lam + 8 * kPi * lam * psi_k(cfg, *green)));
}

TEST_CASE("newton failures are reported") {
    auto green = std::make_shared<ThetaGreen>(kSquare);
    BubbleParams bp = close_parameters(diagonal_pair(3), 20.0, green);
    PeriodicGrid g(kSquare, 64, 64);
    DiscreteProblem p(g, 20.0);
    SolverConfig sc;
    sc.max_iter = 1;
    CHECK_THROWS_AS(newton_solve(ansatz_seed(bp, g), p, sc), NoConvergence);
}

TEST_CASE("signatures are translation invariant") {
    PeriodicGrid g(kSquare, 64, 64);
    Field v(g.size());
    auto bump = [&](Vec2 x, Vec2 c, double h) {
        Vec2 y = kSquare.reduce(x - c);
        return h * std::exp(-y.norm2() / 0.005);
    };
    for (std::size_t n = 0; n < g.size(); ++n) {
        Vec2 x = g.node(n);
        v[n] = bump(x, {0.0, 0.0}, 1.0) + bump(x, {0.5, 0.0}, 0.8);
    }
    Signature s = signature(v, g);
    CHECK(s.ratio == doctest::Approx(0.8));
    CHECK(same_family(s, s, g));
    Signature t = signature(roll(v, g, 13, 7), g);
    CHECK(same_family(s, t, g));
    Field w(g.size());
    for (std::size_t n = 0; n < g.size(); ++n) {
        Vec2 x = g.node(n);
        w[n] = bump(x, {0.0, 0.0}, 1.0) + bump(x, {0.0, 0.5}, 0.8);
    }
    Signature q = signature(w, g);
    CHECK_FALSE(same_family(s, q, g));
    CHECK(count_distinct({s, t, q}, g) == 2);
}

TEST_CASE("continuation along a constant path is deterministic") {
    auto green = std::make_shared<ThetaGreen>(kSquare);
    PeriodicGrid g(kSquare, 128, 128);
    ContinuationResult c = continuation({20.0, 20.0}, diagonal_pair(3), green, g);
    REQUIRE(c.steps.size() == 2);
    CHECK(c.stop_reason.empty());
    CHECK(c.steps[1].energy == doctest::Approx(c.steps[0].energy).epsilon(1e-13));
    CHECK(c.steps[1].result.iterations == 0);
    CHECK_THROWS_AS(continuation({20.0, 5.0}, diagonal_pair(3), green, g), ConfigError);

    ContinuationResult stop = continuation({20.0, 14.0, 10.0}, diagonal_pair(3), green, g);
    CHECK(stop.steps.size() < 3);
    CHECK_FALSE(stop.stop_reason.empty());
}

TEST_CASE("family enumeration does not depend on the worker count") {
    EnumerationOptions opt;
    opt.grid = 64;
    opt.solver.max_iter = 15;
    const int saved = worker_count();
    set_worker_count(1);
    FamilyEnumeration a = enumerate_families(1.0, 20.0, opt);
    set_worker_count(3);
    FamilyEnumeration b = enumerate_families(1.0, 20.0, opt);
    set_worker_count(saved);
    CHECK(a.catalog_count == 9);
    REQUIRE(a.runs.size() == b.runs.size());
    for (std::size_t i = 0; i < a.runs.size(); ++i) {
        CHECK(a.runs[i].error == b.runs[i].error);
        CHECK(a.runs[i].result.v == b.runs[i].result.v);
        CHECK(a.runs[i].energy == b.runs[i].energy);
    }
    CHECK(a.converged == b.converged);
}
