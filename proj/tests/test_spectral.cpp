#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/spectral.hpp"

using namespace mtb;

namespace {

constexpr double kPi = std::numbers::pi;

Field sample(const PeriodicGrid& g, double (*f)(Vec2, double, double)) {
    Field out(g.size());
    for (int j = 0; j < g.ny(); ++j)
        for (int i = 0; i < g.nx(); ++i)
            out[i + g.nx() * j] = f(g.node(i, j), g.geometry().a(), g.geometry().b());
    return out;
}

double mode(Vec2 x, double a, double b) { return std::sin(2 * kPi * x.x / a) * std::cos(4 * kPi * x.y / b); }

double smooth(Vec2 x, double a, double b) {
    return std::exp(std::sin(2 * kPi * x.x / a) + 0.5 * std::cos(2 * kPi * x.y / b));
}

}  // namespace

TEST_CASE("grid validation") {
    TorusGeometry g(1.0, 1.0);
    CHECK_THROWS_AS(PeriodicGrid(g, 15, 16), ConfigError);
    CHECK_THROWS_AS(PeriodicGrid(g, 8, 8), ConfigError);
}

TEST_CASE("laplacian and poisson on a single mode") {
    TorusGeometry g(1.0, 1.7);
    PeriodicGrid grid(g, 32, 48);
    SpectralOps ops(grid);
    Field f = sample(grid, mode);
    double k2 = std::pow(2 * kPi / g.a(), 2) + std::pow(4 * kPi / g.b(), 2);
    Field lap = ops.laplacian(f);
    Field u = ops.solve_poisson(f);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(std::abs(lap[i] + k2 * f[i]) < 1e-10 * k2);
        CHECK(std::abs(u[i] + f[i] / k2) < 1e-14);
    }
    Field c(grid.size(), 3.0);
    Field u0 = ops.solve_poisson(c);
    CHECK(field_max_abs(u0) < 1e-14);
}

TEST_CASE("gradient and integrals") {
    TorusGeometry g(2.0, 1.0);
    PeriodicGrid grid(g, 64, 32);
    SpectralOps ops(grid);
    Field f = sample(grid, mode);
    auto [fx, fy] = ops.gradient(f);
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i) {
            Vec2 x = grid.node(i, j);
            double ex = 2 * kPi / g.a() * std::cos(2 * kPi * x.x / g.a()) * std::cos(4 * kPi * x.y / g.b());
            double ey = -4 * kPi / g.b() * std::sin(2 * kPi * x.x / g.a()) * std::sin(4 * kPi * x.y / g.b());
            CHECK(std::abs(fx[i + grid.nx() * j] - ex) < 1e-11);
            CHECK(std::abs(fy[i + grid.nx() * j] - ey) < 1e-11);
        }
    // int exp(sin + 0.5 cos) = a b I0(1) I0(1/2)
    Field s = sample(grid, smooth);
    double exact = g.area() * std::cyl_bessel_i(0.0, 1.0) * std::cyl_bessel_i(0.0, 0.5);
    CHECK(ops.integrate(s) == doctest::Approx(exact).epsilon(1e-13));
    CHECK(ops.inner(f, f) == doctest::Approx(g.area() / 4).epsilon(1e-13));
}

TEST_CASE("resample and cubic interpolation") {
    TorusGeometry g(1.0, 1.0);
    PeriodicGrid coarse(g, 32, 32);
    PeriodicGrid fine(g, 96, 64);
    SpectralOps oc(coarse);
    SpectralOps of(fine);
    Field fc = sample(coarse, mode);
    Field ff = resample(oc, of, fc);
    Field ref = sample(fine, mode);
    for (std::size_t i = 0; i < ff.size(); ++i) CHECK(std::abs(ff[i] - ref[i]) < 1e-13);
    Field back = resample(of, oc, ref);
    for (std::size_t i = 0; i < back.size(); ++i) CHECK(std::abs(back[i] - fc[i]) < 1e-13);

    PeriodicGrid g256(g, 256, 256);
    Field s = sample(g256, smooth);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.5, 2.5);
    for (int t = 0; t < 50; ++t) {
        Vec2 x{u(rng), u(rng)};
        CHECK(interpolate_cubic(g256, s, x) == doctest::Approx(smooth(x, 1, 1)).epsilon(1e-5));
    }
}

TEST_CASE("parallel kernels match serial reference") {
    std::mt19937 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    const int nx = 96;
    const int ny = 80;
    Field v(nx * ny);
    Field w(nx * ny);
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = n(rng);
        w[i] = n(rng);
    }
    CHECK(field_sum(v, nx) == doctest::Approx(serial::field_sum(v)).epsilon(1e-12));
    CHECK(field_dot(v, w, nx) == doctest::Approx(serial::field_dot(v, w)).epsilon(1e-12));

    Field g1, g2, p1, p2;
    CHECK(nonlinearity(v, 0.7, g1, &p1));
    CHECK(serial::nonlinearity(v, 0.7, g2, &p2));
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(g1[i] == g2[i]);
        CHECK(p1[i] == p2[i]);
    }
    Field big{100.0};
    CHECK_FALSE(nonlinearity(big, 1.0, g1, nullptr));
    CHECK_FALSE(serial::nonlinearity(big, 1.0, g2, nullptr));

    auto f = [](Vec2 x) { return std::sin(x.x) * x.y; };
    Field a, b;
    sample_nodes(nx, ny, 0.1, 0.2, f, a);
    serial::sample_nodes(nx, ny, 0.1, 0.2, f, b);
    CHECK(a == b);
}
