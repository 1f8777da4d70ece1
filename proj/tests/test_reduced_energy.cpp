#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mtb/errors.hpp"
#include "mtb/reduced_energy.hpp"

using namespace mtb;

namespace {

constexpr double kPi = std::numbers::pi;

double robin_unit_square() {
    double eta = std::tgamma(0.25) / (2.0 * std::pow(kPi, 0.75));
    return -std::log(2.0 * kPi * eta * eta) / (2.0 * kPi);
}

Configuration shifted(Configuration c, int idx, double h) {
    std::size_t k = c.size();
    if (idx < static_cast<int>(2 * k)) {
        Vec2& p = c.points[idx / 2];
        (idx % 2 == 0 ? p.x : p.y) += h;
    } else {
        c.weights[idx - 2 * k] += h;
    }
    return c;
}

}  // namespace

TEST_CASE("psi_k values and symmetries") {
    TorusGeometry g(1.0, 1.0);
    ThetaGreen green(g);
    Configuration c{{{0.1, 0.2}, Vec2{0.1, 0.2} - g.half_period(3)}, {1.0, 1.0}};
    // 2(log16 - 2) - 8 pi H - 8 pi f3(1), with f3(1) = -ln2/(4 pi)
    double expected = 2.0 * (std::log(16.0) - 2.0) - 8.0 * kPi * robin_unit_square() + 2.0 * std::log(2.0);
    CHECK(psi_k(c, green) == doctest::Approx(expected).epsilon(1e-12));

    Configuration d{{{0.13, -0.31}, {0.42, 0.05}, {-0.2, 0.33}}, {0.7, 1.3, 0.4}};
    double base = psi_k(d, green);
    Configuration sw = d;
    std::swap(sw.points[0], sw.points[2]);
    std::swap(sw.weights[0], sw.weights[2]);
    CHECK(psi_k(sw, green) == doctest::Approx(base).epsilon(1e-13));
    Configuration tr = d;
    for (Vec2& p : tr.points) p = p + Vec2{0.37, -0.81};
    CHECK(psi_k(tr, green) == doctest::Approx(base).epsilon(1e-12));

    Configuration bad{{{0.1, 0.1}, {1.1, 0.1}}, {1.0, 1.0}};
    CHECK_THROWS_AS(psi_k(bad, green), SeparationViolation);
}

TEST_CASE("psi_k derivatives match finite differences") {
    TorusGeometry g(1.0, 1.4);
    ThetaGreen green(g);
    Configuration c{{{0.13, -0.31}, {0.42, 0.05}, {-0.2, 0.33}}, {0.7, 1.3, 0.4}};
    Eigen::VectorXd grad = grad_psi_k(c, green);
    Eigen::MatrixXd hess = hess_psi_k(c, green);
    const double h = 1e-6;
    for (int i = 0; i < 9; ++i) {
        double fd = (psi_k(shifted(c, i, h), green) - psi_k(shifted(c, i, -h), green)) / (2 * h);
        CHECK(grad(i) == doctest::Approx(fd).epsilon(1e-6));
        Eigen::VectorXd gp = grad_psi_k(shifted(c, i, h), green);
        Eigen::VectorXd gm = grad_psi_k(shifted(c, i, -h), green);
        for (int j = 0; j < 9; ++j) {
            double fdh = (gp(j) - gm(j)) / (2 * h);
            CHECK(hess(j, i) == doctest::Approx(fdh).epsilon(1e-6).scale(1.0));
        }
    }
    CHECK((hess - hess.transpose()).norm() < 1e-12 * hess.norm());

    // k = 2 weight gradient has the weight-system form
    Configuration two{{{0.0, 0.0}, g.half_period(1)}, {0.3, 0.8}};
    Eigen::VectorXd g2 = grad_psi_k(two, green);
    WeightSystemParams w = weight_system_params(green, g.half_period(1));
    double gval = w.B / (4 * kPi);
    CHECK(g2(4) == doctest::Approx(2 * (w.A + 1) * 0.3 + 4 * 0.3 * std::log(0.3) - 8 * kPi * 0.8 * gval));
}

TEST_CASE("f0 and scalar helpers") {
    CHECK(f0_map(0.45, 0.0, -0.5) == doctest::Approx(0.537314).epsilon(1e-6));
    for (double A : {-0.7, 0.0, 2.3})
        CHECK(std::abs(f0_map(std::exp(-(A + 1) / 2), A, 0.3)) < 1e-15);
    // extremum of f0 at e^{-(A+3)/2}
    double A = 0.4;
    double te = std::exp(-(A + 3) / 2);
    double d = (f0_map(te * (1 + 1e-5), A, -0.5) - f0_map(te * (1 - 1e-5), A, -0.5)) / (2e-5 * te);
    CHECK(std::abs(d) < 1e-8);

    CHECK(hessian_det_weights(1.0, 1.0, -1.0 / (4 * kPi)) == doctest::Approx(0.0).scale(1.0));
    CHECK(hessian_det_weights(1.0, 1.0, 0.0) == 16.0);
    CHECK(degeneracy_margin(-1.0) == 0.0);
    CHECK(degeneracy_margin(0.0) == 2.0);
    CHECK(degeneracy_margin(-0.5) == doctest::Approx(0.677304).epsilon(1e-6));
    CHECK(degeneracy_condition(1.0, 1.0, -1.0 / (4 * kPi)) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("solve_weights") {
    auto br = solve_weights(0.0, -0.5);
    REQUIRE(br.size() == 3);
    CHECK(br[0].kind == BranchKind::diagonal);
    CHECK(br[0].m1 == doctest::Approx(std::exp(-0.75)).epsilon(1e-15));
    CHECK(br[1].kind == BranchKind::pair);
    CHECK(br[1].m1 == doctest::Approx(0.0668265224).epsilon(1e-9));
    CHECK(br[1].m2 == doctest::Approx(0.5895850758).epsilon(1e-9));
    CHECK(br[2].m1 == br[1].m2);
    for (const auto& b : br) CHECK(b.stationarity < 1e-12);

    auto one = solve_weights(0.0, 1.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].m1 == doctest::Approx(1.0).epsilon(1e-15));

    auto zero = solve_weights(1.3, 0.0);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].m1 == doctest::Approx(std::exp(-1.15)));

    // three branches throughout (-1, 0), including near both ends
    for (double B : {-0.999, -0.9, -0.3, -0.05, -0.01})
        for (double A : {-1.0, 0.0, 3.4}) {
            auto b = solve_weights(A, B);
            CHECK(b.size() == 3);
            for (const auto& x : b) {
                CHECK(std::abs(f0_map(x.m1, A, B) - x.m2) <= 1e-12 * std::max(1.0, x.m2));
                CHECK(x.stationarity <= 1e-10);
            }
        }
    for (double B : {-1.01, -1.5, -2.0, 0.2, 3.0}) CHECK(solve_weights(0.5, B).size() == 1);

    // hessdet sign change exactly at B = -1 on the diagonal
    CHECK(solve_weights(0.0, -0.999)[0].hessdet > 0.0);
    CHECK(solve_weights(0.0, -1.001)[0].hessdet < 0.0);
}

TEST_CASE("hessdet equals the weight block of the psi_2 Hessian") {
    TorusGeometry g(1.0, 1.0);
    ThetaGreen green(g);
    for (int p = 1; p <= 3; ++p) {
        WeightSystemParams w = weight_system_params(green, g.half_period(p));
        for (const WeightBranch& b : solve_weights(w.A, w.B)) {
            Configuration c{{{0.0, 0.0}, g.half_period(p)}, {b.m1, b.m2}};
            Eigen::MatrixXd H = hess_psi_k(c, green);
            double det = H.block(4, 4, 2, 2).determinant();
            CHECK(det == doctest::Approx(b.hessdet).epsilon(1e-8));
            Eigen::VectorXd gr = grad_psi_k(c, green);
            CHECK(std::abs(gr(4)) < 1e-10);
            CHECK(std::abs(gr(5)) < 1e-10);
            CHECK(gr.head(4).norm() < 1e-10);
        }
    }
}

TEST_CASE("family catalog") {
    FamilyCatalog sq = family_catalog(1.0, TorusGeometry(1.0, 1.0));
    CHECK(sq.total_families == 9);
    CHECK(sq.inside_regime);
    for (const auto& e : sq.periods) {
        CHECK(e.B > -1.0);
        CHECK(e.B < 0.0);
        CHECK(e.count == 3);
    }
    FamilyCatalog t2 = family_catalog(2.0, TorusGeometry(1.0, 2.0));
    FamilyCatalog th = family_catalog(0.5, TorusGeometry(2.0, 1.0));
    CHECK(t2.periods[0].f > 0.0);
    CHECK(t2.periods[0].count == 1);
    CHECK(th.periods[1].count == 1);
    CHECK(t2.periods[0].count == th.periods[1].count);
    CHECK(t2.periods[1].count == th.periods[0].count);
    CHECK(t2.periods[2].count == th.periods[2].count);
    CHECK(t2.total_families == th.total_families);
    CHECK_FALSE(t2.inside_regime);
    // the negative B's at tau = 2 fall below -1: measured counts deviate from the predicted 3
    CHECK(t2.periods[1].B < -1.0);
    CHECK_FALSE(t2.predicted_split_applies);
}
