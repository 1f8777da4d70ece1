#include "mtb/reduced_energy.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtb/errors.hpp"

namespace mtb {

namespace {

constexpr double kPi = std::numbers::pi;
const double kLog16 = std::log(16.0);
constexpr int kScanNodes = 2000;

}  // namespace

void validate_configuration(const Configuration& cfg, const TorusGeometry& geom,
                            const ConfigurationLimits& lim) {
    if (cfg.points.size() != cfg.weights.size() || cfg.points.empty())
        throw ConfigError("configuration needs matching, non-empty points and weights");
    for (double m : cfg.weights)
        if (!(m >= lim.weight_floor) || !(m <= 1.0 / lim.weight_floor))
            throw ConfigError("bubble weight outside the admissible range");
    const double floor = lim.separation_floor * geom.min_side();
    for (std::size_t i = 0; i < cfg.size(); ++i)
        for (std::size_t j = i + 1; j < cfg.size(); ++j)
            if (geom.distance(cfg.points[i], cfg.points[j]) < floor)
                throw SeparationViolation("bubble centers " + std::to_string(i) + " and " +
                                          std::to_string(j) + " coincide");
}

double psi_k(const Configuration& cfg, const GreenEvaluator& green, const ConfigurationLimits& lim) {
    validate_configuration(cfg, green.geometry(), lim);
    const double h = green.robin();
    const std::size_t k = cfg.size();
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        double m2 = cfg.weights[j] * cfg.weights[j];
        s += (kLog16 - 2.0) * m2 + m2 * std::log(m2) - 4.0 * kPi * m2 * h;
    }
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            s -= 8.0 * kPi * cfg.weights[i] * cfg.weights[j] *
                 green.value(cfg.points[i] - cfg.points[j]);
    return s;
}

Eigen::VectorXd grad_psi_k(const Configuration& cfg, const GreenEvaluator& green,
                           const ConfigurationLimits& lim) {
    validate_configuration(cfg, green.geometry(), lim);
    const double h = green.robin();
    const std::size_t k = cfg.size();
    const auto& m = cfg.weights;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(3 * k);
    for (std::size_t j = 0; j < k; ++j)
        g(2 * k + j) = 2.0 * (kLog16 - 2.0) * m[j] + 2.0 * m[j] * std::log(m[j] * m[j]) + 2.0 * m[j] -
                       8.0 * kPi * m[j] * h;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            GreenValue gv = green.eval(cfg.points[j] - cfg.points[i]);
            g(2 * j) -= 8.0 * kPi * m[i] * m[j] * gv.gradient.x;
            g(2 * j + 1) -= 8.0 * kPi * m[i] * m[j] * gv.gradient.y;
            g(2 * k + j) -= 8.0 * kPi * m[i] * gv.value;
        }
    }
    return g;
}

Eigen::MatrixXd hess_psi_k(const Configuration& cfg, const GreenEvaluator& green,
                           const ConfigurationLimits& lim) {
    validate_configuration(cfg, green.geometry(), lim);
    const double h = green.robin();
    const std::size_t k = cfg.size();
    const auto& m = cfg.weights;
    const std::size_t n = 3 * k;
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < k; ++j)
        H(2 * k + j, 2 * k + j) = 2.0 * (kLog16 - 2.0) + 4.0 * std::log(m[j]) + 6.0 - 8.0 * kPi * h;

    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
            if (i == j) continue;
            // derivatives of G(xi_j - xi_i) with respect to xi_j
            GreenValue gv = green.eval(cfg.points[j] - cfg.points[i]);
            const double c = 8.0 * kPi * m[i] * m[j];
            const double hs[2][2] = {{gv.hessian.xx, gv.hessian.xy}, {gv.hessian.xy, gv.hessian.yy}};
            const double gr[2] = {gv.gradient.x, gv.gradient.y};
            for (int p = 0; p < 2; ++p) {
                for (int q = 0; q < 2; ++q) {
                    H(2 * j + p, 2 * j + q) -= c * hs[p][q];
                    H(2 * j + p, 2 * i + q) += c * hs[p][q];
                }
                // m_j with xi_j, and m_i with xi_j
                H(2 * k + j, 2 * j + p) -= 8.0 * kPi * m[i] * gr[p];
                H(2 * j + p, 2 * k + j) -= 8.0 * kPi * m[i] * gr[p];
                H(2 * k + i, 2 * j + p) -= 8.0 * kPi * m[j] * gr[p];
                H(2 * j + p, 2 * k + i) -= 8.0 * kPi * m[j] * gr[p];
            }
            H(2 * k + i, 2 * k + j) = -8.0 * kPi * gv.value;
        }
    }
    return H;
}

double weight_constant(double robin) { return kLog16 - 2.0 - 4.0 * kPi * robin; }

WeightSystemParams weight_system_params(const GreenEvaluator& green, Vec2 z) {
    return {weight_constant(green.robin()), 4.0 * kPi * green.value(z)};
}

double f0_map(double t, double A, double B) { return ((A + 1.0) * t + 2.0 * t * std::log(t)) / B; }

const char* to_string(BranchKind k) {
    switch (k) {
        case BranchKind::diagonal: return "diagonal";
        case BranchKind::pair: return "pair";
        case BranchKind::pair_swapped: return "pair_swapped";
    }
    return "?";
}

double hessian_det_weights(double m1, double m2, double gval) {
    return 32.0 * kPi * (m2 / m1 + m1 / m2) * gval + 16.0;
}

double degeneracy_condition(double m1, double m2, double gval) {
    return 2.0 * kPi * (m2 / m1 + m1 / m2) * gval + 1.0;
}

double degeneracy_margin(double B) {
    double s = std::sqrt(std::max(0.0, 1.0 - B * B));
    return B * std::exp(s) + s + 1.0;
}

namespace {

struct PairSystem {
    double A;
    double B;
    double f(double m) const { return (A + 1.0) * m + 2.0 * m * std::log(m); }
    double r1(double m1, double m2) const { return f(m1) - B * m2; }
    double r2(double m1, double m2) const { return f(m2) - B * m1; }
};

WeightBranch finish_branch(BranchKind kind, double m1, double m2, const PairSystem& sys) {
    WeightBranch br;
    br.kind = kind;
    br.m1 = m1;
    br.m2 = m2;
    const double gval = sys.B / (4.0 * kPi);
    br.hessdet = hessian_det_weights(m1, m2, gval);
    br.nondegenerate = std::abs(br.hessdet) > 1e-8;
    br.stationarity = 2.0 * std::max(std::abs(sys.r1(m1, m2)), std::abs(sys.r2(m1, m2)));
    return br;
}

// Newton on the 2x2 system in log variables, starting from a bracketed root of f0 o f0 - id
void polish(double& m1, double& m2, const PairSystem& sys) {
    for (int it = 0; it < 8; ++it) {
        double a11 = sys.A + 3.0 + 2.0 * std::log(m1);
        double a22 = sys.A + 3.0 + 2.0 * std::log(m2);
        double a12 = -sys.B;
        double r1 = sys.r1(m1, m2);
        double r2 = sys.r2(m1, m2);
        double det = a11 * a22 - a12 * a12;
        if (det == 0.0) return;
        double d1 = (a22 * r1 - a12 * r2) / det;
        double d2 = (a11 * r2 - a12 * r1) / det;
        double n1 = m1 - d1;
        double n2 = m2 - d2;
        if (!(n1 > 0.0) || !(n2 > 0.0)) return;
        double before = std::max(std::abs(r1), std::abs(r2));
        double after = std::max(std::abs(sys.r1(n1, n2)), std::abs(sys.r2(n1, n2)));
        if (!(after <= before)) return;
        m1 = n1;
        m2 = n2;
        if (std::abs(d1) <= 1e-16 * m1 && std::abs(d2) <= 1e-16 * m2) return;
    }
}

}  // namespace

std::vector<WeightBranch> solve_weights(double A, double B, double tol) {
    const PairSystem sys{A, B};
    const double m0 = std::exp((B - A - 1.0) / 2.0);
    std::vector<WeightBranch> out;
    out.push_back(finish_branch(BranchKind::diagonal, m0, m0, sys));
    if (B == 0.0) return out;

    const double tz = std::exp(-(A + 1.0) / 2.0);  // zero of f0
    auto g = [&](double t) { return f0_map(f0_map(t, A, B), A, B) - t; };

    // The scan is split at the known fixed point m0: on either side of it g has no
    // root at m0 itself, so a pair root sitting close to m0 cannot cancel in one cell.
    struct Interval {
        double lo;
        double hi;
    };
    std::vector<Interval> parts;
    if (B < 0.0) {
        parts.push_back({tz * 1e-280, m0});
        parts.push_back({m0, tz});
    } else {
        parts.push_back({tz, m0});
        parts.push_back({m0, m0 * std::exp(60.0)});
    }

    std::vector<double> roots;
    for (const Interval& iv : parts) {
        // log-spaced in the distance to the fixed point, so nodes cluster at both ends
        std::vector<double> t(kScanNodes);
        std::vector<double> gv(kScanNodes);
        const bool below = iv.hi == m0;
        const double span = iv.hi - iv.lo;
        const double dmin = std::max(span * 1e-14, m0 * 1e-13);
        const double lmin = std::log(dmin);
        const double lmax = std::log(below ? span * (1.0 - 1e-15) : span);
#pragma omp parallel for schedule(static)
        for (int i = 0; i < kScanNodes; ++i) {
            double s = lmin + (lmax - lmin) * i / (kScanNodes - 1);
            double d = std::exp(s);
            t[i] = below ? m0 - d : m0 + d;
            if (!below && B < 0.0) t[i] = std::min(t[i], iv.hi * (1.0 - 1e-15));
            if (below) t[i] = std::max(t[i], iv.lo);
            gv[i] = g(t[i]);
        }
        // a second, log-in-t pass for the lower interval reaches very small weights
        if (below && B < 0.0) {
            std::vector<double> t2(kScanNodes);
            std::vector<double> g2(kScanNodes);
            const double l0 = std::log(iv.lo);
            const double l1 = std::log(m0 - dmin);
#pragma omp parallel for schedule(static)
            for (int i = 0; i < kScanNodes; ++i) {
                t2[i] = std::exp(l0 + (l1 - l0) * i / (kScanNodes - 1));
                g2[i] = g(t2[i]);
            }
            t.insert(t.end(), t2.begin(), t2.end());
            gv.insert(gv.end(), g2.begin(), g2.end());
        }
        std::vector<std::size_t> order(t.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return t[p] < t[q]; });
        for (std::size_t n = 0; n + 1 < order.size(); ++n) {
            double lo = t[order[n]];
            double hi = t[order[n + 1]];
            double glo = gv[order[n]];
            double ghi = gv[order[n + 1]];
            if (!std::isfinite(glo) || !std::isfinite(ghi) || lo == hi) continue;
            if ((glo < 0.0) == (ghi < 0.0) && glo != 0.0) continue;
            for (int it = 0; it < 400 && hi - lo > tol * lo; ++it) {
                double mid = 0.5 * (lo + hi);
                double gm = g(mid);
                if ((gm < 0.0) == (glo < 0.0)) {
                    lo = mid;
                    glo = gm;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
    }

    std::vector<std::pair<double, double>> pairs;
    for (double r : roots) {
        double m1 = r;
        double m2 = f0_map(r, A, B);
        if (!(m2 > 0.0)) continue;
        polish(m1, m2, sys);
        if (m1 > m2) std::swap(m1, m2);
        if (std::abs(m2 - m1) <= 1e-8 * m2) continue;  // the diagonal again
        bool dup = false;
        for (auto& p : pairs)
            if (std::abs(p.first - m1) <= 1e-9 * m1 && std::abs(p.second - m2) <= 1e-9 * m2) dup = true;
        if (!dup) pairs.emplace_back(m1, m2);
    }
    std::sort(pairs.begin(), pairs.end());
    for (auto& p : pairs) {
        out.push_back(finish_branch(BranchKind::pair, p.first, p.second, sys));
        out.push_back(finish_branch(BranchKind::pair_swapped, p.second, p.first, sys));
    }
    return out;
}

FamilyCatalog family_catalog(double tau, const TorusGeometry& geom, double tol) {
    if (std::abs(geom.tau() - tau) > 1e-12 * tau) throw ConfigError("tau does not match geometry");
    FamilyCatalog cat;
    cat.tau = tau;
    cat.robin = robin_constant(geom);
    cat.A = weight_constant(cat.robin);
    cat.thresholds = tau_thresholds();
    cat.inside_regime = cat.thresholds.tau0 < tau && tau < cat.thresholds.tau1;
    cat.predicted_total = cat.inside_regime ? 9 : 7;
    HalfPeriodTable t = half_period_values(tau);
    const double f[3] = {t.f1, t.f2, t.f3};
    cat.predicted_split_applies = true;
    for (int i = 0; i < 3; ++i) {
        PeriodEntry& e = cat.periods[i];
        e.index = i + 1;
        e.point = geom.half_period(i + 1);
        e.f = f[i];
        e.B = 4.0 * kPi * f[i];
        e.branches = solve_weights(cat.A, e.B, tol);
        e.count = static_cast<int>(e.branches.size());
        e.predicted_count = e.f >= 0.0 ? 1 : 3;
        e.deviation = e.count != e.predicted_count;
        if (e.B < 0.0 && e.B <= -1.0) cat.predicted_split_applies = false;
        if (e.deviation)
            cat.notes.push_back("p" + std::to_string(i + 1) + ": measured " + std::to_string(e.count) +
                                " branch(es), predicted " + std::to_string(e.predicted_count) +
                                " (B = " + std::to_string(e.B) + ")");
        cat.total_families += e.count;
    }
    if (cat.predicted_split_applies && cat.total_families != cat.predicted_total)
        cat.notes.push_back("total differs from the predicted count although every negative B lies in (-1, 0)");
    return cat;
}

}  // namespace mtb
