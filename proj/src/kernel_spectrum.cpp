#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/krylov.hpp"
#include "mtb/residual.hpp"

namespace mtb {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

KernelFields kernel_fields(std::size_t j, const BubbleParams& params, const SpectralOps& ops) {
    const PeriodicGrid& grid = ops.grid();
    const Bubble& b = params.bubbles[j];
    const double d = b.delta();
    if (d < 4.0 * grid.h_max())
        throw GridTooCoarse("kernel fields need 4 nodes across delta = " + std::to_string(d));
    const double d2 = d * d;
    KernelFields kf;
    Field src;
    sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(), [&](Vec2 x) { return params.source(j, x); }, src);
    for (int i = 0; i < 3; ++i) {
        sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(),
                     [&](Vec2 x) {
                         Vec2 y = params.local(j, x);
                         double q = d2 + y.norm2();
                         if (i == 0) return 2.0 * (d2 - y.norm2()) / q;
                         return 4.0 * d * (i == 1 ? y.x : y.y) / q;
                     },
                     kf.z[i]);
        Field& lap = kf.lap_pz[i];
        lap.resize(src.size());
        // Lap Z = -e^U Z on the support of chi
        for (std::size_t n = 0; n < src.size(); ++n) lap[n] = -src[n] * kf.z[i][n];
        const double mu = ops.mean(lap);
        for (double& v : lap) v -= mu;
        kf.pz[i] = ops.solve_poisson(lap);
    }
    return kf;
}

Eigen::MatrixXd kernel_gram(const std::vector<KernelFields>& kf, const SpectralOps& ops) {
    const int n = 3 * static_cast<int>(kf.size());
    Eigen::MatrixXd g(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) g(a, b) = ops.inner(kf[a / 3].lap_pz[a % 3], kf[b / 3].pz[b % 3]);
    return g;
}

Field kernel_potential(const BubbleParams& params, const PeriodicGrid& grid) {
    Field k;
    sample_nodes(grid.nx(), grid.ny(), grid.hx(), grid.hy(),
                 [&](Vec2 x) {
                     double s = 0.0;
                     for (std::size_t j = 0; j < params.size(); ++j) s += params.source(j, x);
                     return s;
                 },
                 k);
    return k;
}

void apply_linearized(const SpectralOps& ops, const Field& k, const Field& phi, Field& out) {
    out = ops.laplacian(phi);
    Field kp(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) kp[i] = k[i] * phi[i];
    const double mu = ops.mean(kp);
    for (std::size_t i = 0; i < phi.size(); ++i) out[i] += kp[i] - mu;
}

std::vector<double> principal_angles(const std::vector<Field>& a, const std::vector<Field>& b) {
    auto basis = [](const std::vector<Field>& v) {
        Eigen::MatrixXd m(v.front().size(), v.size());
        for (std::size_t c = 0; c < v.size(); ++c)
            for (std::size_t r = 0; r < v[c].size(); ++r) m(r, c) = v[c][r];
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
        return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols()));
    };
    Eigen::MatrixXd qa = basis(a);
    Eigen::MatrixXd qb = basis(b);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(qa.transpose() * qb);
    std::vector<double> out;
    for (int i = 0; i < svd.singularValues().size(); ++i)
        out.push_back(std::acos(std::clamp(svd.singularValues()(i), -1.0, 1.0)) * 180.0 / kPi);
    std::sort(out.begin(), out.end());
    return out;
}

SpectrumReport near_kernel_spectrum(const BubbleParams& params, const PeriodicGrid& grid,
                                    const SpectrumOptions& opt) {
    SpectralOps ops(grid);
    const int k3 = 3 * static_cast<int>(params.size());
    std::vector<KernelFields> kf;
    for (std::size_t j = 0; j < params.size(); ++j) kf.push_back(kernel_fields(j, params, ops));
    SpectrumReport rep;
    rep.gram = kernel_gram(kf, ops);

    const Field k = kernel_potential(params, grid);
    LinearOp lop = [&](const Vector& in, Vector& out) { apply_linearized(ops, k, in, out); };
    LinearOp prec = [&](const Vector& in, Vector& out) {
        out = ops.solve_poisson(in);
        for (double& v : out) v = -v;
    };
    int inner = 0;
    LinearOp inverse = [&](const Vector& in, Vector& out) {
        out.assign(in.size(), 0.0);
        KrylovResult r = minres(lop, &prec, in, out, opt.inner_tol, opt.inner_max_iter);
        inner += r.iterations;
        if (!r.converged) throw EigensolverFailure("inner MINRES solve did not converge");
    };
    auto project = [&](Vector& v) {
        const double mu = ops.mean(v);
        for (double& x : v) x -= mu;
    };
    const int nev = k3 + opt.extra;
    LanczosResult lz = lanczos_largest(inverse, grid.size(), nev, opt.max_steps, opt.tol, opt.seed, project);
    rep.lanczos_steps = lz.steps;
    rep.inner_iterations = inner;
    rep.converged = lz.converged;
    if (static_cast<int>(lz.values.size()) < nev) throw EigensolverFailure("Lanczos returned too few Ritz pairs");
    for (double th : lz.values) rep.eigenvalues.push_back(1.0 / th);  // already ordered by |theta|

    double best = 0.0;
    for (int i = 0; i + 1 < nev; ++i) {
        double r = std::abs(rep.eigenvalues[i + 1]) / std::abs(rep.eigenvalues[i]);
        if (r > best) {
            best = r;
            rep.near_kernel_count = i + 1;
        }
    }
    double mx = 0.0;
    for (int i = 0; i < k3; ++i) mx = std::max(mx, std::abs(rep.eigenvalues[i]));
    rep.gap_ratio = std::abs(rep.eigenvalues[k3]) / mx;

    std::vector<Field> vecs(lz.vectors.begin(), lz.vectors.begin() + k3);
    std::vector<Field> pz;
    for (const KernelFields& f : kf)
        for (const Field& p : f.pz) pz.push_back(p);
    rep.principal_angles_deg = principal_angles(vecs, pz);
    return rep;
}

}  // namespace mtb
