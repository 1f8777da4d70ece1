#include "mtb/krylov.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "mtb/kernels.hpp"

namespace mtb {

namespace {

// fixed chunking keeps reductions independent of the thread count
double dot(const Vector& a, const Vector& b) { return field_dot(a, b, 4096); }
double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

void axpy(double s, const Vector& x, Vector& y) {
    const long n = static_cast<long>(y.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < n; ++i) y[i] += s * x[i];
}

double true_residual(const LinearOp& a, const Vector& b, const Vector& x) {
    Vector ax;
    a(x, ax);
    double s = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) s += (b[i] - ax[i]) * (b[i] - ax[i]);
    double nb = norm(b);
    return nb > 0.0 ? std::sqrt(s) / nb : std::sqrt(s);
}

}  // namespace

KrylovResult minres(const LinearOp& a, const LinearOp* m, const Vector& b, Vector& x, double tol,
                    int max_iter) {
    const std::size_t n = b.size();
    x.resize(n, 0.0);
    KrylovResult res;
    Vector r1 = b;
    {
        Vector ax;
        a(x, ax);
        for (std::size_t i = 0; i < n; ++i) r1[i] -= ax[i];
    }
    Vector y;
    if (m)
        (*m)(r1, y);
    else
        y = r1;
    const double beta1 = std::sqrt(std::max(0.0, dot(r1, y)));
    if (beta1 == 0.0) {
        res.converged = true;
        return res;
    }
    double beta = beta1;
    double oldb = 0.0;
    double dbar = 0.0;
    double epsln = 0.0;
    double phibar = beta1;
    double cs = -1.0;
    double sn = 0.0;
    Vector r2 = r1;
    Vector w(n, 0.0);
    Vector w1(n, 0.0);
    Vector w2(n, 0.0);
    Vector v(n);
    for (int itn = 1; itn <= max_iter; ++itn) {
        const double s = 1.0 / beta;
        for (std::size_t i = 0; i < n; ++i) v[i] = s * y[i];
        a(v, y);
        if (itn >= 2) axpy(-beta / oldb, r1, y);
        const double alfa = dot(v, y);
        axpy(-alfa / beta, r2, y);
        r1.swap(r2);
        r2 = y;
        if (m)
            (*m)(r2, y);
        else
            y = r2;
        oldb = beta;
        beta = std::sqrt(std::max(0.0, dot(r2, y)));
        const double oldeps = epsln;
        const double delta = cs * dbar + sn * alfa;
        const double gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        double gamma = std::max(std::hypot(gbar, beta), std::numeric_limits<double>::epsilon());
        cs = gbar / gamma;
        sn = beta / gamma;
        const double phi = cs * phibar;
        phibar = sn * phibar;
        w1.swap(w2);
        w2.swap(w);
        for (std::size_t i = 0; i < n; ++i) w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        axpy(phi, w, x);
        res.iterations = itn;
        if (phibar <= tol * beta1 || beta == 0.0) {
            res.converged = true;
            break;
        }
    }
    res.residual = true_residual(a, b, x);
    return res;
}

KrylovResult gmres(const LinearOp& a, const LinearOp* p, const Vector& b, Vector& x, double tol,
                   int restart, int max_iter) {
    const std::size_t n = b.size();
    x.resize(n, 0.0);
    KrylovResult res;
    const double nb = norm(b);
    if (nb == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    Vector tmp;
    Vector z;
    int total = 0;
    while (total < max_iter) {
        Vector r = b;
        a(x, tmp);
        for (std::size_t i = 0; i < n; ++i) r[i] -= tmp[i];
        double beta = norm(r);
        if (beta <= tol * nb) {
            res.converged = true;
            break;
        }
        std::vector<Vector> vs;
        vs.reserve(restart + 1);
        for (double& ri : r) ri /= beta;
        vs.push_back(std::move(r));
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(restart + 1, restart);
        std::vector<double> cs(restart), sn(restart), g(restart + 1, 0.0);
        g[0] = beta;
        int k = 0;
        for (; k < restart && total < max_iter; ++k, ++total) {
            if (p) {
                (*p)(vs[k], z);
                a(z, tmp);
            } else {
                a(vs[k], tmp);
            }
            for (int i = 0; i <= k; ++i) {
                h(i, k) = dot(tmp, vs[i]);
                axpy(-h(i, k), vs[i], tmp);
            }
            for (int i = 0; i <= k; ++i) {  // second pass keeps the basis orthogonal
                double c = dot(tmp, vs[i]);
                h(i, k) += c;
                axpy(-c, vs[i], tmp);
            }
            h(k + 1, k) = norm(tmp);
            for (int i = 0; i < k; ++i) {
                double t = cs[i] * h(i, k) + sn[i] * h(i + 1, k);
                h(i + 1, k) = -sn[i] * h(i, k) + cs[i] * h(i + 1, k);
                h(i, k) = t;
            }
            double rr = std::hypot(h(k, k), h(k + 1, k));
            cs[k] = rr > 0.0 ? h(k, k) / rr : 1.0;
            sn[k] = rr > 0.0 ? h(k + 1, k) / rr : 0.0;
            double hk1 = h(k + 1, k);
            h(k, k) = rr;
            h(k + 1, k) = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            if (hk1 > 0.0) {
                for (double& t : tmp) t /= hk1;
                vs.push_back(tmp);
            }
            if (std::abs(g[k + 1]) <= tol * nb || hk1 == 0.0) {
                ++k;
                ++total;
                break;
            }
        }
        Eigen::VectorXd yk(k);
        for (int i = k - 1; i >= 0; --i) {
            double s = g[i];
            for (int j = i + 1; j < k; ++j) s -= h(i, j) * yk(j);
            yk(i) = s / h(i, i);
        }
        Vector upd(n, 0.0);
        for (int i = 0; i < k; ++i) axpy(yk(i), vs[i], upd);
        if (p) {
            (*p)(upd, z);
            upd.swap(z);
        }
        for (std::size_t i = 0; i < n; ++i) x[i] += upd[i];
        if (std::abs(g[k]) <= tol * nb) {
            res.converged = true;
            break;
        }
    }
    res.iterations = total;
    res.residual = true_residual(a, b, x);
    res.converged = res.converged || res.residual <= tol;
    return res;
}

LanczosResult lanczos_largest(const LinearOp& a, std::size_t n, int nev, int max_steps, double tol,
                              std::uint64_t seed, const std::function<void(Vector&)>& project) {
    LanczosResult out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector q(n);
    for (double& v : q) v = nd(rng);
    if (project) project(q);
    double nq = norm(q);
    for (double& v : q) v /= nq;

    std::vector<Vector> qs{q};
    std::vector<double> alpha;
    std::vector<double> beta;
    Vector w;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    std::vector<int> order;
    for (int k = 0; k < max_steps; ++k) {
        a(qs[k], w);
        double al = dot(w, qs[k]);
        alpha.push_back(al);
        for (int pass = 0; pass < 2; ++pass)
            for (const Vector& qi : qs) axpy(-dot(w, qi), qi, w);
        double b = norm(w);
        const int m = k + 1;
        bool check = m >= nev && (m % 5 == 0 || m == max_steps || b < 1e-13);
        if (check) {
            Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
            for (int i = 0; i < m; ++i) {
                t(i, i) = alpha[i];
                if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
            }
            es.compute(t);
            order.resize(m);
            for (int i = 0; i < m; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](int x, int y) {
                return std::abs(es.eigenvalues()(x)) > std::abs(es.eigenvalues()(y));
            });
            bool ok = true;
            for (int i = 0; i < nev; ++i) {
                double th = es.eigenvalues()(order[i]);
                if (std::abs(b * es.eigenvectors()(m - 1, order[i])) > tol * std::abs(th)) ok = false;
            }
            out.steps = m;
            if (ok || b < 1e-13 || m == max_steps) {
                out.converged = ok || b < 1e-13;
                for (int i = 0; i < nev && i < m; ++i) {
                    const int c = order[i];
                    out.values.push_back(es.eigenvalues()(c));
                    out.residuals.push_back(std::abs(b * es.eigenvectors()(m - 1, c)));
                    Vector v(n, 0.0);
                    for (int j = 0; j < m; ++j) axpy(es.eigenvectors()(j, c), qs[j], v);
                    double nv = norm(v);
                    for (double& t : v) t /= nv;
                    out.vectors.push_back(std::move(v));
                }
                return out;
            }
        }
        if (b < 1e-13) break;
        beta.push_back(b);
        for (double& t : w) t /= b;
        qs.push_back(w);
    }
    return out;
}

}  // namespace mtb
