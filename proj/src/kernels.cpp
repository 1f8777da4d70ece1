#include "mtb/kernels.hpp"

#include <algorithm>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace mtb {

namespace {

constexpr double kExpLimit = 700.0;

template <class Row>
double row_reduce(std::size_t n, int nx, Row&& row) {
    if (nx <= 0) nx = static_cast<int>(n);
    const long rows = static_cast<long>((n + nx - 1) / nx);
    std::vector<double> partial(rows, 0.0);
#pragma omp parallel for schedule(static)
    for (long r = 0; r < rows; ++r) {
        std::size_t lo = static_cast<std::size_t>(r) * nx;
        std::size_t hi = std::min(n, lo + nx);
        partial[r] = row(lo, hi);
    }
    double s = 0.0;
    for (double p : partial) s += p;
    return s;
}

}  // namespace

double field_sum(const std::vector<double>& f, int nx) {
    return row_reduce(f.size(), nx, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f[i];
        return s;
    });
}

double field_dot(const std::vector<double>& f, const std::vector<double>& g, int nx) {
    return row_reduce(f.size(), nx, [&](std::size_t lo, std::size_t hi) {
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += f[i] * g[i];
        return s;
    });
}

double field_max_abs(const std::vector<double>& f) {
    double m = 0.0;
    const long n = static_cast<long>(f.size());
#pragma omp parallel for reduction(max : m) schedule(static)
    for (long i = 0; i < n; ++i) m = std::max(m, std::abs(f[i]));
    return m;
}

bool nonlinearity(const std::vector<double>& v, double lambda, std::vector<double>& g,
                  std::vector<double>* gp) {
    const long n = static_cast<long>(v.size());
    g.resize(n);
    if (gp) gp->resize(n);
    int bad = 0;
#pragma omp parallel for reduction(+ : bad) schedule(static)
    for (long i = 0; i < n; ++i) {
        double q = lambda * v[i] * v[i];
        if (q > kExpLimit) {
            ++bad;
            q = kExpLimit;
        }
        double e = std::exp(q);
        g[i] = v[i] * e;
        if (gp) (*gp)[i] = lambda * e * (1.0 + 2.0 * q);
    }
    return bad == 0;
}

namespace serial {

double field_sum(const std::vector<double>& f) {
    double s = 0.0;
    for (double x : f) s += x;
    return s;
}

double field_dot(const std::vector<double>& f, const std::vector<double>& g) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i];
    return s;
}

bool nonlinearity(const std::vector<double>& v, double lambda, std::vector<double>& g,
                  std::vector<double>* gp) {
    g.resize(v.size());
    if (gp) gp->resize(v.size());
    bool ok = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
        double q = lambda * v[i] * v[i];
        if (q > kExpLimit) {
            ok = false;
            q = kExpLimit;
        }
        double e = std::exp(q);
        g[i] = v[i] * e;
        if (gp) (*gp)[i] = lambda * e * (1.0 + 2.0 * q);
    }
    return ok;
}

}  // namespace serial

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
    if (n > 0) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace mtb
