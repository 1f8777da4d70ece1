#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mtb/geometry.hpp"

namespace mtb {

// Data-parallel kernels. Each parallel kernel has a serial reference in namespace serial
// that the tests and the benchmark compare against. Reductions accumulate one partial per
// row in a fixed order, so parallel results do not depend on the thread count.

/// Sum of a row-major field with row length nx.
double field_sum(const std::vector<double>& f, int nx);
double field_dot(const std::vector<double>& f, const std::vector<double>& g, int nx);
double field_max_abs(const std::vector<double>& f);

/// g = v exp(lambda v^2) and, if requested, gp = lambda exp(lambda v^2) (1 + 2 lambda v^2).
/// Returns false if lambda v^2 exceeds 700 anywhere.
bool nonlinearity(const std::vector<double>& v, double lambda, std::vector<double>& g,
                  std::vector<double>* gp);

/// out[i] = f(x_i) for nodes of an nx-by-ny grid with spacing (hx, hy).
template <class F>
void sample_nodes(int nx, int ny, double hx, double hy, F&& f, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(nx) * ny);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j] = f(Vec2{i * hx, j * hy});
}

/// out[i] = f(points[i]).
template <class F>
void sample_points(const std::vector<Vec2>& pts, F&& f, std::vector<double>& out) {
    out.resize(pts.size());
    const long n = static_cast<long>(pts.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long i = 0; i < n; ++i) out[i] = f(pts[i]);
}

namespace serial {

double field_sum(const std::vector<double>& f);
double field_dot(const std::vector<double>& f, const std::vector<double>& g);
bool nonlinearity(const std::vector<double>& v, double lambda, std::vector<double>& g,
                  std::vector<double>* gp);

template <class F>
void sample_nodes(int nx, int ny, double hx, double hy, F&& f, std::vector<double>& out) {
    out.resize(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) out[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j] = f(Vec2{i * hx, j * hy});
}

template <class F>
void sample_points(const std::vector<Vec2>& pts, F&& f, std::vector<double>& out) {
    out.resize(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out[i] = f(pts[i]);
}

}  // namespace serial

/// Number of OpenMP threads used by the parallel kernels (1 when built without OpenMP).
int worker_count();
void set_worker_count(int n);

}  // namespace mtb
