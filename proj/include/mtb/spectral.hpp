#pragma once

#include <array>
#include <complex>
#include <memory>
#include <vector>

#include "mtb/geometry.hpp"

namespace mtb {

/// Row-major nodal values, index i + nx * j for node (i hx, j hy).
using Field = std::vector<double>;

class PeriodicGrid {
public:
    PeriodicGrid(const TorusGeometry& geom, int nx, int ny);

    const TorusGeometry& geometry() const { return geom_; }
    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
    double hx() const { return geom_.a() / nx_; }
    double hy() const { return geom_.b() / ny_; }
    double h_max() const { return hx() > hy() ? hx() : hy(); }
    double cell_area() const { return hx() * hy(); }
    Vec2 node(int i, int j) const { return {i * hx(), j * hy()}; }
    Vec2 node(std::size_t idx) const { return node(static_cast<int>(idx % nx_), static_cast<int>(idx / nx_)); }

    Field zeros() const { return Field(size(), 0.0); }

private:
    TorusGeometry geom_;
    int nx_;
    int ny_;
};

/// FFT-based operators on a periodic grid. Plans are created once (under a global lock)
/// and executed with the new-array interface, so one instance may be used from many threads.
class SpectralOps {
public:
    explicit SpectralOps(const PeriodicGrid& grid);
    ~SpectralOps();
    SpectralOps(const SpectralOps&) = delete;
    SpectralOps& operator=(const SpectralOps&) = delete;

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t spectral_size() const { return static_cast<std::size_t>(grid_.ny()) * (grid_.nx() / 2 + 1); }

    using Spectrum = std::vector<std::complex<double>>;

    Spectrum forward(const Field& f) const;
    /// Normalized inverse transform.
    Field backward(Spectrum s) const;

    double kx(int ix) const { return kx_[ix]; }
    double ky(int jy) const { return ky_[jy]; }

    Field laplacian(const Field& f) const;
    /// Mean-zero u with Lap u = rhs - mean(rhs).
    Field solve_poisson(const Field& rhs) const;
    std::array<Field, 2> gradient(const Field& f) const;
    /// Zeroes the Nyquist row and column.
    Field filter_nyquist(const Field& f) const;

    double mean(const Field& f) const;
    double integrate(const Field& f) const;
    double inner(const Field& f, const Field& g) const;

private:
    PeriodicGrid grid_;
    std::vector<double> kx_;
    std::vector<double> ky_;
    void* plan_r2c_ = nullptr;
    void* plan_c2r_ = nullptr;
};

/// Band-limited interpolation between grids of the same torus; Nyquist modes are dropped.
Field resample(const SpectralOps& from, const SpectralOps& to, const Field& f);
/// The same starting from the forward transform of f on the source grid.
Field resample_spectrum(const SpectralOps& from, const SpectralOps& to, const SpectralOps::Spectrum& s);

/// Periodic cubic convolution (Keys, a = -1/2) interpolation of nodal data at an arbitrary point.
double interpolate_cubic(const PeriodicGrid& grid, const Field& f, Vec2 x);

}  // namespace mtb
