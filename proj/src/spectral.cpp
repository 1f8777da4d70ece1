#include "mtb/spectral.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>
#include <numbers>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"

namespace mtb {

namespace {

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

constexpr double kTwoPi = 2.0 * std::numbers::pi;

}  // namespace

PeriodicGrid::PeriodicGrid(const TorusGeometry& geom, int nx, int ny) : geom_(geom), nx_(nx), ny_(ny) {
    if (nx < 16 || ny < 16 || nx % 2 || ny % 2)
        throw ConfigError("grid dimensions must be even and at least 16");
}

SpectralOps::SpectralOps(const PeriodicGrid& grid) : grid_(grid) {
    const int nx = grid.nx();
    const int ny = grid.ny();
    kx_.resize(nx / 2 + 1);
    ky_.resize(ny);
    for (int i = 0; i <= nx / 2; ++i) kx_[i] = kTwoPi * i / grid.geometry().a();
    for (int j = 0; j < ny; ++j) ky_[j] = kTwoPi * (j <= ny / 2 ? j : j - ny) / grid.geometry().b();

    std::lock_guard<std::mutex> lock(plan_mutex());
    double* in = fftw_alloc_real(grid.size());
    fftw_complex* out = fftw_alloc_complex(spectral_size());
    plan_r2c_ = fftw_plan_dft_r2c_2d(ny, nx, in, out, FFTW_ESTIMATE | FFTW_UNALIGNED);
    plan_c2r_ = fftw_plan_dft_c2r_2d(ny, nx, out, in, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
}

SpectralOps::~SpectralOps() {
    std::lock_guard<std::mutex> lock(plan_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(plan_r2c_));
    fftw_destroy_plan(static_cast<fftw_plan>(plan_c2r_));
}

SpectralOps::Spectrum SpectralOps::forward(const Field& f) const {
    Field tmp = f;  // r2c may not preserve input under every planner
    Spectrum s(spectral_size());
    fftw_execute_dft_r2c(static_cast<fftw_plan>(plan_r2c_), tmp.data(),
                         reinterpret_cast<fftw_complex*>(s.data()));
    return s;
}

Field SpectralOps::backward(Spectrum s) const {
    Field out(grid_.size());
    fftw_execute_dft_c2r(static_cast<fftw_plan>(plan_c2r_), reinterpret_cast<fftw_complex*>(s.data()),
                         out.data());
    const double scale = 1.0 / static_cast<double>(grid_.size());
    for (double& v : out) v *= scale;
    return out;
}

Field SpectralOps::laplacian(const Field& f) const {
    Spectrum s = forward(f);
    const int nxh = grid_.nx() / 2 + 1;
    for (int j = 0; j < grid_.ny(); ++j)
        for (int i = 0; i < nxh; ++i) s[j * nxh + i] *= -(kx_[i] * kx_[i] + ky_[j] * ky_[j]);
    return backward(std::move(s));
}

Field SpectralOps::solve_poisson(const Field& rhs) const {
    Spectrum s = forward(rhs);
    const int nxh = grid_.nx() / 2 + 1;
    for (int j = 0; j < grid_.ny(); ++j)
        for (int i = 0; i < nxh; ++i) {
            double k2 = kx_[i] * kx_[i] + ky_[j] * ky_[j];
            s[j * nxh + i] = k2 > 0.0 ? s[j * nxh + i] / (-k2) : 0.0;
        }
    return backward(std::move(s));
}

std::array<Field, 2> SpectralOps::gradient(const Field& f) const {
    Spectrum s = forward(f);
    Spectrum sx = s;
    Spectrum sy = s;
    const int nx = grid_.nx();
    const int ny = grid_.ny();
    const int nxh = nx / 2 + 1;
    const std::complex<double> I(0.0, 1.0);
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nxh; ++i) {
            // odd derivatives drop the Nyquist modes
            sx[j * nxh + i] *= (i == nx / 2) ? 0.0 : I * kx_[i];
            sy[j * nxh + i] *= (j == ny / 2) ? 0.0 : I * ky_[j];
        }
    return {backward(std::move(sx)), backward(std::move(sy))};
}

Field SpectralOps::filter_nyquist(const Field& f) const {
    Spectrum s = forward(f);
    const int nx = grid_.nx();
    const int ny = grid_.ny();
    const int nxh = nx / 2 + 1;
    for (int j = 0; j < ny; ++j) s[j * nxh + nx / 2] = 0.0;
    for (int i = 0; i < nxh; ++i) s[(ny / 2) * nxh + i] = 0.0;
    return backward(std::move(s));
}

double SpectralOps::mean(const Field& f) const { return field_sum(f, grid_.nx()) / static_cast<double>(f.size()); }

double SpectralOps::integrate(const Field& f) const { return field_sum(f, grid_.nx()) * grid_.cell_area(); }

double SpectralOps::inner(const Field& f, const Field& g) const {
    return field_dot(f, g, grid_.nx()) * grid_.cell_area();
}

Field resample(const SpectralOps& from, const SpectralOps& to, const Field& f) {
    return resample_spectrum(from, to, from.forward(f));
}

Field resample_spectrum(const SpectralOps& from, const SpectralOps& to, const SpectralOps::Spectrum& s) {
    const int fy = from.grid().ny();
    const int tx = to.grid().nx();
    const int ty = to.grid().ny();
    const int fxh = from.grid().nx() / 2 + 1;
    const int txh = tx / 2 + 1;
    SpectralOps::Spectrum t(to.spectral_size(), 0.0);
    const double scale = static_cast<double>(to.grid().size()) / static_cast<double>(from.grid().size());
    const int mx = std::min(from.grid().nx(), tx) / 2;  // modes strictly below the smaller Nyquist survive
    const int my = std::min(fy, ty) / 2;
    for (int j = -my + 1; j < my; ++j) {
        int sj = j >= 0 ? j : j + fy;
        int tj = j >= 0 ? j : j + ty;
        for (int i = 0; i < mx; ++i) t[tj * txh + i] = s[sj * fxh + i] * scale;
    }
    return to.backward(std::move(t));
}

double interpolate_cubic(const PeriodicGrid& grid, const Field& f, Vec2 x) {
    const int nx = grid.nx();
    const int ny = grid.ny();
    double gx = x.x / grid.hx();
    double gy = x.y / grid.hy();
    double fx = std::floor(gx);
    double fy = std::floor(gy);
    double tx = gx - fx;
    double ty = gy - fy;
    auto w = [](double t, double out[4]) {
        // Keys kernel, a = -1/2
        double t2 = t * t;
        double t3 = t2 * t;
        out[0] = -0.5 * t3 + t2 - 0.5 * t;
        out[1] = 1.5 * t3 - 2.5 * t2 + 1.0;
        out[2] = -1.5 * t3 + 2.0 * t2 + 0.5 * t;
        out[3] = 0.5 * t3 - 0.5 * t2;
    };
    double wx[4];
    double wy[4];
    w(tx, wx);
    w(ty, wy);
    long ix0 = static_cast<long>(fx) - 1;
    long iy0 = static_cast<long>(fy) - 1;
    double s = 0.0;
    for (int b = 0; b < 4; ++b) {
        long j = ((iy0 + b) % ny + ny) % ny;
        double row = 0.0;
        for (int a = 0; a < 4; ++a) {
            long i = ((ix0 + a) % nx + nx) % nx;
            row += wx[a] * f[static_cast<std::size_t>(i + nx * j)];
        }
        s += wy[b] * row;
    }
    return s;
}

}  // namespace mtb
