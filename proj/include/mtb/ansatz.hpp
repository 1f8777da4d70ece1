#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mtb/green.hpp"
#include "mtb/reduced_energy.hpp"
#include "mtb/spectral.hpp"

namespace mtb {

/// Radial cut-off: 1 on [0, r0], 0 beyond 2 r0, quintic smoothstep (C^2) in between.
class Cutoff {
public:
    explicit Cutoff(double r0 = 0.125) : r0_(r0) {}

    double r0() const { return r0_; }
    double operator()(double r) const { return unit(r / r0_); }
    double d1(double r) const { return unit_d1(r / r0_) / r0_; }
    double d2(double r) const { return unit_d2(r / r0_) / (r0_ * r0_); }
    /// Radial Laplacian d2 + d1 / r.
    double laplacian(double r) const { return r > 0.0 ? d2(r) + d1(r) / r : 0.0; }

    static double unit(double s);
    static double unit_d1(double s);
    static double unit_d2(double s);

private:
    double r0_;
};

/// log(8 mu^2 / (mu^2 + |y|^2)^2)
double standard_bubble(Vec2 y, double mu);

/// log(x^2 + y^2) from log|x| and log|y| without overflow or underflow.
double log_sum_squares(double log_x, double log_y);

struct Bubble {
    Vec2 center;
    double m = 0.0;
    double log_mu = 0.0;
    double log_eps = 0.0;
    double log_delta = 0.0;
    double mass = 0.0;          // integral of chi e^U
    double surrogate_mean = 0.0;  // mean over the torus of the closed-form surrogate

    double mu() const { return std::exp(log_mu); }
    double eps() const { return std::exp(log_eps); }
    double delta() const { return std::exp(log_delta); }
};

/// A torus point described relative to its nearest bubble. For points within 2 r0 of bubble j,
/// log_r and theta carry the exact local polar position, which stays meaningful when the
/// offset from the center is far below the resolution of x.
struct Probe {
    int bubble = -1;  // -1: outside every cut-off support
    double log_r = 0.0;
    double theta = 0.0;
    Vec2 x;
};

struct BubbleParams {
    double lambda = 0.0;
    Cutoff cutoff;
    std::shared_ptr<const GreenEvaluator> green;
    std::vector<Bubble> bubbles;
    std::vector<std::string> warnings;

    const TorusGeometry& geometry() const { return green->geometry(); }
    std::size_t size() const { return bubbles.size(); }
    double resolvability(std::size_t j) const { return bubbles[j].delta() / cutoff.r0(); }
    double min_delta() const;
    Configuration configuration() const;

    /// Local coordinate y = x - xi_j in the fundamental cell.
    Vec2 local(std::size_t j, Vec2 x) const { return geometry().reduce(x - bubbles[j].center); }
    /// U_j at distance r from the center, as a logarithm that stays finite for tiny delta.
    double log_exp_u(std::size_t j, double r) const { return log_exp_u_log(j, std::log(r)); }
    double log_exp_u_log(std::size_t j, double log_r) const;
    /// chi_j e^{U_j}
    double source(std::size_t j, Vec2 x) const;
    /// chi_j [U_j - log 8 delta_j^2] + 8 pi H(x, xi_j)
    double surrogate(std::size_t j, Vec2 x) const;
    /// The same at local offset y with |y| = exp(log_r).
    double surrogate_local(std::size_t j, double log_r, Vec2 y) const;
    /// w_j(x) = U_j(x) + 2 log eps_j
    double profile(std::size_t j, Vec2 x) const;

    Probe probe(Vec2 x) const;
    Probe probe(std::size_t j, double log_r, double theta) const;
};

/// Closes mu_j, eps_j from the configuration. r0 <= 0 selects min(a, b)/8.
BubbleParams close_parameters(const Configuration& cfg, double lambda,
                              std::shared_ptr<const GreenEvaluator> green, double r0 = 0.0);

/// Stores mass and surrogate_mean for a bubble whose log_delta is already set.
void fill_bubble_integrals(Bubble& b, const Cutoff& cutoff, double area);

/// A single unit-weight bubble with prescribed delta (eps = 1), bypassing the closing relations.
BubbleParams bubble_at_scale(std::shared_ptr<const GreenEvaluator> green, Vec2 center, double log_delta,
                             double r0 = 0.0);

enum class ProjectionMode {
    grid,       // literal spectral solve of the sampled source; needs 4 nodes across delta
    expansion,  // closed-form surrogate only
    corrected,  // surrogate plus the exact smooth remainder, solved spectrally
};

const char* to_string(ProjectionMode m);

/// Spectral solve for D = PU_j - surrogate_j, whose source is smooth and supported on the cut-off
/// annulus, so it is valid for any delta_j.
Field projection_remainder(std::size_t j, const BubbleParams& params, const SpectralOps& ops);

/// Nodal values of PU_j in the requested mode. Throws GridTooCoarse in grid mode when delta_j < 4 h.
Field project_bubble(std::size_t j, const BubbleParams& params, const SpectralOps& ops,
                     ProjectionMode mode);

/// V = sum_j m_j PU_j with Lap V taken from the defining identities.
class AnsatzField {
public:
    AnsatzField(BubbleParams params, ProjectionMode mode, int grid_nx = 0, int grid_ny = 0);

    const BubbleParams& params() const { return params_; }
    ProjectionMode mode() const { return mode_; }
    double lambda() const { return params_.lambda; }

    double value(Vec2 x) const;
    double value(const Probe& p) const;
    double laplacian(Vec2 x) const;
    /// Mean over the torus: zero in grid and corrected modes, sum m_j mean(surrogate_j) otherwise.
    double mean() const;
    double u_value(Vec2 x) const { return std::sqrt(params_.lambda) * value(x); }
    /// PU_j - surrogate_j at x (zero in expansion mode).
    double correction(std::size_t j, Vec2 x) const;

    /// Nodal V on the given grid. Exact for the construction grid in grid/corrected modes.
    Field nodal_values(const PeriodicGrid& grid) const;
    const PeriodicGrid* construction_grid() const { return grid_.get(); }

private:
    BubbleParams params_;
    ProjectionMode mode_;
    std::unique_ptr<PeriodicGrid> grid_;
    std::vector<Field> corrections_;  // per bubble, nodal PU_j - surrogate_j
};

struct TestFunction {
    std::function<double(Vec2)> value;
    std::function<double(Vec2)> laplacian;
};

struct ConcentrationIntegrals {
    double values[3] = {0, 0, 0};
    double leading[3] = {0, 0, 0};
};

/// The three cut-off moments of f e^U against 1, 1/(delta^2+|y|^2) and
/// (a delta^2 - |y|^2)/(delta^2+|y|^2)^2, by adaptive radial times periodic angular quadrature.
ConcentrationIntegrals concentration_integrals(const TestFunction& fbar, double delta, Vec2 xi,
                                               const Cutoff& cutoff, double a = 1.0,
                                               int angular_nodes = 64);

}  // namespace mtb
