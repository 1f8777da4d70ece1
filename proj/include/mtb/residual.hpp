#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mtb/ansatz.hpp"

namespace mtb {

/// Radial regimes of the weight rho around a bubble, plus everything beyond r0.
enum class Regime { core, log_annulus, sqrt_annulus, outer, far };
constexpr int kRegimeCount = 5;
const char* to_string(Regime r);

/// value = mantissa * exp(log_scale); used where e^U would overflow.
struct Scaled {
    double mantissa = 0.0;
    double log_scale = 0.0;

    double value() const { return mantissa * std::exp(log_scale); }
    double log_abs() const { return std::log(std::abs(mantissa)) + log_scale; }
};

/// The weight rho of the star norm, in log form.
class WeightProfile {
public:
    explicit WeightProfile(const BubbleParams& params, double delta_const = 10.0);

    double delta_const() const { return delta_const_; }
    /// log of delta_const eps_j |log eps_j|^2
    double log_inner_radius(std::size_t j) const;
    /// log sqrt(eps_j)
    double log_sqrt_radius(std::size_t j) const;
    /// log rho_j at distance exp(log_r) from xi_j
    double log_rho_j(std::size_t j, double log_r) const;
    /// log rho at a probe (rho = 1 outside every B_{r0})
    double log_rho(const Probe& p) const;
    Regime regime(const Probe& p) const;

private:
    const BubbleParams* params_;
    double delta_const_;
};

struct CloudSpec {
    int shells = 32;      // per regime
    int angular = 16;     // nodes per shell
    int far_nodes = 64;   // far-field lattice is far_nodes x far_nodes (scaled to the aspect ratio)
    std::uint64_t seed = 1;
};

struct SampleCloud {
    std::vector<Probe> probes;
    std::vector<Regime> regimes;
    std::array<int, kRegimeCount> shells{};  // radial shells per regime (far: lattice rows)
};

SampleCloud build_cloud(const BubbleParams& params, const WeightProfile& rho, const CloudSpec& spec);

struct StarNorm {
    double value = 0.0;     // sup rho^{-1} |h|
    double sup_norm = 0.0;  // sup |h| over the same cloud (may be inf when e^U overflows)
    Regime regime = Regime::far;
    Probe where;
    std::array<double, kRegimeCount> regime_sup{};
};

StarNorm star_norm(const std::function<Scaled(const Probe&)>& h, const WeightProfile& rho,
                   const SampleCloud& cloud);

struct MomentOptions {
    int angular = 16;     // angular nodes of the near-field polar rule
    int far_nodes = 256;  // trapezoid lattice for the smooth far-field part
    double rel_tol = 1e-10;
};

/// Torus integrals of the ansatz, split by a smooth partition of unity into polar pieces around
/// each bubble (integrated in log r) and a smooth remainder (trapezoid rule).
struct Moments {
    double lambda = 0.0;
    double vev = 0.0;          // lambda int V e^{lambda V^2}
    double ev = 0.0;           // int e^{lambda V^2}
    double grad2 = 0.0;        // int |grad V|^2 from the defining identities
    double source_mass = 0.0;  // sum_j m_j int chi_j e^{U_j} by the same rule
    double vev_target = 0.0;   // 8 pi sum m_j
    double ev_target = 0.0;    // 16 pi sum m_j^2 + |S|
};

/// integrand(probe, log_jac) must return f(probe) * exp(log_jac), evaluated stably.
double integrate_torus(const BubbleParams& params,
                       const std::function<double(const Probe&, double)>& integrand,
                       const MomentOptions& opt);

Moments compute_moments(const AnsatzField& v, const MomentOptions& opt = {});

/// J_lambda(sqrt(lambda) V) = (lambda / 2) (int |grad V|^2 - int e^{lambda V^2})
double ansatz_energy(const Moments& m);

/// R and f'(V) - K at probes, sharing one precomputed global integral.
class ResidualField {
public:
    explicit ResidualField(const AnsatzField& v, const MomentOptions& opt = {});

    const AnsatzField& ansatz() const { return *v_; }
    const Moments& moments() const { return moments_; }

    Scaled residual(const Probe& p) const;
    Scaled linearization_gap(const Probe& p) const;
    double residual(Vec2 x) const { return residual(v_->params().probe(x)).value(); }

private:
    const AnsatzField* v_;
    Moments moments_;
    double shift_ = 0.0;  // sum m_j M_j / |S| - lambda int V e^{lambda V^2} / |S|
};

/// Least-squares slope of log y against log x with its standard error.
struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
};
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ResidualReport {
    double lambda = 0.0;
    StarNorm residual;
    StarNorm gap;
    Moments moments;
    double energy = 0.0;
    std::vector<std::string> warnings;
};

struct ResidualOptions {
    double delta_const = 10.0;
    CloudSpec cloud;
    MomentOptions moments;
};

ResidualReport residual_report(const Configuration& cfg, double lambda,
                               std::shared_ptr<const GreenEvaluator> green, const ResidualOptions& opt = {},
                               double r0 = 0.0);

}  // namespace mtb

#include <Eigen/Dense>

namespace mtb {

/// Z_{ij} (i = 0, 1, 2), their projections PZ_{ij} and Lap PZ_{ij} as nodal fields.
struct KernelFields {
    std::array<Field, 3> z;
    std::array<Field, 3> pz;
    std::array<Field, 3> lap_pz;
};

/// Grid mode only: throws GridTooCoarse unless delta_j >= 4 h.
KernelFields kernel_fields(std::size_t j, const BubbleParams& params, const SpectralOps& ops);

/// Gram(3j + i, 3q + p) = int Lap PZ_{ij} PZ_{pq} over the grid.
Eigen::MatrixXd kernel_gram(const std::vector<KernelFields>& kf, const SpectralOps& ops);

/// K = sum_j chi_j e^{U_j} at the nodes.
Field kernel_potential(const BubbleParams& params, const PeriodicGrid& grid);

/// out = Lap phi + K phi - mean(K phi)
void apply_linearized(const SpectralOps& ops, const Field& k, const Field& phi, Field& out);

struct SpectrumOptions {
    int extra = 3;         // eigenvalues beyond 3k
    int max_steps = 120;   // Lanczos steps
    double tol = 1e-8;     // Ritz residual relative to the Ritz value
    double inner_tol = 1e-12;
    int inner_max_iter = 3000;
    std::uint64_t seed = 7;
};

struct SpectrumReport {
    std::vector<double> eigenvalues;  // ascending in magnitude
    int near_kernel_count = 0;        // position of the largest magnitude gap
    double gap_ratio = 0.0;           // |sigma_{3k+1}| / max_{i <= 3k} |sigma_i|
    std::vector<double> principal_angles_deg;  // between the 3k eigenvectors and span{PZ}
    Eigen::MatrixXd gram;
    int lanczos_steps = 0;
    int inner_iterations = 0;
    bool converged = false;
};

/// Shift-invert Lanczos at zero with MINRES inner solves preconditioned by the inverse Laplacian.
SpectrumReport near_kernel_spectrum(const BubbleParams& params, const PeriodicGrid& grid,
                                    const SpectrumOptions& opt = {});

/// Principal angles (degrees, ascending) between the column spans of a and b.
std::vector<double> principal_angles(const std::vector<Field>& a, const std::vector<Field>& b);

}  // namespace mtb
