#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "mtb/ansatz.hpp"
#include "mtb/reduced_energy.hpp"
#include "mtb/spectral.hpp"

namespace mtb {

/// Discrete operator F(v) = Lap v + lambda (v e^{lambda v^2} - mean) on mean-zero fields without
/// Nyquist content. The nonlinearity is evaluated on a twice finer grid.
class DiscreteProblem {
public:
    DiscreteProblem(const PeriodicGrid& grid, double lambda);

    const SpectralOps& ops() const { return ops_; }
    const PeriodicGrid& grid() const { return ops_.grid(); }
    double lambda() const { return lambda_; }

    using Spectrum = SpectralOps::Spectrum;

    /// Restricts iterates to fields even under x -> -x and y -> -y. Configurations whose centers
    /// are 0 and half periods have this symmetry, and it removes the translation near-kernel.
    void set_reflection_symmetry(bool on) { reflect_ = on; }
    bool reflection_symmetry() const { return reflect_; }

    /// Removes the mean and the Nyquist modes (and the odd part under reflection symmetry).
    Field project(const Field& v) const;
    void project(Spectrum& s) const;

    /// Throws Overflow when lambda v^2 > 700 on the fine grid.
    Field residual(const Field& v) const { return residual(ops_.forward(v)); }
    /// The same from Fourier coefficients. Lap v is then exact per mode, so the residual of a
    /// converged iterate is not swamped by k^2-amplified roundoff of a transform round trip.
    Field residual(const Spectrum& vh) const;

    /// Stores f'(v) on the fine grid for later Jacobian products. Throws Overflow like residual().
    void linearize(const Field& v) { linearize(ops_.forward(v)); }
    void linearize(const Spectrum& vh);
    /// J phi = Lap phi + lambda (f'(v) phi - mean), with v from the last linearize().
    Field jacobian(const Field& phi) const;

    Field up(const Field& f) const { return resample(ops_, fine_, f); }
    Field down(const Field& f) const { return resample(fine_, ops_, f); }

private:
    SpectralOps ops_;
    SpectralOps fine_;
    double lambda_;
    bool reflect_ = false;
    Field gp_;  // lambda e^{lambda v^2} (1 + 2 lambda v^2) on the fine grid
};

struct SolverConfig {
    double tol = 1e-10;  // sup-norm of F
    int max_iter = 40;
    int max_halvings = 20;  // backtracking on the discrete L2 norm of F
    int gmres_restart = 60;
    int gmres_max_iter = 600;
    double forcing_max = 1e-2;  // inexact Newton forcing term cap
    /// Called after each accepted step with (iteration, iterate, sup|F|, step length, GMRES iterations).
    std::function<void(int, const Field&, double, double, int)> monitor;
};

struct SolveResult {
    Field v;
    int iterations = 0;
    double residual = 0.0;
    double distance_to_seed = 0.0;
    bool converged = false;
    int linear_iterations = 0;
    std::vector<double> history;  // sup|F| after each accepted step, starting with the seed
    std::string failure;           // empty on success
};

/// Damped Newton-GMRES from the seed. Throws NoConvergence, LinearSolveStagnation, Overflow.
SolveResult newton_solve(const Field& seed, DiscreteProblem& problem, const SolverConfig& cfg = {});

/// J(u) = 1/2 int |grad u|^2 - lambda/2 int e^{u^2} by spectral gradient and trapezoidal rule.
double energy(const SpectralOps& ops, const Field& u, double lambda);

struct EnergyReport {
    double lambda = 0.0;
    int k = 0;
    double value = 0.0;
    double prediction = 0.0;  // 2 pi k - lambda |S| / 2 + 8 pi lambda psi_k
    double deviation = 0.0;
    double scaled = 0.0;      // deviation / (lambda^2 log^2 lambda)
};

EnergyReport energy_report(double value, const Configuration& cfg, double lambda,
                           const GreenEvaluator& green);

struct FarFieldReport {
    double distance = 0.0;  // nodes at least this far from every center are used
    std::size_t nodes = 0;
    double sup = 0.0;       // sup |v - 8 pi sum m_j G(., xi_j)|
    double ratio = 0.0;     // sup / lambda
};

/// distance <= 0 selects 4 r0.
FarFieldReport far_field_check(const Field& v, const PeriodicGrid& grid, const BubbleParams& params,
                               double distance = 0.0);

/// Peak offset (from the higher to the lower of the two largest peaks, reduced to the cell)
/// and height ratio lower / higher. Independent of translations.
struct Signature {
    Vec2 offset;
    double ratio = 0.0;
    double height = 0.0;
};

Signature signature(const Field& v, const PeriodicGrid& grid);

/// Same family: offsets agree within cells grid cells (up to sign, on the torus) and ratios within rel.
bool same_family(const Signature& a, const Signature& b, const PeriodicGrid& grid, double cells = 2.0,
                 double rel = 0.01);

/// True when every center satisfies 2 xi = 0 on the torus, so the problem is reflection symmetric.
bool reflection_symmetric(const Configuration& cfg, const TorusGeometry& geom);

/// Mean-zero nodal seed V for a configuration at lambda (corrected projection).
Field ansatz_seed(const BubbleParams& params, const PeriodicGrid& grid);

struct FamilyRun {
    int period = 0;  // 1..3
    BranchKind branch = BranchKind::diagonal;
    Configuration config;
    double lambda = 0.0;
    double min_delta = 0.0;
    SolveResult result;
    Signature sig;
    double energy = 0.0;
    FarFieldReport far;
    std::string error;  // per-run failure, enumeration continues
};

struct FamilyEnumeration {
    double tau = 1.0;
    double lambda = 0.0;
    std::vector<FamilyRun> runs;
    int catalog_count = 0;
    int converged = 0;
    int distinct = 0;  // among converged runs, modulo translation
};

struct EnumerationOptions {
    int grid = 256;
    double r0 = 0.0;  // <= 0: min(a, b) / 8
    SolverConfig solver;
    /// Seeds for which this returns false are left out. Empty: every catalog seed.
    std::function<bool(int period, BranchKind kind)> select;
};

/// One solve per catalog seed, run in parallel with independent state.
FamilyEnumeration enumerate_families(double tau, double lambda, const EnumerationOptions& opt = {});

/// Greedy count of translation classes.
int count_distinct(const std::vector<Signature>& sigs, const PeriodicGrid& grid);

struct ContinuationStep {
    double lambda = 0.0;
    SolveResult result;
    double energy = 0.0;
};

struct ContinuationResult {
    std::vector<ContinuationStep> steps;
    std::string stop_reason;  // empty when the whole path was traversed
};

/// Solves along a non-increasing lambda path. Each seed is the freshly closed ansatz plus the previous
/// correction v - V. Stops at the resolvability boundary or on the first failed solve.
ContinuationResult continuation(const std::vector<double>& lambdas, const Configuration& cfg,
                                std::shared_ptr<const GreenEvaluator> green, const PeriodicGrid& grid,
                                double r0 = 0.0, const SolverConfig& scfg = {}, double max_step_ratio = 2.0);

}  // namespace mtb
