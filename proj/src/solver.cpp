#include "mtb/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "mtb/errors.hpp"
#include "mtb/kernels.hpp"
#include "mtb/krylov.hpp"

namespace mtb {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

}  // namespace

DiscreteProblem::DiscreteProblem(const PeriodicGrid& grid, double lambda)
    : ops_(grid), fine_(PeriodicGrid(grid.geometry(), 2 * grid.nx(), 2 * grid.ny())), lambda_(lambda) {
    if (grid.nx() < 16 || grid.ny() < 16 || grid.nx() % 2 || grid.ny() % 2)
        throw ConfigError("solver grid needs even sizes of at least 16");
    if (!(lambda > 0.0)) throw ConfigError("lambda must be positive");
}

Field DiscreteProblem::project(const Field& v) const {
    Spectrum s = ops_.forward(v);
    project(s);
    return ops_.backward(std::move(s));
}

void DiscreteProblem::project(Spectrum& s) const {
    const int nx = grid().nx();
    const int ny = grid().ny();
    const int nxh = nx / 2 + 1;
    s[0] = 0.0;
    for (int j = 0; j < ny; ++j) s[j * nxh + nx / 2] = 0.0;
    for (int i = 0; i < nxh; ++i) s[(ny / 2) * nxh + i] = 0.0;
    if (!reflect_) return;
    // even in x and y: real coefficients, symmetric in ky
    for (int j = 0; j <= ny / 2; ++j) {
        const int jm = (ny - j) % ny;
        for (int i = 0; i < nxh; ++i) {
            const double c = 0.5 * (s[j * nxh + i].real() + s[jm * nxh + i].real());
            s[j * nxh + i] = c;
            s[jm * nxh + i] = c;
        }
    }
}

Field DiscreteProblem::residual(const Spectrum& vh) const {
    Field g;
    if (!nonlinearity(resample_spectrum(ops_, fine_, vh), lambda_, g, nullptr))
        throw Overflow("lambda v^2 exceeds 700 on the dealiasing grid");
    Field gd = down(g);
    const double m = ops_.mean(gd);
    Spectrum lh = vh;
    const int nxh = grid().nx() / 2 + 1;
    for (int j = 0; j < grid().ny(); ++j)
        for (int i = 0; i < nxh; ++i) lh[j * nxh + i] *= -(ops_.kx(i) * ops_.kx(i) + ops_.ky(j) * ops_.ky(j));
    Field f = ops_.backward(std::move(lh));
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += lambda_ * (gd[i] - m);
    return f;
}

void DiscreteProblem::linearize(const Spectrum& vh) {
    Field g;
    if (!nonlinearity(resample_spectrum(ops_, fine_, vh), lambda_, g, &gp_))
        throw Overflow("lambda v^2 exceeds 700 on the dealiasing grid");
}

Field DiscreteProblem::jacobian(const Field& phi) const {
    Field p = up(phi);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] *= gp_[i];
    Field pd = down(p);
    const double m = ops_.mean(pd);
    Field f = ops_.laplacian(phi);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += pd[i] - m;
    return f;
}

SolveResult newton_solve(const Field& seed, DiscreteProblem& problem, const SolverConfig& cfg) {
    using Spectrum = DiscreteProblem::Spectrum;
    const SpectralOps& ops = problem.ops();
    SolveResult res;
    Spectrum vh = ops.forward(seed);
    problem.project(vh);
    const Field v0 = ops.backward(vh);
    Field f = problem.residual(vh);
    double fn = field_max_abs(f);
    double fl = std::sqrt(ops.inner(f, f));  // line-search merit
    res.history.push_back(fn);

    const LinearOp jac = [&](const Vector& in, Vector& out) { out = problem.jacobian(in); };
    const LinearOp pre = [&](const Vector& in, Vector& out) {
        out = ops.solve_poisson(in);
        for (double& x : out) x = -x;
    };

    while (fn > cfg.tol) {
        if (res.iterations >= cfg.max_iter)
            throw NoConvergence(fmt("Newton iteration cap %g reached, sup|F| = %.3e", cfg.max_iter, fn));
        problem.linearize(vh);
        Field rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        if (problem.reflection_symmetry()) rhs = problem.project(rhs);
        const double eta = std::clamp(fn, 1e-12, cfg.forcing_max);
        Field d;
        KrylovResult kr = gmres(jac, &pre, rhs, d, eta, cfg.gmres_restart, cfg.gmres_max_iter);
        res.linear_iterations += kr.iterations;
        if (!kr.converged && !(kr.residual < 0.5))
            throw LinearSolveStagnation(fmt("GMRES stalled at relative residual %.3e after %g iterations",
                                            kr.residual, kr.iterations));
        Spectrum dh = ops.forward(d);
        problem.project(dh);

        double t = 1.0;
        bool accepted = false;
        for (int h = 0; h <= cfg.max_halvings; ++h, t *= 0.5) {
            Spectrum trial = vh;
            for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += t * dh[i];
            Field ft;
            try {
                ft = problem.residual(trial);
            } catch (const Overflow&) {
                continue;
            }
            const double tl = std::sqrt(ops.inner(ft, ft));
            if (std::isfinite(tl) && tl < (1.0 - 1e-4 * t) * fl) {
                vh = std::move(trial);
                f = std::move(ft);
                fn = field_max_abs(f);
                fl = tl;
                accepted = true;
                break;
            }
        }
        ++res.iterations;
        if (!accepted)
            throw NoConvergence(fmt("line search failed after %g halvings, sup|F| = %.3e", cfg.max_halvings, fn));
        res.history.push_back(fn);
        if (cfg.monitor) cfg.monitor(res.iterations, ops.backward(vh), fn, t, kr.iterations);
    }
    res.v = ops.backward(vh);
    res.residual = fn;
    res.converged = true;
    double d = 0.0;
    for (std::size_t i = 0; i < v0.size(); ++i) d = std::max(d, std::abs(res.v[i] - v0[i]));
    res.distance_to_seed = d;
    return res;
}

double energy(const SpectralOps& ops, const Field& u, double lambda) {
    auto g = ops.gradient(u);
    Field dens(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        dens[i] = 0.5 * (g[0][i] * g[0][i] + g[1][i] * g[1][i]) - 0.5 * lambda * std::exp(u[i] * u[i]);
    return ops.integrate(dens);
}

EnergyReport energy_report(double value, const Configuration& cfg, double lambda, const GreenEvaluator& green) {
    EnergyReport r;
    r.lambda = lambda;
    r.k = static_cast<int>(cfg.size());
    r.value = value;
    r.prediction = 2.0 * kPi * r.k - 0.5 * lambda * green.geometry().area() + 8.0 * kPi * lambda * psi_k(cfg, green);
    r.deviation = value - r.prediction;
    const double l = std::log(lambda);
    r.scaled = r.deviation / (lambda * lambda * l * l);
    return r;
}

FarFieldReport far_field_check(const Field& v, const PeriodicGrid& grid, const BubbleParams& params,
                               double distance) {
    FarFieldReport r;
    r.distance = distance > 0.0 ? distance : 4.0 * params.cutoff.r0();
    const TorusGeometry& g = grid.geometry();
    for (std::size_t n = 0; n < grid.size(); ++n) {
        const Vec2 x = grid.node(n);
        double lim = 0.0;
        bool far = true;
        for (const Bubble& b : params.bubbles) {
            const Vec2 y = g.reduce(x - b.center);
            if (y.norm() < r.distance) {
                far = false;
                break;
            }
            lim += 8.0 * kPi * b.m * params.green->value(y);
        }
        if (!far) continue;
        ++r.nodes;
        r.sup = std::max(r.sup, std::abs(v[n] - lim));
    }
    r.ratio = r.sup / params.lambda;
    return r;
}

Signature signature(const Field& v, const PeriodicGrid& grid) {
    const TorusGeometry& g = grid.geometry();
    const std::size_t i1 = static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
    const Vec2 x1 = grid.node(i1);
    const double excl = 0.25 * g.min_side();
    std::size_t i2 = i1;
    double best = -INFINITY;
    for (std::size_t n = 0; n < grid.size(); ++n) {
        if (v[n] > best && g.distance(grid.node(n), x1) >= excl) {
            best = v[n];
            i2 = n;
        }
    }
    Signature s;
    s.height = v[i1];
    s.offset = g.reduce(grid.node(i2) - x1);
    s.ratio = v[i1] != 0.0 ? v[i2] / v[i1] : 0.0;
    return s;
}

bool same_family(const Signature& a, const Signature& b, const PeriodicGrid& grid, double cells, double rel) {
    const TorusGeometry& g = grid.geometry();
    const double tol = cells * grid.h_max();
    const double d = std::min(g.reduce(a.offset - b.offset).norm(), g.reduce(a.offset + b.offset).norm());
    return d <= tol && std::abs(a.ratio - b.ratio) <= rel * std::max(std::abs(a.ratio), std::abs(b.ratio));
}

int count_distinct(const std::vector<Signature>& sigs, const PeriodicGrid& grid) {
    std::vector<const Signature*> reps;
    for (const Signature& s : sigs) {
        bool found = false;
        for (const Signature* r : reps) found = found || same_family(s, *r, grid);
        if (!found) reps.push_back(&s);
    }
    return static_cast<int>(reps.size());
}

bool reflection_symmetric(const Configuration& cfg, const TorusGeometry& geom) {
    for (const Vec2& p : cfg.points)
        if (geom.reduce(2.0 * p).norm() > 1e-12 * geom.min_side()) return false;
    return true;
}

Field ansatz_seed(const BubbleParams& params, const PeriodicGrid& grid) {
    AnsatzField v(params, ProjectionMode::corrected, grid.nx(), grid.ny());
    return v.nodal_values(grid);
}

FamilyEnumeration enumerate_families(double tau, double lambda, const EnumerationOptions& opt) {
    const TorusGeometry geom(1.0, tau);
    auto green = std::make_shared<ThetaGreen>(geom);
    const FamilyCatalog cat = family_catalog(tau, geom);
    const int ny = std::max(16, 2 * static_cast<int>(std::lround(0.5 * opt.grid * tau)));
    const PeriodicGrid grid(geom, opt.grid, ny);

    FamilyEnumeration out;
    out.tau = tau;
    out.lambda = lambda;
    out.catalog_count = cat.total_families;
    for (const PeriodEntry& e : cat.periods)
        for (const WeightBranch& b : e.branches) {
            if (opt.select && !opt.select(e.index, b.kind)) continue;
            FamilyRun r;
            r.period = e.index;
            r.branch = b.kind;
            r.lambda = lambda;
            r.config.points = {{0.0, 0.0}, e.point};
            r.config.weights = {b.m1, b.m2};
            out.runs.push_back(std::move(r));
        }

    const long n = static_cast<long>(out.runs.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
        FamilyRun& r = out.runs[i];
        try {
            BubbleParams p = close_parameters(r.config, lambda, green, opt.r0);
            r.min_delta = p.min_delta();
            if (r.min_delta < 4.0 * grid.h_max())
                throw GridTooCoarse(fmt("delta %.3e below 4 h = %.3e", r.min_delta, 4.0 * grid.h_max()));
            DiscreteProblem prob(grid, lambda);
            prob.set_reflection_symmetry(reflection_symmetric(r.config, geom));
            r.result = newton_solve(ansatz_seed(p, grid), prob, opt.solver);
            Field u = r.result.v;
            for (double& x : u) x *= std::sqrt(lambda);
            r.energy = energy(prob.ops(), u, lambda);
            r.far = far_field_check(r.result.v, grid, p);
            r.sig = signature(r.result.v, grid);
        } catch (const std::exception& ex) {
            r.error = ex.what();
        }
    }
    std::vector<Signature> sigs;
    for (const FamilyRun& r : out.runs)
        if (r.result.converged) {
            ++out.converged;
            sigs.push_back(r.sig);
        }
    out.distinct = count_distinct(sigs, grid);
    return out;
}

ContinuationResult continuation(const std::vector<double>& lambdas, const Configuration& cfg,
                                std::shared_ptr<const GreenEvaluator> green, const PeriodicGrid& grid, double r0,
                                const SolverConfig& scfg, double max_step_ratio) {
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (lambdas[i] > lambdas[i - 1] || lambdas[i - 1] > max_step_ratio * lambdas[i])
            throw ConfigError("continuation path must be non-increasing with bounded step ratio");
    ContinuationResult out;
    Field prev_v;
    Field prev_seed;
    for (double lam : lambdas) {
        BubbleParams p = close_parameters(cfg, lam, green, r0);
        if (p.min_delta() < 4.0 * grid.h_max()) {
            out.stop_reason = fmt("resolvability boundary at lambda = %.6g (delta %.3e)", lam, p.min_delta());
            break;
        }
        Field seed = ansatz_seed(p, grid);
        Field start = seed;
        if (!prev_v.empty())
            for (std::size_t i = 0; i < start.size(); ++i) start[i] += prev_v[i] - prev_seed[i];
        try {
            DiscreteProblem prob(grid, lam);
            prob.set_reflection_symmetry(reflection_symmetric(cfg, grid.geometry()));
            ContinuationStep st;
            st.lambda = lam;
            st.result = newton_solve(start, prob, scfg);
            double d = 0.0;
            for (std::size_t i = 0; i < seed.size(); ++i) d = std::max(d, std::abs(st.result.v[i] - seed[i]));
            st.result.distance_to_seed = d;
            Field u = st.result.v;
            for (double& x : u) x *= std::sqrt(lam);
            st.energy = energy(prob.ops(), u, lam);
            prev_v = st.result.v;
            prev_seed = seed;
            out.steps.push_back(std::move(st));
        } catch (const NumericalError& ex) {
            out.stop_reason = fmt("lambda = %.6g: ", lam) + ex.what();
            break;
        }
    }
    return out;
}

}  // namespace mtb
