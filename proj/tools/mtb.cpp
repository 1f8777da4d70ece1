// Command-line entry points. Exit codes: 0 success, 2 acceptance failure, 3 configuration error,
// 4 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <numbers>
#include <random>
#include <string>

#include "mtb/acceptance.hpp"
#include "mtb/ansatz.hpp"
#include "mtb/config.hpp"
#include "mtb/errors.hpp"
#include "mtb/green.hpp"
#include "mtb/kernels.hpp"
#include "mtb/reduced_energy.hpp"
#include "mtb/report.hpp"
#include "mtb/residual.hpp"
#include "mtb/solver.hpp"

using namespace mtb;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Overrides {
    std::string config;
    std::string out;
    double tau = 0.0;
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    int lambda_n = 0;
    int grid = 0;
    double delta_const = 0.0;
    int workers = -1;
    long long seed = -1;
};

RunConfig resolve(const Overrides& o) {
    RunConfig c = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (!o.out.empty()) c.out = o.out;
    if (o.tau != 0.0) c.b = c.a * o.tau;
    if (o.lambda_lo != 0.0) c.lambda_lo = o.lambda_lo;
    if (o.lambda_hi != 0.0) c.lambda_hi = o.lambda_hi;
    if (o.lambda_n != 0) c.lambda_n = o.lambda_n;
    if (o.grid != 0) c.grid = o.grid;
    if (o.delta_const != 0.0) c.delta_const = o.delta_const;
    if (o.workers >= 0) c.workers = o.workers;
    if (o.seed >= 0) c.seed = static_cast<std::uint64_t>(o.seed);
    validate(c);
    if (c.workers > 0) set_worker_count(c.workers);
    return c;
}

std::string path(const RunConfig& c, const std::string& name) { return c.out + "/" + name; }

struct Seed {
    int period;
    WeightBranch branch;
    Configuration config;
    std::string label() const { return "p" + std::to_string(period) + ":" + to_string(branch.kind); }
};

std::vector<Seed> selected_seeds(const RunConfig& c) {
    const FamilyCatalog cat = family_catalog(c.tau(), c.geometry());
    std::vector<Seed> out;
    for (const PeriodEntry& e : cat.periods)
        for (const WeightBranch& b : e.branches)
            if (seed_selected(c.seeds, e.index, b.kind))
                out.push_back({e.index, b, Configuration{{{0.0, 0.0}, e.point}, {b.m1, b.m2}}});
    if (out.empty()) throw ConfigError("seeds '" + c.seeds + "' select no catalog family");
    return out;
}

int cmd_green(const RunConfig& c) {
    const std::string started = timestamp_now();
    json rows = json::array();
    std::vector<std::vector<double>> cols;
    std::printf("%10s %14s %14s %14s\n", "tau", "f1", "f2", "f3");
    for (int i = 0; i <= 12; ++i) {
        const double tau = 0.5 * std::pow(4.0, i / 12.0);
        HalfPeriodTable t = half_period_values(tau);
        rows.push_back({{"tau", tau}, {"f1", t.f1}, {"f2", t.f2}, {"f3", t.f3}, {"terms", t.truncation_terms}});
        cols.push_back({tau, t.f1, t.f2, t.f3});
        std::printf("%10.6f %14.10f %14.10f %14.10f\n", tau, t.f1, t.f2, t.f3);
    }
    TauThresholds th = tau_thresholds();
    std::printf("thresholds: tau0 = %.15f  tau1 = %.15f  tau0*tau1 - 1 = %.1e\n", th.tau0, th.tau1,
                th.tau0 * th.tau1 - 1.0);

    const TorusGeometry g = c.geometry();
    ThetaGreen theta(g);
    EwaldGreen ewald(g);
    const double rich = robin_constant(g);
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> ux(-0.5 * g.a(), 0.5 * g.a());
    std::uniform_real_distribution<double> uy(-0.5 * g.b(), 0.5 * g.b());
    double cross = 0.0;
    for (int i = 0; i < 100; ++i) {
        Vec2 z{ux(rng), uy(rng)};
        cross = std::max(cross, std::abs(theta.value(z) - ewald.value(z)));
    }
    std::printf("robin (a=%g, b=%g): theta %.15f  ewald %.15f  extrapolated %.15f\n", g.a(), g.b(), theta.robin(),
                ewald.robin(), rich);
    std::printf("theta vs Ewald on 100 points: %.2e (tol %.0e) %s\n", cross, c.green_tol,
                cross <= c.green_tol ? "ok" : "EXCEEDED");

    json rep = {{"half_periods", rows},
                {"thresholds", {{"tau0", th.tau0}, {"tau1", th.tau1}}},
                {"robin", {{"theta", theta.robin()}, {"ewald", ewald.robin()}, {"extrapolated", rich}}},
                {"cross_evaluator", {{"points", 100}, {"max_difference", cross}, {"tolerance", c.green_tol}}}};
    write_json(path(c, "green.json"), make_envelope("green", c, started, rep));
    write_columns(path(c, "green.tsv"), {"tau", "f1", "f2", "f3"}, cols);
    return cross <= c.green_tol ? 0 : 4;
}

int cmd_catalog(const RunConfig& c) {
    const std::string started = timestamp_now();
    const FamilyCatalog cat = family_catalog(c.tau(), c.geometry());
    json periods = json::array();
    std::vector<std::vector<double>> cols;
    for (const PeriodEntry& e : cat.periods) {
        json br = json::array();
        for (const WeightBranch& b : e.branches) {
            br.push_back({{"kind", to_string(b.kind)}, {"m1", b.m1}, {"m2", b.m2}, {"hessdet", b.hessdet},
                          {"nondegenerate", b.nondegenerate}, {"stationarity", b.stationarity}});
            cols.push_back({static_cast<double>(e.index), e.B, b.m1, b.m2, b.hessdet});
        }
        periods.push_back({{"period", e.index}, {"f", e.f}, {"B", e.B}, {"count", e.count},
                           {"predicted_count", e.predicted_count}, {"deviation", e.deviation}, {"branches", br}});
        std::printf("p%d: f = %.10f  B = %.10f  %d branch%s\n", e.index, e.f, e.B, e.count, e.count == 1 ? "" : "es");
    }
    std::printf("%d families\n", cat.total_families);
    for (const std::string& n : cat.notes) std::printf("note: %s\n", n.c_str());
    json rep = {{"tau", cat.tau},
                {"robin", cat.robin},
                {"A", cat.A},
                {"inside_regime", cat.inside_regime},
                {"total_families", cat.total_families},
                {"predicted_total", cat.predicted_total},
                {"periods", periods},
                {"notes", cat.notes}};
    write_json(path(c, "catalog.json"), make_envelope("catalog", c, started, rep));
    write_columns(path(c, "catalog.tsv"), {"period", "B", "m1", "m2", "hessdet"}, cols);
    return 0;
}

int cmd_ansatz(const RunConfig& c, bool dump) {
    const std::string started = timestamp_now();
    auto green = std::make_shared<ThetaGreen>(c.geometry());
    const int ny = std::max(16, 2 * static_cast<int>(std::lround(0.5 * c.grid * c.tau())));
    PeriodicGrid grid(c.geometry(), c.grid, ny);
    json runs = json::array();
    std::vector<std::vector<double>> cols;
    for (const Seed& s : selected_seeds(c))
        for (int i = 0; i < c.lambda_n; ++i) {
            const double lam = c.lambda_at(i);
            BubbleParams p = close_parameters(s.config, lam, green);
            json bubbles = json::array();
            for (const Bubble& b : p.bubbles)
                bubbles.push_back({{"center", {b.center.x, b.center.y}}, {"m", b.m}, {"log_mu", b.log_mu},
                                   {"log_eps", b.log_eps}, {"log_delta", b.log_delta}, {"mass", b.mass}});
            json run = {{"seed", s.label()}, {"lambda", lam}, {"bubbles", bubbles}, {"warnings", p.warnings},
                        {"min_delta", p.min_delta()}, {"grid_resolvable", p.min_delta() >= 4.0 * grid.h_max()}};
            if (dump) {
                const std::string base = path(c, "fields/ansatz_p" + std::to_string(s.period) + "_" +
                                                    to_string(s.branch.kind) + "_" + std::to_string(i));
                write_field(base, ansatz_seed(p, grid), grid, {{"seed", s.label()}, {"lambda", lam}, {"mode", "corrected"}});
                run["field"] = base;
            }
            runs.push_back(run);
            cols.push_back({static_cast<double>(s.period), lam, p.bubbles[0].log_delta, p.bubbles[1].log_delta});
            std::printf("%-16s lambda %.4g  log delta = (%.4g, %.4g)%s\n", s.label().c_str(), lam,
                        p.bubbles[0].log_delta, p.bubbles[1].log_delta,
                        p.min_delta() >= 4.0 * grid.h_max() ? "" : "  below grid resolution");
        }
    write_json(path(c, "ansatz.json"), make_envelope("ansatz", c, started, {{"runs", runs}}));
    write_columns(path(c, "ansatz.tsv"), {"period", "lambda", "log_delta1", "log_delta2"}, cols);
    return 0;
}

int cmd_residual(const RunConfig& c) {
    const std::string started = timestamp_now();
    auto green = std::make_shared<ThetaGreen>(c.geometry());
    ResidualOptions ro;
    ro.delta_const = c.delta_const;
    ro.cloud.seed = c.seed;
    ro.moments.rel_tol = c.quadrature_tol;
    json seeds = json::array();
    std::vector<std::vector<double>> cols;
    for (const Seed& s : selected_seeds(c)) {
        const double psi = psi_k(s.config, *green);
        std::vector<double> lams;
        std::vector<double> star;
        json rows = json::array();
        for (int i = 0; i < c.lambda_n; ++i) {
            const double lam = c.lambda_at(i);
            ResidualReport r = residual_report(s.config, lam, green, ro);
            const double L = std::abs(std::log(lam));
            const double pred = 4.0 * kPi - 0.5 * lam * c.geometry().area() + 8.0 * kPi * lam * psi;
            const double dev = r.energy - pred;
            lams.push_back(lam);
            star.push_back(r.residual.value);
            rows.push_back({{"lambda", lam},
                            {"star_norm", r.residual.value},
                            {"star_regime", to_string(r.residual.regime)},
                            {"gap", r.gap.value},
                            {"vev_error", r.moments.vev - r.moments.vev_target},
                            {"ev_error", r.moments.ev - r.moments.ev_target},
                            {"energy", r.energy},
                            {"energy_prediction", pred},
                            {"energy_scaled_deviation", dev / (lam * lam * L * L)},
                            {"warnings", r.warnings}});
            cols.push_back({static_cast<double>(s.period), lam, r.residual.value, r.gap.value, r.energy, pred});
        }
        json fit = nullptr;
        if (lams.size() >= 2) {
            SlopeFit f = fit_loglog(lams, star);
            fit = {{"slope", f.slope}, {"stderr", f.stderr_slope}, {"constant", std::exp(f.intercept)}};
            std::printf("%-16s residual slope %.4f +- %.4f, ||R||* ~ %.4g lambda^s\n", s.label().c_str(), f.slope,
                        f.stderr_slope, std::exp(f.intercept));
        } else {
            std::printf("%-16s ||R||* = %.4g at lambda %.4g\n", s.label().c_str(), star[0], lams[0]);
        }
        seeds.push_back({{"seed", s.label()}, {"psi", psi}, {"sweep", rows}, {"fit", fit}});
    }
    write_json(path(c, "residual.json"), make_envelope("residual", c, started, {{"seeds", seeds}}));
    write_columns(path(c, "residual.tsv"), {"period", "lambda", "star_norm", "gap", "energy", "prediction"}, cols);
    return 0;
}

int cmd_solve(const RunConfig& c, bool dump) {
    const std::string started = timestamp_now();
    EnumerationOptions eo;
    eo.grid = c.grid;
    eo.solver.tol = c.newton_tol;
    eo.solver.max_iter = c.max_iter;
    const std::string spec = c.seeds;
    eo.select = [&spec](int p, BranchKind k) { return seed_selected(spec, p, k); };
    if (std::abs(c.a - 1.0) > 0.0) throw ConfigError("solve works on the torus with a = 1; use --tau for the shape");
    json sweeps = json::array();
    std::vector<std::vector<double>> cols;
    int converged = 0;
    for (int i = 0; i < c.lambda_n; ++i) {
        const double lam = c.lambda_at(i);
        FamilyEnumeration e = enumerate_families(c.tau(), lam, eo);
        json runs = json::array();
        for (const FamilyRun& f : e.runs) {
            const std::string label = "p" + std::to_string(f.period) + ":" + to_string(f.branch);
            json j = {{"seed", label}, {"min_delta", f.min_delta}, {"converged", f.result.converged}, {"error", f.error}};
            if (f.result.converged) {
                ++converged;
                j.update({{"iterations", f.result.iterations},
                          {"linear_iterations", f.result.linear_iterations},
                          {"residual", f.result.residual},
                          {"distance_to_seed", f.result.distance_to_seed},
                          {"energy", f.energy},
                          {"energy_constant", (f.energy - 4.0 * kPi) / lam},
                          {"far_field", {{"distance", f.far.distance}, {"nodes", f.far.nodes}, {"sup", f.far.sup},
                                         {"ratio", f.far.ratio}}},
                          {"signature", {{"offset", {f.sig.offset.x, f.sig.offset.y}}, {"ratio", f.sig.ratio}}}});
                cols.push_back({lam, static_cast<double>(f.period), f.result.residual, f.energy,
                                f.result.distance_to_seed / lam, f.far.ratio});
                std::printf("lambda %-8.4g %-16s converged in %2d  |F| %.1e  E = %.8f  dist/lambda %.4f  far %.4f\n",
                            lam, label.c_str(), f.result.iterations, f.result.residual, f.energy,
                            f.result.distance_to_seed / lam, f.far.ratio);
                if (dump) {
                    const int ny = std::max(16, 2 * static_cast<int>(std::lround(0.5 * c.grid * c.tau())));
                    PeriodicGrid grid(c.geometry(), c.grid, ny);
                    const std::string base = path(c, "fields/solution_p" + std::to_string(f.period) + "_" +
                                                         to_string(f.branch) + "_" + std::to_string(i));
                    write_field(base, f.result.v, grid, {{"seed", label}, {"lambda", lam}});
                    j["field"] = base;
                }
            } else {
                std::printf("lambda %-8.4g %-16s failed: %s\n", lam, label.c_str(), f.error.c_str());
            }
            runs.push_back(j);
        }
        std::printf("lambda %-8.4g %d/%zu converged, %d distinct modulo translation\n", lam, e.converged, e.runs.size(),
                    e.distinct);
        sweeps.push_back({{"lambda", lam}, {"converged", e.converged}, {"distinct", e.distinct}, {"runs", runs}});
    }
    write_json(path(c, "solve.json"), make_envelope("solve", c, started, {{"sweeps", sweeps}}));
    write_columns(path(c, "solve.tsv"), {"lambda", "period", "residual", "energy", "distance_over_lambda", "far_ratio"},
                  cols);
    return converged > 0 ? 0 : 4;
}

int cmd_verify(const RunConfig& c, const std::vector<int>& only) {
    const std::string started = timestamp_now();
    AcceptanceOptions opt;
    opt.seed = c.seed;
    opt.lambda_lo = c.lambda_lo;
    opt.lambda_hi = c.lambda_hi;
    opt.lambda_n = c.lambda_n;
    opt.delta_const = c.delta_const;
    auto results = run_acceptance(opt, only, [](const CriterionResult& r) {
        std::printf("%s\n", summary_line(r).c_str());
        std::fflush(stdout);
    });
    json rep = json::array();
    for (const auto& r : results) rep.push_back(to_json(r));
    write_json(path(c, "verify.json"), make_envelope("verify", c, started, {{"criteria", rep}}));
    const bool ok = suite_passed(results);
    std::printf("verify: %s\n", ok ? "all criteria pass or are not reproducible at desk scale" : "FAILED");
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app("mean-field equation toolkit for flat tori");
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", tool_version());
    Overrides o;
    app.add_option("--config", o.config, "key = value config file");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--tau", o.tau, "torus aspect ratio b/a")->check(CLI::PositiveNumber);
    app.add_option("--lambda-lo", o.lambda_lo)->check(CLI::PositiveNumber);
    app.add_option("--lambda-hi", o.lambda_hi)->check(CLI::PositiveNumber);
    app.add_option("--lambda-n", o.lambda_n)->check(CLI::PositiveNumber);
    app.add_option("--grid", o.grid, "grid points per unit side")->check(CLI::PositiveNumber);
    app.add_option("--delta-const", o.delta_const, "star-norm weight constant")->check(CLI::PositiveNumber);
    app.add_option("--workers", o.workers, "OpenMP threads (0: default)")->check(CLI::NonNegativeNumber);
    app.add_option("--seed", o.seed, "RNG seed")->check(CLI::NonNegativeNumber);

    auto* green = app.add_subcommand("green", "half-period table, thresholds, Robin constant");
    auto* catalog = app.add_subcommand("catalog", "weight branches and family count");
    auto* ansatz = app.add_subcommand("ansatz", "bubble parameters along the lambda sweep");
    auto* residual = app.add_subcommand("residual", "star-norm residual, moments and energy sweep");
    auto* solve = app.add_subcommand("solve", "Newton solves from the catalog seeds");
    auto* verify = app.add_subcommand("verify", "acceptance suite");
    bool dump = false;
    ansatz->add_flag("--dump", dump, "write nodal fields");
    solve->add_flag("--dump", dump, "write converged fields");
    std::vector<int> only;
    verify->add_option("--only", only, "criterion ids")->check(CLI::Range(1, 11));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 3;
    }

    try {
        const RunConfig c = resolve(o);
        if (*green) return cmd_green(c);
        if (*catalog) return cmd_catalog(c);
        if (*ansatz) return cmd_ansatz(c, dump);
        if (*residual) return cmd_residual(c);
        if (*solve) return cmd_solve(c, dump);
        if (*verify) return cmd_verify(c, only);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 4;
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 3;
    }
    return 3;
}
