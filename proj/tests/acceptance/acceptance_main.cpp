// Runs the acceptance criteria and prints one line per criterion.
//
// Exit status: 0 when every criterion ran to a verdict (report mode) or, with --strict, when
// none of them failed; 2 on a failed criterion under --strict.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "mtb/acceptance.hpp"
#include "mtb/kernels.hpp"

int main(int argc, char** argv) {
    CLI::App app("acceptance suite");
    mtb::AcceptanceOptions opt;
    bool strict = false;
    std::vector<int> only;
    std::string json_out;
    std::string log_out;
    int workers = 0;
    app.add_flag("--strict", strict, "exit 2 if any criterion fails");
    app.add_option("--only", only, "criterion ids to run")->check(CLI::Range(1, 11));
    app.add_option("--json", json_out, "write the results to this file");
    app.add_option("--log", log_out, "also write the verdict lines to this file");
    app.add_option("--seed", opt.seed);
    app.add_option("--workers", workers);
    app.add_option("--solve-grid", opt.solve_grid);
    app.add_option("--solve-lambdas", opt.solve_lambdas);
    CLI11_PARSE(app, argc, argv);
    if (workers > 0) mtb::set_worker_count(workers);

    std::ofstream log;
    if (!log_out.empty()) log.open(log_out);
    auto results = mtb::run_acceptance(opt, only, [&](const mtb::CriterionResult& r) {
        std::printf("%s\n", mtb::summary_line(r).c_str());
        std::fflush(stdout);
        if (log.is_open()) log << mtb::summary_line(r) << "\n" << std::flush;
    });
    int pass = 0;
    int fail = 0;
    int nr = 0;
    for (const auto& r : results) {
        pass += r.verdict == mtb::Verdict::pass;
        fail += r.verdict == mtb::Verdict::fail;
        nr += r.verdict == mtb::Verdict::not_reproducible;
    }
    std::printf("acceptance: %d pass, %d fail, %d not reproducible at desk scale\n", pass, fail, nr);
    if (log.is_open()) log << "acceptance: " << pass << " pass, " << fail << " fail, " << nr << " not reproducible at desk scale\n";
    if (!json_out.empty()) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& r : results) j.push_back(mtb::to_json(r));
        std::ofstream(json_out) << j.dump(2) << "\n";
    }
    if (strict && !mtb::suite_passed(results)) return 2;
    return 0;
}
