#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace mtb {

enum class Verdict { pass, fail, not_reproducible };
const char* to_string(Verdict v);

struct CriterionResult {
    int id = 0;
    std::string name;
    Verdict verdict = Verdict::fail;
    std::string measured;  // one line, human readable
    double seconds = 0.0;
    double budget = 0.0;   // stated runtime limit in seconds
    nlohmann::json details;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240601;
    int projection_grid = 512;   // criterion 6
    int kernel_grid = 256;       // criterion 10
    int solve_grid = 512;        // criterion 11
    double lambda_lo = 1e-3;     // criteria 8, 9
    double lambda_hi = 1e-2;
    int lambda_n = 5;
    double delta_const = 10.0;
    std::vector<double> solve_lambdas = {10.0, 9.0, 8.0};
    int solve_max_iter = 25;
};

/// Runs one criterion (1..11). Numerical exceptions are caught and reported as FAIL.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt = {});

/// Runs the listed criteria (all when empty), calling report after each one.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt = {}, std::vector<int> ids = {},
                                            const std::function<void(const CriterionResult&)>& report = {});

/// "[PASS] 3 green cross-validation: ... (1.2 s)"
std::string summary_line(const CriterionResult& r);

/// True unless some criterion failed. NOT-REPRODUCIBLE does not fail the suite.
bool suite_passed(const std::vector<CriterionResult>& results);

nlohmann::json to_json(const CriterionResult& r);

}  // namespace mtb
