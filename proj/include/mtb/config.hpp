#pragma once

#include <cstdint>
#include <string>

#include "mtb/geometry.hpp"
#include "mtb/reduced_energy.hpp"

namespace mtb {

/// Settings shared by every subcommand. Stored as "key = value" lines; '#' starts a comment.
struct RunConfig {
    double a = 1.0;
    double b = 1.0;
    double newton_tol = 1e-10;
    double quadrature_tol = 1e-10;
    double green_tol = 1e-10;
    double lambda_lo = 1e-3;
    double lambda_hi = 1e-2;
    int lambda_n = 5;
    bool lambda_log = true;
    std::string seeds = "all";  // "all" or a comma list of p<i>[:diagonal|pair|pair_swapped]
    std::string out = "out";
    std::uint64_t seed = 1;
    int workers = 0;  // 0: OpenMP default
    int grid = 256;
    double delta_const = 10.0;
    int max_iter = 40;

    TorusGeometry geometry() const { return {a, b}; }
    double tau() const { return b / a; }
    double lambda_at(int i) const;

    bool operator==(const RunConfig&) const = default;
};

/// Throws ConfigError on unknown keys, malformed values or violated invariants.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
void validate(const RunConfig& cfg);

/// Canonical text: every key in fixed order, doubles with 17 significant digits.
std::string to_text(const RunConfig& cfg);

/// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string config_hash(const RunConfig& cfg);
std::uint64_t fnv1a(const std::string& bytes);

/// Whether a seeds spec ("all", or e.g. "p3:diagonal,p1") selects a catalog seed. Throws
/// ConfigError on a malformed spec.
bool seed_selected(const std::string& spec, int period, BranchKind kind);

}  // namespace mtb
