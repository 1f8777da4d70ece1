#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "mtb/geometry.hpp"
#include "mtb/green.hpp"

namespace mtb {

/// k bubble centers and weights.
struct Configuration {
    std::vector<Vec2> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
};

struct ConfigurationLimits {
    double separation_floor = 1e-6;  // as a fraction of the shorter side
    double weight_floor = 1e-12;     // weights must lie in [floor, 1/floor]
};

/// Throws SeparationViolation / ConfigError when the configuration is not admissible.
void validate_configuration(const Configuration& cfg, const TorusGeometry& geom,
                            const ConfigurationLimits& lim = {});

double psi_k(const Configuration& cfg, const GreenEvaluator& green,
             const ConfigurationLimits& lim = {});

/// Derivatives in the variable order [xi_1.x, xi_1.y, ..., xi_k.x, xi_k.y, m_1, ..., m_k].
Eigen::VectorXd grad_psi_k(const Configuration& cfg, const GreenEvaluator& green,
                           const ConfigurationLimits& lim = {});
Eigen::MatrixXd hess_psi_k(const Configuration& cfg, const GreenEvaluator& green,
                           const ConfigurationLimits& lim = {});

struct WeightSystemParams {
    double A = 0.0;
    double B = 0.0;
};

/// A = log 16 - 2 - 4 pi H, the coefficient for which the weight system is the
/// m-stationarity of psi_2.
double weight_constant(double robin);

WeightSystemParams weight_system_params(const GreenEvaluator& green, Vec2 z);

double f0_map(double t, double A, double B);

enum class BranchKind { diagonal, pair, pair_swapped };

const char* to_string(BranchKind k);

struct WeightBranch {
    BranchKind kind = BranchKind::diagonal;
    double m1 = 0.0;
    double m2 = 0.0;
    double hessdet = 0.0;
    bool nondegenerate = true;
    double stationarity = 0.0;  // max |d psi_2 / d m_i|
};

/// Diagonal branch first, then (pair, pair_swapped) couples with m1 < m2 in the pair entry.
std::vector<WeightBranch> solve_weights(double A, double B, double tol = 1e-14);

double hessian_det_weights(double m1, double m2, double gval);

/// Value of 2 pi (m2/m1 + m1/m2) G + 1; zero exactly on the degeneracy set.
double degeneracy_condition(double m1, double m2, double gval);

double degeneracy_margin(double B);

struct PeriodEntry {
    int index = 0;
    Vec2 point;
    double f = 0.0;
    double B = 0.0;
    std::vector<WeightBranch> branches;
    int count = 0;
    int predicted_count = 0;  // 1 when f >= 0, otherwise 3
    bool deviation = false;
};

struct FamilyCatalog {
    double tau = 1.0;
    double robin = 0.0;
    double A = 0.0;
    TauThresholds thresholds;
    bool inside_regime = false;
    std::array<PeriodEntry, 3> periods;
    int total_families = 0;
    int predicted_total = 0;            // 9 inside (tau0, tau1), 7 outside
    bool predicted_split_applies = false;  // every negative B_i lies in (-1, 0)
    std::vector<std::string> notes;
};

FamilyCatalog family_catalog(double tau, const TorusGeometry& geom, double tol = 1e-14);

}  // namespace mtb
