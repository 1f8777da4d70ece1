#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace mtb {

using Vector = std::vector<double>;
/// out = A in; out is resized by the callee.
using LinearOp = std::function<void(const Vector& in, Vector& out)>;

struct KrylovResult {
    int iterations = 0;
    double residual = 0.0;  // true relative residual |b - A x| / |b| at exit
    bool converged = false;
};

/// Preconditioned MINRES for symmetric A with symmetric positive definite M (nullptr: identity).
/// Stops when the preconditioned residual estimate drops below tol times its initial value.
KrylovResult minres(const LinearOp& a, const LinearOp* m, const Vector& b, Vector& x, double tol,
                    int max_iter);

/// Right-preconditioned restarted GMRES(restart): solves A P y = b, x = P y. p may be nullptr.
KrylovResult gmres(const LinearOp& a, const LinearOp* p, const Vector& b, Vector& x, double tol,
                   int restart, int max_iter);

struct LanczosResult {
    std::vector<double> values;     // Ritz values, decreasing in magnitude
    std::vector<Vector> vectors;    // unit Ritz vectors
    std::vector<double> residuals;  // |beta_m s_m| estimates
    int steps = 0;
    bool converged = false;
};

/// Symmetric Lanczos with full reorthogonalization for the nev Ritz pairs of largest magnitude.
/// project (optional) is applied to the start vector, e.g. to remove the mean.
LanczosResult lanczos_largest(const LinearOp& a, std::size_t n, int nev, int max_steps, double tol,
                              std::uint64_t seed, const std::function<void(Vector&)>& project = {});

}  // namespace mtb
