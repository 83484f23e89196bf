#pragma once

#include "hsodm/homogeneous.hpp"
#include "hsodm/types.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace hsodm {

/// Orthonormal Krylov basis with its tridiagonal projection:
/// F Q = Q T + xi e_j'.
struct KrylovState {
    Matrix basis;     // (n+1) x j
    Vector diagonal;  // alpha_1..alpha_j
    Vector offdiag;   // beta_1..beta_{j-1}; zero entries mark restarts after breakdown
    Vector xi;        // residual vector after step j
    int j = 0;
    int restarts = 0;

    Matrix tridiagonal() const;
};

struct SkewedStart {
    Vector q1;              // unit, size n+1
    double psi = 1.0;
    double alpha = 0.0;     // |q1(n)|
    double failure_prob = 1e-3;
    std::uint64_t seed = 0;
    Vector draws;           // the raw Gaussian sample b
};

/// Samples b ~ N(0, I_{n+1}), scales b_{n+1} by psi and normalizes.
SkewedStart skewed_initial_vector(Index n, double psi, std::uint64_t seed, double failure_prob = 1e-3);

/// Default Psi = 10 sqrt(n) / (p eps^2).
double default_psi(Index n, double failure_prob, double epsilon);

/// 2 ceil(log2(dim)) + 10 where dim = n+1.
int default_norm_iterations(Index dim);

/// Power iteration on F^2 from a random start. The returned Fhat satisfies
/// ||F|| in [Fhat/2, Fhat] with high probability.
double estimate_operator_norm(const LinearMap& apply, Index dim, int iters, std::uint64_t seed);

struct InexactBudget {
    double e_k = 1e-6;
    int j_min = 0;
    int j_max = 1;
    double norm_estimate = 1.0;
    std::optional<double> eigengap;
};

/// Lanczos iteration count from the gap-free and (when a gap is known) the
/// gap-dependent bounds, clamped to [j_min, n+2]. Log arguments are clamped at e.
int iteration_budget(double norm_est, double e_k, double overlap_est, std::optional<double> gap, int j_min,
                     Index n);

struct LanczosDiagnostics {
    KrylovState state;
    std::vector<double> ritz_history;   // leftmost Ritz value after each step
    std::vector<double> ritz_residuals; // |s_last| * ||xi|| after each step
    double max_recurrence_residual = 0.0;
};

/// Leftmost Ritz pair of F from the Krylov space of `q1`. Stops when
/// |s_last| ||xi|| <= ritz_tol, ||xi|| <= ritz_tol, or after j_max steps;
/// no stop test is applied before j_min steps. On breakdown before j_min the
/// basis is extended with a random orthogonal direction drawn from `seed`.
SubproblemSolution lanczos_leftmost(const LinearMap& apply, const Vector& q1, const InexactBudget& budget,
                                    double ritz_tol, std::uint64_t seed = 0,
                                    LanczosDiagnostics* diagnostics = nullptr);

struct InexactOptions {
    double e_k = 1e-6;
    int j_min = 0;
    double failure_prob = 1e-3;
    double epsilon = 1e-5;
    std::optional<double> psi;
    std::optional<double> hessian_bound; // U_H; enables the closed-form norm bound
    std::optional<double> eigengap;
    std::optional<double> ritz_tol;      // defaults to e_k
    std::uint64_t seed = 0;
};

struct InexactDiagnostics {
    SkewedStart start;
    InexactBudget budget;
    LanczosDiagnostics lanczos;
};

/// Skewed start (last entry sign chosen so alpha g'u <= 0), norm estimate,
/// budget, then lanczos_leftmost on F.
SubproblemSolution solve_inexact(const HomogeneousSystem& F, const InexactOptions& options,
                                 InexactDiagnostics* diagnostics = nullptr);

} // namespace hsodm
