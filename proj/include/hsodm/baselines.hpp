#pragma once

#include "hsodm/problem.hpp"
#include "hsodm/solver.hpp"
#include "hsodm/types.hpp"

#include <string>

namespace hsodm {

// Comparison solvers for the benchmark harness. Both return the shared
// SolveResult; IterationRecord::rho carries the acceptance ratio.

struct SteihaugResult {
    Vector d;
    int iterations = 0;
    std::string reason; // converged | negative_curvature | boundary | max_iters | zero_gradient
    double model_value = 0.0; // g'd + d'Hd / 2
};

/// Truncated CG on g'd + d'Hd/2 subject to ||d|| <= radius. Stops at the
/// boundary on negative curvature or radius exit, or when ||r|| <= cg_tol.
SteihaugResult steihaug_cg(const LinearMap& hessian, const Vector& g, double radius, double cg_tol, int max_cg);

struct TrustRegionConfig {
    double gtol = 1e-5;
    int max_iters = 20000;
    double initial_radius = 1.0;
    double max_radius = 1e8;
    double accept_ratio = 0.1;  // accept when rho >= accept_ratio
    double expand_ratio = 0.75; // expand when rho >= expand_ratio and the step hit the boundary
    double shrink_factor = 0.25;
    double expand_factor = 2.0;
    int max_cg = 0; // 0 means 2n
    Index dense_threshold = kDefaultDenseThreshold;
    bool record_trace = true;

    void validate() const;
};

SolveResult newton_tr_solve(const ObjectiveProblem& problem, const Vector& x1, const TrustRegionConfig& config);

struct CubicStep {
    Vector d;
    double lambda = 0.0;      // multiplier, lambda = sigma ||d||
    bool hard_case = false;
    double model_value = 0.0; // g'd + d'Hd / 2 + sigma ||d||^3 / 3
};

/// Global minimizer of g'd + d'Hd/2 + (sigma/3)||d||^3 for dense symmetric H,
/// through the secular equation ||(H + lambda I)^{-1} g|| = lambda / sigma on
/// the eigendecomposition of H. Throws NumericalError if the root finder fails.
CubicStep cubic_subproblem(const Matrix& hessian, const Vector& g, double sigma);

struct CubicRegConfig {
    double gtol = 1e-5;
    int max_iters = 20000;
    double initial_sigma = 1.0;
    double min_sigma = 1e-10;
    double max_sigma = 1e16;
    double accept_ratio = 0.1;   // reject and double sigma below this
    double success_ratio = 0.75; // halve sigma at or above this
    Index dense_threshold = kDefaultDenseThreshold;
    bool record_trace = true;

    void validate() const;
};

SolveResult cubic_reg_solve(const ObjectiveProblem& problem, const Vector& x1, const CubicRegConfig& config);

} // namespace hsodm
