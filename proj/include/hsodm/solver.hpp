#pragma once

#include "hsodm/homogeneous.hpp"
#include "hsodm/problem.hpp"
#include "hsodm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsodm {

enum class StepsizeRule { FixedRadius, Backtracking };
enum class LocalPhase { Stop, ContinueWithDeltaZero };

enum class SolverStatus {
    SospCertified,     // small step passed both certification inequalities
    GradientConverged, // ||g|| <= gtol (only when gtol is configured)
    MaxIters,
    LineSearchStall,
    NumericalError,
};

std::string_view to_string(SolverStatus s);
std::string_view to_string(StepsizeRule s);
std::string_view to_string(LocalPhase p);

struct SolverConfig {
    double epsilon = 1e-6;
    std::optional<double> delta;  // default sqrt(epsilon)
    std::optional<double> radius; // default 2 sqrt(epsilon) / M, or sqrt(epsilon) when M is unknown or zero
    std::optional<double> nu;     // default 0.01 (exact) or 0.3 (inexact)

    StepsizeRule stepsize = StepsizeRule::Backtracking;
    double beta = 0.5;
    double gamma_ls = 1.0;
    std::optional<int> max_ls_trials; // overrides the trial cap j_N

    SolveMode mode = SolveMode::Exact;
    std::optional<double> e_k; // inexact Ritz tolerance, default sqrt(epsilon)
    double failure_prob = 1e-3;
    std::optional<double> psi;
    int j_min = 0;

    LocalPhase local_phase = LocalPhase::Stop;
    int max_outer_iters = 20000;
    int max_local_iters = 50;
    double local_gtol = 1e-12;
    Index dense_threshold = kDefaultDenseThreshold;

    /// Stop with GradientConverged once ||g|| <= gtol. Unset: only certification ends a run.
    std::optional<double> gtol;
    /// Certification constants used when M or U_H is unknown:
    /// ||g|| <= c_grad eps and lambda_min >= -c_curv sqrt(eps).
    double cert_grad_const = 1.0;
    double cert_curv_const = 1.0;

    std::uint64_t seed = 0;
    bool record_trace = true;

    /// Throws ConfigError on out-of-range values.
    void validate() const;
};

/// Parameters after defaults have been filled in from the problem's constants.
struct ResolvedParams {
    double epsilon = 0.0;
    double delta = 0.0;
    double radius = 0.0;
    double nu = 0.0;
    std::optional<double> lipschitz;     // M
    std::optional<double> hessian_bound; // U_H
    int ls_cap = 60;
};

ResolvedParams resolve_params(const SolverConfig& config, const ObjectiveProblem& problem);

/// ceil(log_beta(3 delta nu / (M + gamma))), floored at 0.
int line_search_cap(double delta, double nu, double lipschitz, double gamma_ls, double beta);

struct IterationRecord {
    int k = 0;
    std::string phase = "global"; // global | local
    double f = 0.0;
    double f_next = 0.0;
    double grad_norm = 0.0;
    double t = 0.0;
    double dual = 0.0;
    double d_norm = 0.0;
    double eta = 0.0;
    std::string kind; // small | large_a | large_b | local
    int ls_trials = 0;
    int lanczos_iters = 0;
    EvalCounters evals; // evaluations spent on this iteration
    double residual_norm = 0.0;
    std::uint64_t seed = 0;
    double delta = 0.0;
    double radius = 0.0;
    std::string flags; // ';'-separated markers such as delta_bump, local_fallback
    std::optional<double> dist_to_opt;
    std::optional<double> rho; // acceptance ratio, baselines only
};

struct Certificate {
    double grad_norm = 0.0;
    double grad_bound = 0.0;
    bool grad_ok = false;
    double lambda_min = 0.0;      // estimate of lambda_min(H(x_next))
    double curvature_bound = 0.0; // certified when lambda_min >= curvature_bound
    bool curvature_ok = false;
    std::optional<double> inexact_bound; // -2 delta - 2||g_k|| D - (U_H + gamma) D^2, inexact mode only
    bool constants_known = false;        // bounds come from M and U_H rather than c eps, c sqrt(eps)
    std::string method;                  // dense | lanczos
    bool certified() const { return grad_ok && curvature_ok; }
};

struct SolveResult {
    std::string solver = "hsodm";
    std::string problem;
    SolverStatus status = SolverStatus::MaxIters;
    std::string message;
    Vector x;
    double f = 0.0;
    double grad_norm = 0.0;
    std::optional<Certificate> certificate;
    std::vector<IterationRecord> trace;
    EvalCounters evals;
    int iterations = 0;       // outer iterations
    int local_iterations = 0; // delta = 0 iterations
    bool stagnated = false;
    double wall_time = 0.0; // seconds
    ResolvedParams params;

    bool success(double gtol) const;
};

/// Exact or inexact driver depending on config.mode.
SolveResult hsodm_solve(const ObjectiveProblem& problem, const Vector& x1, const SolverConfig& config);

/// hsodm_solve with mode forced to Inexact; nu must lie in (1/4, 1/2).
SolveResult inexact_hsodm_solve(const ObjectiveProblem& problem, const Vector& x1, const SolverConfig& config);

/// delta = 0 iterations x += v/t with unit steps from x_start. Falls back to the
/// global loop (flagged in the trace) when t = 0 or f increases.
SolveResult local_phase_solve(const ObjectiveProblem& problem, const Vector& x_start, const SolverConfig& config);

/// Delta / ||d||. Throws DomainError when d = 0.
double fixed_radius_stepsize(const Vector& d, double radius);

struct LineSearchResult {
    double eta = 0.0;
    int trials = 0; // accepted exponent j, eta = beta^j
    double decrease = 0.0;
    double f_new = 0.0;
    bool stalled = false;
};

/// Accepts the first eta = beta^j, j = 0..j_cap, with
/// f(x) - f(x + eta d) >= gamma_ls eta^3 ||d||^3 / 6. Non-finite trial values
/// count as rejections. `stalled` is set when no trial is accepted.
LineSearchResult backtracking_line_search(Evaluator& eval, const Vector& x, double fx, const Vector& d,
                                          double beta, double gamma_ls, int j_cap);

/// Certification of x_next after a small-value step from x_k.
Certificate small_step_certify(Evaluator& eval, const Vector& x_next, const Vector& g_next,
                               const ResolvedParams& params, const SolverConfig& config,
                               const SubproblemSolution& sol, double grad_norm_k,
                               std::optional<double> hessian_bound_estimate = std::nullopt);

/// Trace rows in IterationRecord field order, with a header.
std::string trace_csv(const SolveResult& result);
std::string trace_csv_header();

/// JSON document for a SolveResult (schema in docs/result.schema.json).
std::string result_to_json(const SolveResult& result, bool include_trace = true);

} // namespace hsodm
