#pragma once

#include "hsodm/problem.hpp"
#include "hsodm/solver.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hsodm {

/// Solver ids understood by the harness.
inline constexpr const char* kSolverIds[] = {"hsodm", "hsodm-hvp", "newton-tr", "cubic"};

struct SolverSpec {
    std::string id;                                          // one of kSolverIds
    std::vector<std::pair<std::string, std::string>> overrides; // set_option key/value pairs
};

struct RunSpec {
    std::vector<SolverSpec> solvers;
    std::vector<std::string> problems; // "name[:n]"
    int max_iters = 20000;             // per-run iteration cap, also the failure value of time
    double gtol = 1e-5;
    double epsilon = 1e-6;             // HSODM target tolerance
    std::vector<std::uint64_t> seeds{0};
    int jobs = 1;

    void validate() const;
};

struct RunResult {
    std::string solver;
    std::string problem;
    std::uint64_t seed = 0;
    std::string status;
    bool success = false;
    int iterations = 0;     // cap when the run failed
    double wall_time = 0.0; // seconds; cap when the run failed
    std::int64_t n_f = 0, n_g = 0, n_H = 0, n_hvp = 0;
    double f = 0.0;
    double grad_norm = 0.0;
    int raw_iterations = 0; // before the failure substitution
    double raw_time = 0.0;
};

/// Runs one cell with the harness' cap and tolerance applied to the solver config.
SolveResult run_solver(const SolverSpec& solver, const ObjectiveProblem& problem, const RunSpec& spec,
                       std::uint64_t seed);

/// Every (solver, problem, seed) cell, in that nesting order. Cells run on up to
/// spec.jobs threads; a throwing cell is recorded as a failure.
std::vector<RunResult> run_benchmark(const RunSpec& spec);

/// exp(mean(log(v + shift))) - shift. Throws DomainError on negative or empty input.
double scaled_geometric_mean(const std::vector<double>& values, double shift);

enum class ProfileMetric { Iterations, Time, GradientEvals };

std::string_view to_string(ProfileMetric m);
ProfileMetric parse_metric(std::string_view name);

struct ProfileTable {
    ProfileMetric metric = ProfileMetric::Iterations;
    std::vector<double> alphas;
    std::vector<std::string> solvers;
    std::vector<std::vector<double>> curves; // curves[s][a]
    std::vector<double> success_fraction;    // per solver
    int problems = 0;                        // (problem, seed) instances in the denominator
};

/// Metric value used for ratios; zero is floored to one unit (one iteration,
/// one gradient, a microsecond) so that ratios stay finite.
double profile_metric(const RunResult& r, ProfileMetric metric);

/// Dolan-More curves on a uniform grid 0, step, ..., ending past the largest
/// log2 ratio so that every curve reaches its success fraction. Instances no
/// solver finished stay in the denominators.
ProfileTable performance_profile(const std::vector<RunResult>& results, ProfileMetric metric, double step = 0.05);

struct SgmRow {
    std::string solver;
    int runs = 0;
    int successes = 0;
    double time = 0.0;       // shift 1 second
    double iterations = 0.0; // shift 50
    double n_f = 0.0, n_g = 0.0, n_H = 0.0; // shift 50
};

/// Per-solver SGM statistics after the failure substitution. Rows sorted by solver id.
std::vector<SgmRow> sgm_table(const std::vector<RunResult>& results);

std::string runs_csv_header();
std::string runs_to_csv(const std::vector<RunResult>& results);
std::vector<RunResult> parse_runs_csv(const std::string& text);
std::vector<RunResult> read_runs_csv(const std::string& path);

std::string profile_csv(const ProfileTable& table, std::size_t solver);
std::string report_json(const std::vector<RunResult>& results, const std::vector<ProfileTable>& profiles);

/// Writes runs.csv, report.json and profile_<metric>_<solver>.csv into `dir`
/// (created if missing). Each file is written to a temporary name and renamed.
/// Throws IOError when the directory cannot be written.
void emit_report(const std::vector<RunResult>& results, const std::vector<ProfileTable>& profiles,
                 const std::string& dir);

/// Writes profile_<metric>_<solver>.csv and profile_<metric>.json into `dir`.
void emit_profiles(const std::vector<ProfileTable>& profiles, const std::string& dir);

/// Atomic text write (temporary file in the same directory, then rename).
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace hsodm
