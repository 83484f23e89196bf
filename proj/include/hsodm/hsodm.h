/* C interface to the HSODM solver library.
 *
 * Every function returns an hsodm_status. On failure the message is available
 * through hsodm_last_error() on the calling thread until the next failing call.
 * Handles are opaque; each *_new / *_from_* has a matching *_free that accepts
 * NULL. Strings returned through `const char**` are owned by the handle they
 * came from and stay valid until that handle is freed or queried again.
 */
#ifndef HSODM_H
#define HSODM_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define HSODM_API __declspec(dllexport)
#else
#define HSODM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hsodm_status {
    HSODM_OK = 0,
    HSODM_ERR_CONFIG = 1,     /* invalid option, unknown id, violated precondition */
    HSODM_ERR_DOMAIN = 2,     /* argument outside the mathematical domain */
    HSODM_ERR_EVALUATION = 3, /* objective callback failed or returned a non-finite value */
    HSODM_ERR_CAPABILITY = 4, /* problem lacks a required derivative */
    HSODM_ERR_NUMERICAL = 5,  /* eigensolver or root-finder failure */
    HSODM_ERR_IO = 6,
    HSODM_ERR_ARGUMENT = 7, /* NULL handle, short buffer, index out of range */
    HSODM_ERR_INTERNAL = 8
} hsodm_status;

/* Termination status of a solve. */
typedef enum hsodm_solver_status {
    HSODM_SOSP_CERTIFIED = 0,
    HSODM_GRADIENT_CONVERGED = 1,
    HSODM_MAX_ITERS = 2,
    HSODM_LINE_SEARCH_STALL = 3,
    HSODM_NUMERICAL_ERROR = 4
} hsodm_solver_status;

typedef struct hsodm_problem hsodm_problem;
typedef struct hsodm_config hsodm_config;
typedef struct hsodm_result hsodm_result;
typedef struct hsodm_bench hsodm_bench;
typedef struct hsodm_runs hsodm_runs;

HSODM_API const char* hsodm_last_error(void);
HSODM_API const char* hsodm_version(void);
HSODM_API const char* hsodm_status_name(hsodm_status status);
HSODM_API const char* hsodm_solver_status_name(hsodm_solver_status status);

/* ---- problems ---------------------------------------------------------- */

/* Callbacks return 0 on success; any other value aborts the evaluation.
 * Hessians are written column-major, n*n entries. */
typedef int (*hsodm_value_fn)(const double* x, size_t n, double* f, void* user);
typedef int (*hsodm_gradient_fn)(const double* x, size_t n, double* g, void* user);
typedef int (*hsodm_hessian_fn)(const double* x, size_t n, double* h, void* user);
typedef int (*hsodm_hvp_fn)(const double* x, const double* v, size_t n, double* out, void* user);

/* Built-in suite member from "name[:n]", e.g. "rosenbrock:100". */
HSODM_API hsodm_status hsodm_problem_from_id(const char* id, hsodm_problem** out);

/* User objective. `hessian` and `hvp` may be NULL but not both. `x0` (length n)
 * may be NULL, in which case the standard start is the origin. The callbacks
 * must be reentrant if the problem is solved from several threads. */
HSODM_API hsodm_status hsodm_problem_from_callbacks(const char* name, size_t n, hsodm_value_fn value,
                                                    hsodm_gradient_fn gradient, hsodm_hessian_fn hessian,
                                                    hsodm_hvp_fn hvp, void* user, const double* x0,
                                                    hsodm_problem** out);

/* Known Hessian Lipschitz constant M and Hessian bound U_H; pass NaN for unknown. */
HSODM_API hsodm_status hsodm_problem_set_constants(hsodm_problem* p, double lipschitz, double hessian_bound);
HSODM_API hsodm_status hsodm_problem_dimension(const hsodm_problem* p, size_t* n);
HSODM_API hsodm_status hsodm_problem_name(const hsodm_problem* p, const char** name);
HSODM_API hsodm_status hsodm_problem_start(const hsodm_problem* p, double* x, size_t n);
HSODM_API hsodm_status hsodm_problem_value(const hsodm_problem* p, const double* x, size_t n, double* f);

/* Finite-difference derivative check at x; *passed is 1 or 0. */
HSODM_API hsodm_status hsodm_problem_check_derivatives(const hsodm_problem* p, const double* x, size_t n,
                                                       double h, double rel_tol, int* passed);
HSODM_API void hsodm_problem_free(hsodm_problem* p);

/* Comma-separated list of suite family names. */
HSODM_API const char* hsodm_suite_names(void);

/* ---- solver configuration --------------------------------------------- */

/* solver: "hsodm", "hsodm-hvp", "newton-tr" or "cubic". */
HSODM_API hsodm_status hsodm_config_new(const char* solver, hsodm_config** out);
/* String-keyed option, e.g. ("epsilon", "1e-6") or ("stepsize", "fixed_radius"). */
HSODM_API hsodm_status hsodm_config_set(hsodm_config* c, const char* key, const char* value);
/* Comma-separated option keys accepted by this solver. */
HSODM_API hsodm_status hsodm_config_keys(const hsodm_config* c, const char** keys);
HSODM_API void hsodm_config_free(hsodm_config* c);

/* ---- solving ------------------------------------------------------------ */

/* Runs the configured solver from x0 (length n) or, when x0 is NULL, from the
 * problem's standard start. Solver outcomes such as MaxIters are reported
 * through the result, not the return value. */
HSODM_API hsodm_status hsodm_solve(const hsodm_problem* p, const hsodm_config* c, const double* x0, size_t n,
                                   hsodm_result** out);

HSODM_API hsodm_status hsodm_result_status(const hsodm_result* r, hsodm_solver_status* status);
HSODM_API hsodm_status hsodm_result_message(const hsodm_result* r, const char** message);
HSODM_API hsodm_status hsodm_result_x(const hsodm_result* r, double* x, size_t n);
HSODM_API hsodm_status hsodm_result_f(const hsodm_result* r, double* f);
HSODM_API hsodm_status hsodm_result_grad_norm(const hsodm_result* r, double* g);
HSODM_API hsodm_status hsodm_result_iterations(const hsodm_result* r, int* outer, int* local);
HSODM_API hsodm_status hsodm_result_evals(const hsodm_result* r, int64_t* n_f, int64_t* n_g, int64_t* n_H,
                                          int64_t* n_hvp);
/* *certified is 1 when a certificate exists and both inequalities hold. */
HSODM_API hsodm_status hsodm_result_certified(const hsodm_result* r, int* certified, double* lambda_min);
HSODM_API hsodm_status hsodm_result_wall_time(const hsodm_result* r, double* seconds);
HSODM_API hsodm_status hsodm_result_json(hsodm_result* r, int include_trace, const char** json);
HSODM_API hsodm_status hsodm_result_trace_csv(hsodm_result* r, const char** csv);
HSODM_API void hsodm_result_free(hsodm_result* r);

/* ---- benchmark harness --------------------------------------------------- */

HSODM_API hsodm_status hsodm_bench_new(hsodm_bench** out);
HSODM_API hsodm_status hsodm_bench_add_solver(hsodm_bench* b, const char* solver_id);
/* Override for the most recently added solver with the given id. */
HSODM_API hsodm_status hsodm_bench_solver_option(hsodm_bench* b, const char* solver_id, const char* key,
                                                 const char* value);
HSODM_API hsodm_status hsodm_bench_add_problem(hsodm_bench* b, const char* problem_id);
/* Keys: max_iters, gtol, epsilon, jobs, seeds (comma-separated list). */
HSODM_API hsodm_status hsodm_bench_set(hsodm_bench* b, const char* key, const char* value);
HSODM_API hsodm_status hsodm_bench_run(const hsodm_bench* b, hsodm_runs** out);
HSODM_API void hsodm_bench_free(hsodm_bench* b);

typedef struct hsodm_run_info {
    const char* solver;
    const char* problem;
    const char* status;
    uint64_t seed;
    int success;
    int iterations;
    double wall_time;
    double f;
    double grad_norm;
    int64_t n_f, n_g, n_H, n_hvp;
} hsodm_run_info;

HSODM_API hsodm_status hsodm_runs_read_csv(const char* path, hsodm_runs** out);
HSODM_API hsodm_status hsodm_runs_count(const hsodm_runs* r, size_t* count);
/* Strings in *info point into the handle. */
HSODM_API hsodm_status hsodm_runs_get(const hsodm_runs* r, size_t index, hsodm_run_info* info);
/* SGM table and runs as a JSON document. */
HSODM_API hsodm_status hsodm_runs_report_json(hsodm_runs* r, const char** json);
/* runs.csv, report.json and per-solver profile CSVs for each metric in the
 * comma-separated list ("iterations,time,gradient_evals"). */
HSODM_API hsodm_status hsodm_runs_emit_report(const hsodm_runs* r, const char* dir, const char* metrics);
/* Profile files only, for one metric. */
HSODM_API hsodm_status hsodm_runs_emit_profile(const hsodm_runs* r, const char* metric, const char* dir);
HSODM_API void hsodm_runs_free(hsodm_runs* r);

#ifdef __cplusplus
}
#endif

#endif /* HSODM_H */
