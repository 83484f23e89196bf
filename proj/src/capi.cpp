#include "hsodm/hsodm.h"

#include "hsodm/baselines.hpp"
#include "hsodm/bench.hpp"
#include "hsodm/options.hpp"
#include "hsodm/problem.hpp"
#include "hsodm/solver.hpp"

#include <cmath>
#include <memory>
#include <new>
#include <optional>
#include <sstream>
#include <string>

using namespace hsodm;

struct hsodm_problem {
    ObjectiveProblem problem;
    std::string name;
};

struct hsodm_config {
    std::string solver;
    SolverConfig hsodm;
    TrustRegionConfig tr;
    CubicRegConfig cubic;
    std::string keys;
};

struct hsodm_result {
    SolveResult result;
    std::string json;
    std::string csv;
};

struct hsodm_bench {
    RunSpec spec;
};

struct hsodm_runs {
    std::vector<RunResult> runs;
    std::string json;
};

namespace {

thread_local std::string g_last_error;

class ArgumentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void need(bool ok, const char* what) {
    if (!ok) throw ArgumentError(what);
}

template <class F>
hsodm_status guard(F&& body) {
    try {
        body();
        return HSODM_OK;
    } catch (const ArgumentError& e) {
        g_last_error = e.what();
        return HSODM_ERR_ARGUMENT;
    } catch (const ConfigError& e) {
        g_last_error = e.what();
        return HSODM_ERR_CONFIG;
    } catch (const DomainError& e) {
        g_last_error = e.what();
        return HSODM_ERR_DOMAIN;
    } catch (const EvaluationError& e) {
        g_last_error = e.what();
        return HSODM_ERR_EVALUATION;
    } catch (const CapabilityError& e) {
        g_last_error = e.what();
        return HSODM_ERR_CAPABILITY;
    } catch (const NumericalError& e) {
        g_last_error = e.what();
        return HSODM_ERR_NUMERICAL;
    } catch (const IOError& e) {
        g_last_error = e.what();
        return HSODM_ERR_IO;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return HSODM_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return HSODM_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown exception";
        return HSODM_ERR_INTERNAL;
    }
}

std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const std::string& s : v) {
        if (!out.empty()) out += ',';
        out += s;
    }
    return out;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string item;
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

bool known_solver(const std::string& id) {
    for (const char* s : kSolverIds)
        if (id == s) return true;
    return false;
}

Vector copy_in(const double* x, size_t n) { return Eigen::Map<const Vector>(x, static_cast<Index>(n)); }

} // namespace

extern "C" {

const char* hsodm_last_error(void) { return g_last_error.c_str(); }

const char* hsodm_version(void) { return "1.0.0"; }

const char* hsodm_status_name(hsodm_status s) {
    switch (s) {
    case HSODM_OK: return "ok";
    case HSODM_ERR_CONFIG: return "config_error";
    case HSODM_ERR_DOMAIN: return "domain_error";
    case HSODM_ERR_EVALUATION: return "evaluation_error";
    case HSODM_ERR_CAPABILITY: return "capability_error";
    case HSODM_ERR_NUMERICAL: return "numerical_error";
    case HSODM_ERR_IO: return "io_error";
    case HSODM_ERR_ARGUMENT: return "argument_error";
    case HSODM_ERR_INTERNAL: return "internal_error";
    }
    return "unknown";
}

const char* hsodm_solver_status_name(hsodm_solver_status s) {
    switch (s) {
    case HSODM_SOSP_CERTIFIED: return "sosp_certified";
    case HSODM_GRADIENT_CONVERGED: return "gradient_converged";
    case HSODM_MAX_ITERS: return "max_iters";
    case HSODM_LINE_SEARCH_STALL: return "line_search_stall";
    case HSODM_NUMERICAL_ERROR: return "numerical_error";
    }
    return "unknown";
}

// ---- problems

hsodm_status hsodm_problem_from_id(const char* id, hsodm_problem** out) {
    return guard([&] {
        need(id && out, "hsodm_problem_from_id: NULL argument");
        *out = nullptr;
        auto p = std::make_unique<hsodm_problem>();
        p->problem = parse_problem_id(id);
        p->name = p->problem.name;
        *out = p.release();
    });
}

hsodm_status hsodm_problem_from_callbacks(const char* name, size_t n, hsodm_value_fn value,
                                          hsodm_gradient_fn gradient, hsodm_hessian_fn hessian, hsodm_hvp_fn hvp,
                                          void* user, const double* x0, hsodm_problem** out) {
    return guard([&] {
        need(out && value && gradient && n > 0, "hsodm_problem_from_callbacks: missing argument");
        *out = nullptr;
        if (!hessian && !hvp) throw CapabilityError("a Hessian or Hessian-vector product callback is required");
        auto p = std::make_unique<hsodm_problem>();
        ObjectiveProblem& q = p->problem;
        q.name = name ? name : "user";
        q.dimension = static_cast<Index>(n);
        auto fail = [](const char* what, const Vector& x) {
            throw EvaluationError(std::string(what) + " callback reported failure", x);
        };
        q.value_fn = [=](const Vector& x) {
            double f = 0.0;
            if (value(x.data(), n, &f, user) != 0) fail("value", x);
            return f;
        };
        q.gradient_fn = [=](const Vector& x) {
            Vector g(static_cast<Index>(n));
            if (gradient(x.data(), n, g.data(), user) != 0) fail("gradient", x);
            return g;
        };
        if (hessian)
            q.hessian_fn = [=](const Vector& x) {
                Matrix h(static_cast<Index>(n), static_cast<Index>(n));
                if (hessian(x.data(), n, h.data(), user) != 0) fail("hessian", x);
                return h;
            };
        if (hvp)
            q.hvp_fn = [=](const Vector& x, const Vector& v) {
                Vector o(static_cast<Index>(n));
                if (hvp(x.data(), v.data(), n, o.data(), user) != 0) fail("hvp", x);
                return o;
            };
        q.standard_start = x0 ? copy_in(x0, n) : Vector::Zero(static_cast<Index>(n));
        q.validate();
        p->name = q.name;
        *out = p.release();
    });
}

hsodm_status hsodm_problem_set_constants(hsodm_problem* p, double lipschitz, double hessian_bound) {
    return guard([&] {
        need(p, "hsodm_problem_set_constants: NULL problem");
        if (!std::isnan(lipschitz) && !(lipschitz >= 0.0 && std::isfinite(lipschitz)))
            throw ConfigError("Lipschitz constant must be finite and nonnegative");
        if (!std::isnan(hessian_bound) && !(hessian_bound >= 0.0 && std::isfinite(hessian_bound)))
            throw ConfigError("Hessian bound must be finite and nonnegative");
        p->problem.constants.hessian_lipschitz =
            std::isnan(lipschitz) ? std::nullopt : std::optional<double>(lipschitz);
        p->problem.constants.hessian_bound =
            std::isnan(hessian_bound) ? std::nullopt : std::optional<double>(hessian_bound);
    });
}

hsodm_status hsodm_problem_dimension(const hsodm_problem* p, size_t* n) {
    return guard([&] {
        need(p && n, "hsodm_problem_dimension: NULL argument");
        *n = static_cast<size_t>(p->problem.dimension);
    });
}

hsodm_status hsodm_problem_name(const hsodm_problem* p, const char** name) {
    return guard([&] {
        need(p && name, "hsodm_problem_name: NULL argument");
        *name = p->name.c_str();
    });
}

hsodm_status hsodm_problem_start(const hsodm_problem* p, double* x, size_t n) {
    return guard([&] {
        need(p && x, "hsodm_problem_start: NULL argument");
        need(n >= static_cast<size_t>(p->problem.dimension), "hsodm_problem_start: buffer too short");
        Eigen::Map<Vector>(x, p->problem.dimension) = p->problem.standard_start;
    });
}

hsodm_status hsodm_problem_value(const hsodm_problem* p, const double* x, size_t n, double* f) {
    return guard([&] {
        need(p && x && f, "hsodm_problem_value: NULL argument");
        need(n == static_cast<size_t>(p->problem.dimension), "hsodm_problem_value: wrong dimension");
        Evaluator eval(p->problem);
        *f = eval.value(copy_in(x, n));
    });
}

hsodm_status hsodm_problem_check_derivatives(const hsodm_problem* p, const double* x, size_t n, double h,
                                             double rel_tol, int* passed) {
    return guard([&] {
        need(p && x && passed, "hsodm_problem_check_derivatives: NULL argument");
        need(n == static_cast<size_t>(p->problem.dimension), "hsodm_problem_check_derivatives: wrong dimension");
        *passed = check_derivatives(p->problem, copy_in(x, n), h, rel_tol).passed() ? 1 : 0;
    });
}

void hsodm_problem_free(hsodm_problem* p) { delete p; }

const char* hsodm_suite_names(void) {
    static const std::string names = join(suite_names());
    return names.c_str();
}

// ---- configuration

hsodm_status hsodm_config_new(const char* solver, hsodm_config** out) {
    return guard([&] {
        need(solver && out, "hsodm_config_new: NULL argument");
        *out = nullptr;
        if (!known_solver(solver)) throw ConfigError("unknown solver '" + std::string(solver) + "'");
        auto c = std::make_unique<hsodm_config>();
        c->solver = solver;
        if (c->solver == "hsodm-hvp") c->hsodm.mode = SolveMode::Inexact;
        *out = c.release();
    });
}

hsodm_status hsodm_config_set(hsodm_config* c, const char* key, const char* value) {
    return guard([&] {
        need(c && key && value, "hsodm_config_set: NULL argument");
        if (c->solver == "newton-tr")
            set_option(c->tr, key, value);
        else if (c->solver == "cubic")
            set_option(c->cubic, key, value);
        else
            set_option(c->hsodm, key, value);
    });
}

hsodm_status hsodm_config_keys(const hsodm_config* cc, const char** keys) {
    return guard([&] {
        need(cc && keys, "hsodm_config_keys: NULL argument");
        auto* c = const_cast<hsodm_config*>(cc);
        if (c->solver == "newton-tr")
            c->keys = join(option_keys(c->tr));
        else if (c->solver == "cubic")
            c->keys = join(option_keys(c->cubic));
        else
            c->keys = join(option_keys(c->hsodm));
        *keys = c->keys.c_str();
    });
}

void hsodm_config_free(hsodm_config* c) { delete c; }

// ---- solving

hsodm_status hsodm_solve(const hsodm_problem* p, const hsodm_config* c, const double* x0, size_t n,
                         hsodm_result** out) {
    return guard([&] {
        need(p && c && out, "hsodm_solve: NULL argument");
        *out = nullptr;
        if (x0) need(n == static_cast<size_t>(p->problem.dimension), "hsodm_solve: wrong dimension");
        const Vector x1 = x0 ? copy_in(x0, n) : p->problem.standard_start;
        auto r = std::make_unique<hsodm_result>();
        if (c->solver == "newton-tr")
            r->result = newton_tr_solve(p->problem, x1, c->tr);
        else if (c->solver == "cubic")
            r->result = cubic_reg_solve(p->problem, x1, c->cubic);
        else
            r->result = hsodm::hsodm_solve(p->problem, x1, c->hsodm);
        *out = r.release();
    });
}

hsodm_status hsodm_result_status(const hsodm_result* r, hsodm_solver_status* status) {
    return guard([&] {
        need(r && status, "hsodm_result_status: NULL argument");
        *status = static_cast<hsodm_solver_status>(static_cast<int>(r->result.status));
    });
}

hsodm_status hsodm_result_message(const hsodm_result* r, const char** message) {
    return guard([&] {
        need(r && message, "hsodm_result_message: NULL argument");
        *message = r->result.message.c_str();
    });
}

hsodm_status hsodm_result_x(const hsodm_result* r, double* x, size_t n) {
    return guard([&] {
        need(r && x, "hsodm_result_x: NULL argument");
        need(n >= static_cast<size_t>(r->result.x.size()), "hsodm_result_x: buffer too short");
        Eigen::Map<Vector>(x, r->result.x.size()) = r->result.x;
    });
}

hsodm_status hsodm_result_f(const hsodm_result* r, double* f) {
    return guard([&] {
        need(r && f, "hsodm_result_f: NULL argument");
        *f = r->result.f;
    });
}

hsodm_status hsodm_result_grad_norm(const hsodm_result* r, double* g) {
    return guard([&] {
        need(r && g, "hsodm_result_grad_norm: NULL argument");
        *g = r->result.grad_norm;
    });
}

hsodm_status hsodm_result_iterations(const hsodm_result* r, int* outer, int* local) {
    return guard([&] {
        need(r, "hsodm_result_iterations: NULL result");
        if (outer) *outer = r->result.iterations;
        if (local) *local = r->result.local_iterations;
    });
}

hsodm_status hsodm_result_evals(const hsodm_result* r, int64_t* n_f, int64_t* n_g, int64_t* n_H, int64_t* n_hvp) {
    return guard([&] {
        need(r, "hsodm_result_evals: NULL result");
        if (n_f) *n_f = r->result.evals.n_f;
        if (n_g) *n_g = r->result.evals.n_g;
        if (n_H) *n_H = r->result.evals.n_H;
        if (n_hvp) *n_hvp = r->result.evals.n_hvp;
    });
}

hsodm_status hsodm_result_certified(const hsodm_result* r, int* certified, double* lambda_min) {
    return guard([&] {
        need(r && certified, "hsodm_result_certified: NULL argument");
        const auto& c = r->result.certificate;
        *certified = c && c->certified() ? 1 : 0;
        if (lambda_min) *lambda_min = c ? c->lambda_min : std::nan("");
    });
}

hsodm_status hsodm_result_wall_time(const hsodm_result* r, double* seconds) {
    return guard([&] {
        need(r && seconds, "hsodm_result_wall_time: NULL argument");
        *seconds = r->result.wall_time;
    });
}

hsodm_status hsodm_result_json(hsodm_result* r, int include_trace, const char** json) {
    return guard([&] {
        need(r && json, "hsodm_result_json: NULL argument");
        r->json = result_to_json(r->result, include_trace != 0);
        *json = r->json.c_str();
    });
}

hsodm_status hsodm_result_trace_csv(hsodm_result* r, const char** csv) {
    return guard([&] {
        need(r && csv, "hsodm_result_trace_csv: NULL argument");
        r->csv = trace_csv(r->result);
        *csv = r->csv.c_str();
    });
}

void hsodm_result_free(hsodm_result* r) { delete r; }

// ---- benchmark

hsodm_status hsodm_bench_new(hsodm_bench** out) {
    return guard([&] {
        need(out, "hsodm_bench_new: NULL argument");
        *out = new hsodm_bench();
    });
}

hsodm_status hsodm_bench_add_solver(hsodm_bench* b, const char* solver_id) {
    return guard([&] {
        need(b && solver_id, "hsodm_bench_add_solver: NULL argument");
        if (!known_solver(solver_id)) throw ConfigError("unknown solver '" + std::string(solver_id) + "'");
        b->spec.solvers.push_back({solver_id, {}});
    });
}

hsodm_status hsodm_bench_solver_option(hsodm_bench* b, const char* solver_id, const char* key, const char* value) {
    return guard([&] {
        need(b && solver_id && key && value, "hsodm_bench_solver_option: NULL argument");
        for (auto it = b->spec.solvers.rbegin(); it != b->spec.solvers.rend(); ++it) {
            if (it->id != solver_id) continue;
            // Validate the key and value now rather than inside a worker thread.
            if (it->id == "newton-tr") {
                TrustRegionConfig c;
                set_option(c, key, value);
            } else if (it->id == "cubic") {
                CubicRegConfig c;
                set_option(c, key, value);
            } else {
                SolverConfig c;
                set_option(c, key, value);
            }
            it->overrides.emplace_back(key, value);
            return;
        }
        throw ConfigError("solver '" + std::string(solver_id) + "' has not been added");
    });
}

hsodm_status hsodm_bench_add_problem(hsodm_bench* b, const char* problem_id) {
    return guard([&] {
        need(b && problem_id, "hsodm_bench_add_problem: NULL argument");
        (void)parse_problem_id(problem_id);
        b->spec.problems.emplace_back(problem_id);
    });
}

hsodm_status hsodm_bench_set(hsodm_bench* b, const char* key, const char* value) {
    return guard([&] {
        need(b && key && value, "hsodm_bench_set: NULL argument");
        const std::string k = key;
        if (k == "max_iters") {
            b->spec.max_iters = static_cast<int>(parse_integer(value, k));
        } else if (k == "gtol") {
            b->spec.gtol = parse_double(value, k);
        } else if (k == "epsilon") {
            b->spec.epsilon = parse_double(value, k);
        } else if (k == "jobs") {
            b->spec.jobs = static_cast<int>(parse_integer(value, k));
        } else if (k == "seeds") {
            std::vector<std::uint64_t> seeds;
            for (const std::string& s : split_list(value)) {
                const long long v = parse_integer(s, "seeds");
                if (v < 0) throw ConfigError("seeds must be nonnegative");
                seeds.push_back(static_cast<std::uint64_t>(v));
            }
            b->spec.seeds = seeds;
        } else {
            throw ConfigError("unknown bench option '" + k + "'");
        }
    });
}

hsodm_status hsodm_bench_run(const hsodm_bench* b, hsodm_runs** out) {
    return guard([&] {
        need(b && out, "hsodm_bench_run: NULL argument");
        *out = nullptr;
        auto r = std::make_unique<hsodm_runs>();
        r->runs = run_benchmark(b->spec);
        *out = r.release();
    });
}

void hsodm_bench_free(hsodm_bench* b) { delete b; }

hsodm_status hsodm_runs_read_csv(const char* path, hsodm_runs** out) {
    return guard([&] {
        need(path && out, "hsodm_runs_read_csv: NULL argument");
        *out = nullptr;
        auto r = std::make_unique<hsodm_runs>();
        r->runs = read_runs_csv(path);
        *out = r.release();
    });
}

hsodm_status hsodm_runs_count(const hsodm_runs* r, size_t* count) {
    return guard([&] {
        need(r && count, "hsodm_runs_count: NULL argument");
        *count = r->runs.size();
    });
}

hsodm_status hsodm_runs_get(const hsodm_runs* r, size_t index, hsodm_run_info* info) {
    return guard([&] {
        need(r && info, "hsodm_runs_get: NULL argument");
        need(index < r->runs.size(), "hsodm_runs_get: index out of range");
        const RunResult& x = r->runs[index];
        info->solver = x.solver.c_str();
        info->problem = x.problem.c_str();
        info->status = x.status.c_str();
        info->seed = x.seed;
        info->success = x.success ? 1 : 0;
        info->iterations = x.iterations;
        info->wall_time = x.wall_time;
        info->f = x.f;
        info->grad_norm = x.grad_norm;
        info->n_f = x.n_f;
        info->n_g = x.n_g;
        info->n_H = x.n_H;
        info->n_hvp = x.n_hvp;
    });
}

hsodm_status hsodm_runs_report_json(hsodm_runs* r, const char** json) {
    return guard([&] {
        need(r && json, "hsodm_runs_report_json: NULL argument");
        r->json = report_json(r->runs, {});
        *json = r->json.c_str();
    });
}

hsodm_status hsodm_runs_emit_report(const hsodm_runs* r, const char* dir, const char* metrics) {
    return guard([&] {
        need(r && dir, "hsodm_runs_emit_report: NULL argument");
        std::vector<ProfileTable> profiles;
        for (const std::string& m : split_list(metrics ? metrics : "iterations"))
            profiles.push_back(performance_profile(r->runs, parse_metric(m)));
        emit_report(r->runs, profiles, dir);
    });
}

hsodm_status hsodm_runs_emit_profile(const hsodm_runs* r, const char* metric, const char* dir) {
    return guard([&] {
        need(r && metric && dir, "hsodm_runs_emit_profile: NULL argument");
        emit_profiles({performance_profile(r->runs, parse_metric(metric))}, dir);
    });
}

void hsodm_runs_free(hsodm_runs* r) { delete r; }

} // extern "C"
