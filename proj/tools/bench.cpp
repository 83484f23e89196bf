// Benchmark driver. Talks to the solver library only through hsodm.h.
#include "hsodm/hsodm.h"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace {

// Exit codes: 0 success, 1 solver or internal failure, 2 bad configuration, 3 I/O.
int exit_code(hsodm_status s) {
    switch (s) {
    case HSODM_OK: return 0;
    case HSODM_ERR_CONFIG:
    case HSODM_ERR_ARGUMENT:
    case HSODM_ERR_CAPABILITY: return 2;
    case HSODM_ERR_IO: return 3;
    default: return 1;
    }
}

struct ApiError : std::runtime_error {
    hsodm_status status;
    ApiError(hsodm_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(hsodm_status s, const std::string& context) {
    if (s != HSODM_OK)
        throw ApiError(s, context + ": " + hsodm_last_error() + " [" + hsodm_status_name(s) + "]");
}

template <class T, void (*Free)(T*)>
struct Deleter {
    void operator()(T* p) const { Free(p); }
};
using BenchPtr = std::unique_ptr<hsodm_bench, Deleter<hsodm_bench, hsodm_bench_free>>;
using RunsPtr = std::unique_ptr<hsodm_runs, Deleter<hsodm_runs, hsodm_runs_free>>;
using ProblemPtr = std::unique_ptr<hsodm_problem, Deleter<hsodm_problem, hsodm_problem_free>>;
using ConfigPtr = std::unique_ptr<hsodm_config, Deleter<hsodm_config, hsodm_config_free>>;
using ResultPtr = std::unique_ptr<hsodm_result, Deleter<hsodm_result, hsodm_result_free>>;

void configure_logging() {
    auto logger = spdlog::stderr_color_mt("bench");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
    spdlog::set_level(spdlog::level::info);
    if (const char* env = std::getenv("HSODM_LOG_LEVEL")) {
        auto level = spdlog::level::from_str(env);
        // from_str maps unknown names to "off"; only accept the literal.
        if (level == spdlog::level::off && std::string(env) != "off")
            spdlog::warn("ignoring unknown HSODM_LOG_LEVEL '{}'", env);
        else
            spdlog::set_level(level);
    }
}

// "solver.key=value" -> (solver, key, value)
struct Override {
    std::string solver, key, value;
};

Override parse_override(const std::string& text) {
    auto dot = text.find('.');
    auto eq = text.find('=');
    if (dot == std::string::npos || eq == std::string::npos || dot > eq || dot == 0 || eq == dot + 1)
        throw ApiError(HSODM_ERR_CONFIG, "--set expects solver.key=value, got '" + text + "'");
    return {text.substr(0, dot), text.substr(dot + 1, eq - dot - 1), text.substr(eq + 1)};
}

std::pair<std::string, std::string> parse_key_value(const std::string& text) {
    auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ApiError(HSODM_ERR_CONFIG, "--set expects key=value, got '" + text + "'");
    return {text.substr(0, eq), text.substr(eq + 1)};
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct RunArgs {
    std::vector<std::string> solvers{"hsodm", "hsodm-hvp", "newton-tr", "cubic"};
    std::vector<std::string> problems;
    double eps = 1e-6;
    int max_iter = 20000;
    double gtol = 1e-5;
    std::vector<unsigned long long> seeds{0};
    int jobs = 1;
    std::string out = "results";
    std::vector<std::string> sets;
    std::vector<std::string> metrics{"iterations", "time", "gradient_evals"};
};

int cmd_run(const RunArgs& a) {
    BenchPtr bench;
    {
        hsodm_bench* raw = nullptr;
        check(hsodm_bench_new(&raw), "bench");
        bench.reset(raw);
    }
    for (const auto& s : a.solvers) check(hsodm_bench_add_solver(bench.get(), s.c_str()), "solver " + s);
    for (const auto& text : a.sets) {
        auto o = parse_override(text);
        check(hsodm_bench_solver_option(bench.get(), o.solver.c_str(), o.key.c_str(), o.value.c_str()),
              "--set " + text);
    }
    for (const auto& p : a.problems) check(hsodm_bench_add_problem(bench.get(), p.c_str()), "problem " + p);

    std::string seeds;
    for (auto s : a.seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
    check(hsodm_bench_set(bench.get(), "epsilon", num(a.eps).c_str()), "--eps");
    check(hsodm_bench_set(bench.get(), "gtol", num(a.gtol).c_str()), "--gtol");
    check(hsodm_bench_set(bench.get(), "max_iters", std::to_string(a.max_iter).c_str()), "--max-iter");
    check(hsodm_bench_set(bench.get(), "jobs", std::to_string(a.jobs).c_str()), "--jobs");
    check(hsodm_bench_set(bench.get(), "seeds", seeds.c_str()), "--seed");

    spdlog::info("running {} solver(s) x {} problem(s) x {} seed(s) on {} job(s)", a.solvers.size(),
                 a.problems.size(), a.seeds.size(), a.jobs);
    RunsPtr runs;
    {
        hsodm_runs* raw = nullptr;
        check(hsodm_bench_run(bench.get(), &raw), "run");
        runs.reset(raw);
    }

    size_t count = 0;
    check(hsodm_runs_count(runs.get(), &count), "runs");
    std::map<std::string, int> solved;
    for (size_t i = 0; i < count; ++i) {
        hsodm_run_info info{};
        check(hsodm_runs_get(runs.get(), i, &info), "runs");
        solved[info.solver] += info.success;
        auto level = info.success ? spdlog::level::debug : spdlog::level::warn;
        spdlog::log(level, "{:<10} {:<18} seed={} {:<22} k={} t={:.3g}s |g|={:.3g}", info.solver, info.problem,
                    info.seed, info.status, info.iterations, info.wall_time, info.grad_norm);
    }
    const size_t cells_per_solver = a.problems.size() * a.seeds.size();
    for (const auto& s : a.solvers)
        spdlog::info("{:<10} solved {}/{}", s, solved[s], cells_per_solver);

    std::string metrics;
    for (const auto& m : a.metrics) metrics += (metrics.empty() ? "" : ",") + m;
    check(hsodm_runs_emit_report(runs.get(), a.out.c_str(), metrics.c_str()), "report");
    spdlog::info("wrote {}/runs.csv and {}/report.json", a.out, a.out);
    return 0;
}

int cmd_profile(const std::string& in, const std::vector<std::string>& metrics, const std::string& out) {
    RunsPtr runs;
    {
        hsodm_runs* raw = nullptr;
        check(hsodm_runs_read_csv(in.c_str(), &raw), "read " + in);
        runs.reset(raw);
    }
    for (const auto& m : metrics) {
        check(hsodm_runs_emit_profile(runs.get(), m.c_str(), out.c_str()), "profile " + m);
        spdlog::info("wrote {}/profile_{}.json", out, m);
    }
    return 0;
}

struct SolveArgs {
    std::string problem;
    std::string solver = "hsodm";
    std::vector<std::string> sets;
    std::vector<double> x0;
    std::string json_out;
    std::string trace_out;
    bool with_trace = false;
};

void write_text(const std::string& path, const char* text) {
    std::ofstream f(path, std::ios::binary);
    if (!f || !(f << text)) throw ApiError(HSODM_ERR_IO, "cannot write " + path);
}

int cmd_solve(const SolveArgs& a) {
    ProblemPtr problem;
    ConfigPtr config;
    ResultPtr result;
    {
        hsodm_problem* raw = nullptr;
        check(hsodm_problem_from_id(a.problem.c_str(), &raw), "problem " + a.problem);
        problem.reset(raw);
    }
    {
        hsodm_config* raw = nullptr;
        check(hsodm_config_new(a.solver.c_str(), &raw), "solver " + a.solver);
        config.reset(raw);
    }
    for (const auto& text : a.sets) {
        auto [key, value] = parse_key_value(text);
        check(hsodm_config_set(config.get(), key.c_str(), value.c_str()), "--set " + text);
    }
    {
        hsodm_result* raw = nullptr;
        const double* x0 = a.x0.empty() ? nullptr : a.x0.data();
        check(hsodm_solve(problem.get(), config.get(), x0, a.x0.size(), &raw), "solve");
        result.reset(raw);
    }

    hsodm_solver_status status{};
    double f = 0, g = 0, seconds = 0;
    int outer = 0, local = 0, certified = 0;
    double lambda_min = NAN;
    check(hsodm_result_status(result.get(), &status), "result");
    check(hsodm_result_f(result.get(), &f), "result");
    check(hsodm_result_grad_norm(result.get(), &g), "result");
    check(hsodm_result_iterations(result.get(), &outer, &local), "result");
    check(hsodm_result_wall_time(result.get(), &seconds), "result");
    check(hsodm_result_certified(result.get(), &certified, &lambda_min), "result");

    std::printf("status      %s\n", hsodm_solver_status_name(status));
    std::printf("f           %.10e\n", f);
    std::printf("|g|         %.3e\n", g);
    std::printf("iterations  %d (+%d local)\n", outer, local);
    if (!std::isnan(lambda_min))
        std::printf("lambda_min  %.6e%s\n", lambda_min, certified ? " (certified)" : "");
    std::printf("time        %.4f s\n", seconds);

    if (!a.json_out.empty()) {
        const char* json = nullptr;
        check(hsodm_result_json(result.get(), a.with_trace ? 1 : 0, &json), "json");
        write_text(a.json_out, json);
    }
    if (!a.trace_out.empty()) {
        const char* csv = nullptr;
        check(hsodm_result_trace_csv(result.get(), &csv), "trace");
        write_text(a.trace_out, csv);
    }
    return status == HSODM_SOSP_CERTIFIED || status == HSODM_GRADIENT_CONVERGED ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();

    CLI::App app{"HSODM benchmark harness"};
    app.set_version_flag("--version", std::string(hsodm_version()));
    app.require_subcommand(1);

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "run a solver x problem matrix and write reports");
    run_cmd->add_option("--solvers", run.solvers, "solver ids")->delimiter(',')->capture_default_str();
    run_cmd->add_option("--problems", run.problems, "problem ids, name[:n]")->delimiter(',')->required();
    run_cmd->add_option("--eps", run.eps, "HSODM target accuracy epsilon")->capture_default_str();
    run_cmd->add_option("--max-iter", run.max_iter, "iteration cap per run")->capture_default_str();
    run_cmd->add_option("--gtol", run.gtol, "gradient-norm success tolerance")->capture_default_str();
    run_cmd->add_option("--seed", run.seeds, "seed or comma-separated seeds")->delimiter(',')->capture_default_str();
    run_cmd->add_option("--jobs,-j", run.jobs, "concurrent cells")->capture_default_str();
    run_cmd->add_option("--out,-o", run.out, "output directory")->capture_default_str();
    run_cmd->add_option("--set", run.sets, "per-solver option, solver.key=value (repeatable)");
    run_cmd->add_option("--metrics", run.metrics, "profile metrics")->delimiter(',')->capture_default_str();

    std::string profile_in, profile_out = "profiles";
    std::vector<std::string> profile_metrics{"iterations"};
    auto* profile_cmd = app.add_subcommand("profile", "performance profiles from an existing runs.csv");
    profile_cmd->add_option("--in,-i", profile_in, "runs.csv written by 'run'")->required();
    profile_cmd->add_option("--metric", profile_metrics, "iterations, time or gradient_evals")
        ->delimiter(',')
        ->capture_default_str();
    profile_cmd->add_option("--out,-o", profile_out, "output directory")->capture_default_str();

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "solve one problem and print the outcome");
    solve_cmd->add_option("--problem,-p", solve.problem, "problem id, name[:n]")->required();
    solve_cmd->add_option("--solver,-s", solve.solver, "solver id")->capture_default_str();
    solve_cmd->add_option("--set", solve.sets, "solver option, key=value (repeatable)");
    solve_cmd->add_option("--x0", solve.x0, "start point, comma-separated")->delimiter(',');
    solve_cmd->add_option("--json", solve.json_out, "write the result as JSON");
    solve_cmd->add_flag("--with-trace", solve.with_trace, "include the trace in --json output");
    solve_cmd->add_option("--trace", solve.trace_out, "write the trace as CSV");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run);
        if (*profile_cmd) return cmd_profile(profile_in, profile_metrics, profile_out);
        if (*solve_cmd) return cmd_solve(solve);
    } catch (const ApiError& e) {
        spdlog::error("{}", e.what());
        return exit_code(e.status);
    }
    return 0;
}
