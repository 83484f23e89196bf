#include "hsodm/bench.hpp"

#include "hsodm/baselines.hpp"
#include "hsodm/options.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

namespace hsodm {

namespace fs = std::filesystem;

void RunSpec::validate() const {
    if (solvers.empty()) throw ConfigError("run spec: no solvers");
    if (problems.empty()) throw ConfigError("run spec: no problems");
    if (seeds.empty()) throw ConfigError("run spec: no seeds");
    if (max_iters <= 0) throw ConfigError("run spec: the iteration cap must be positive");
    if (!(gtol > 0.0)) throw ConfigError("run spec: gtol must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("run spec: epsilon must be positive");
    if (jobs < 1) throw ConfigError("run spec: jobs must be at least 1");
    for (const SolverSpec& s : solvers)
        if (std::find_if(std::begin(kSolverIds), std::end(kSolverIds), [&](const char* id) { return s.id == id; }) ==
            std::end(kSolverIds))
            throw ConfigError("unknown solver '" + s.id + "'");
}

SolveResult run_solver(const SolverSpec& solver, const ObjectiveProblem& problem, const RunSpec& spec,
                       std::uint64_t seed) {
    const Vector& x1 = problem.standard_start;
    if (solver.id == "hsodm" || solver.id == "hsodm-hvp") {
        SolverConfig c;
        c.epsilon = spec.epsilon;
        c.gtol = spec.gtol;
        c.max_outer_iters = spec.max_iters;
        c.seed = seed;
        c.record_trace = false;
        if (solver.id == "hsodm-hvp") c.mode = SolveMode::Inexact;
        for (const auto& [k, v] : solver.overrides) set_option(c, k, v);
        SolveResult r = hsodm_solve(problem, x1, c);
        r.solver = solver.id;
        return r;
    }
    if (solver.id == "newton-tr") {
        TrustRegionConfig c;
        c.gtol = spec.gtol;
        c.max_iters = spec.max_iters;
        c.record_trace = false;
        for (const auto& [k, v] : solver.overrides) set_option(c, k, v);
        return newton_tr_solve(problem, x1, c);
    }
    if (solver.id == "cubic") {
        CubicRegConfig c;
        c.gtol = spec.gtol;
        c.max_iters = spec.max_iters;
        c.record_trace = false;
        for (const auto& [k, v] : solver.overrides) set_option(c, k, v);
        return cubic_reg_solve(problem, x1, c);
    }
    throw ConfigError("unknown solver '" + solver.id + "'");
}

namespace {

RunResult run_cell(const SolverSpec& solver, const std::string& problem_id, std::uint64_t seed, const RunSpec& spec) {
    RunResult out;
    out.solver = solver.id;
    out.problem = problem_id;
    out.seed = seed;
    try {
        const ObjectiveProblem problem = parse_problem_id(problem_id);
        const SolveResult r = run_solver(solver, problem, spec, seed);
        out.status = std::string(to_string(r.status));
        out.success = r.success(spec.gtol);
        out.raw_iterations = r.iterations + r.local_iterations;
        out.raw_time = r.wall_time;
        out.n_f = r.evals.n_f;
        out.n_g = r.evals.n_g;
        out.n_H = r.evals.n_H;
        out.n_hvp = r.evals.n_hvp;
        out.f = r.f;
        out.grad_norm = r.grad_norm;
    } catch (const std::exception& e) {
        out.status = std::string("error: ") + e.what();
        out.success = false;
        out.f = out.grad_norm = std::numeric_limits<double>::quiet_NaN();
    }
    // Failure convention: both the iteration count and the time become the cap.
    out.iterations = out.success ? out.raw_iterations : spec.max_iters;
    out.wall_time = out.success ? out.raw_time : static_cast<double>(spec.max_iters);
    return out;
}

} // namespace

std::vector<RunResult> run_benchmark(const RunSpec& spec) {
    spec.validate();
    for (const std::string& id : spec.problems) (void)parse_problem_id(id); // resolve ids up front

    struct Cell {
        const SolverSpec* solver;
        const std::string* problem;
        std::uint64_t seed;
    };
    std::vector<Cell> cells;
    for (const SolverSpec& s : spec.solvers)
        for (const std::string& p : spec.problems)
            for (std::uint64_t seed : spec.seeds) cells.push_back({&s, &p, seed});

    std::vector<RunResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++)
            results[i] = run_cell(*cells[i].solver, *cells[i].problem, cells[i].seed, spec);
    };
    const std::size_t jobs = std::min<std::size_t>(static_cast<std::size_t>(spec.jobs), cells.size());
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (std::thread& t : pool) t.join();
    }
    return results;
}

double scaled_geometric_mean(const std::vector<double>& values, double shift) {
    if (values.empty()) throw DomainError("scaled_geometric_mean: no values");
    if (!(shift > 0.0)) throw DomainError("scaled_geometric_mean: shift must be positive");
    // Sorting makes the floating-point sum independent of input order.
    std::vector<double> logs;
    logs.reserve(values.size());
    for (double v : values) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("scaled_geometric_mean: values must be finite and >= 0");
        logs.push_back(std::log(v + shift));
    }
    std::sort(logs.begin(), logs.end());
    double s = 0.0;
    for (double l : logs) s += l;
    return std::exp(s / static_cast<double>(logs.size())) - shift;
}

std::string_view to_string(ProfileMetric m) {
    switch (m) {
    case ProfileMetric::Iterations: return "iterations";
    case ProfileMetric::Time: return "time";
    case ProfileMetric::GradientEvals: return "gradient_evals";
    }
    return "?";
}

ProfileMetric parse_metric(std::string_view name) {
    if (name == "iterations") return ProfileMetric::Iterations;
    if (name == "time") return ProfileMetric::Time;
    if (name == "gradient_evals") return ProfileMetric::GradientEvals;
    throw ConfigError("unknown metric '" + std::string(name) + "' (iterations | time | gradient_evals)");
}

double profile_metric(const RunResult& r, ProfileMetric metric) {
    switch (metric) {
    case ProfileMetric::Iterations: return std::max(1.0, static_cast<double>(r.iterations));
    case ProfileMetric::Time: return std::max(1e-6, r.wall_time);
    case ProfileMetric::GradientEvals: return std::max(1.0, static_cast<double>(r.n_g));
    }
    return 0.0;
}

namespace {

using Instance = std::pair<std::string, std::uint64_t>;

} // namespace

ProfileTable performance_profile(const std::vector<RunResult>& results, ProfileMetric metric, double step) {
    if (!(step > 0.0)) throw ConfigError("performance_profile: step must be positive");
    ProfileTable t;
    t.metric = metric;
    std::set<std::string> solver_set;
    std::set<Instance> instance_set;
    for (const RunResult& r : results) {
        solver_set.insert(r.solver);
        instance_set.insert({r.problem, r.seed});
    }
    t.solvers.assign(solver_set.begin(), solver_set.end());
    t.problems = static_cast<int>(instance_set.size());

    std::map<Instance, double> best;
    for (const RunResult& r : results) {
        if (!r.success) continue;
        const Instance key{r.problem, r.seed};
        const double m = profile_metric(r, metric);
        auto it = best.find(key);
        if (it == best.end() || m < it->second) best[key] = m;
    }
    // log2 ratio of every successful run against its instance's best.
    std::vector<std::vector<double>> ratios(t.solvers.size());
    double max_log = 0.0;
    for (const RunResult& r : results) {
        if (!r.success) continue;
        const std::size_t s = static_cast<std::size_t>(
            std::lower_bound(t.solvers.begin(), t.solvers.end(), r.solver) - t.solvers.begin());
        const double lr = std::log2(profile_metric(r, metric) / best.at({r.problem, r.seed}));
        ratios[s].push_back(lr);
        max_log = std::max(max_log, lr);
    }
    const int points = static_cast<int>(std::ceil(max_log / step)) + 2;
    for (int i = 0; i < points; ++i) t.alphas.push_back(step * i);

    const double denom = std::max(1, t.problems);
    t.curves.assign(t.solvers.size(), std::vector<double>(t.alphas.size(), 0.0));
    t.success_fraction.assign(t.solvers.size(), 0.0);
    for (std::size_t s = 0; s < t.solvers.size(); ++s) {
        std::vector<double> lr = ratios[s];
        std::sort(lr.begin(), lr.end());
        t.success_fraction[s] = static_cast<double>(lr.size()) / denom;
        std::size_t k = 0;
        for (std::size_t a = 0; a < t.alphas.size(); ++a) {
            while (k < lr.size() && lr[k] <= t.alphas[a]) ++k;
            t.curves[s][a] = static_cast<double>(k) / denom;
        }
    }
    return t;
}

std::vector<SgmRow> sgm_table(const std::vector<RunResult>& results) {
    std::map<std::string, std::vector<const RunResult*>> by_solver;
    for (const RunResult& r : results) by_solver[r.solver].push_back(&r);
    std::vector<SgmRow> rows;
    for (const auto& [solver, runs] : by_solver) {
        SgmRow row;
        row.solver = solver;
        row.runs = static_cast<int>(runs.size());
        std::vector<double> time, iters, nf, ng, nh;
        for (const RunResult* r : runs) {
            row.successes += r->success ? 1 : 0;
            time.push_back(r->wall_time);
            iters.push_back(r->iterations);
            nf.push_back(static_cast<double>(r->n_f));
            ng.push_back(static_cast<double>(r->n_g));
            nh.push_back(static_cast<double>(r->n_H + r->n_hvp));
        }
        row.time = scaled_geometric_mean(time, 1.0);
        row.iterations = scaled_geometric_mean(iters, 50.0);
        row.n_f = scaled_geometric_mean(nf, 50.0);
        row.n_g = scaled_geometric_mean(ng, 50.0);
        row.n_H = scaled_geometric_mean(nh, 50.0);
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

nlohmann::json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

} // namespace

std::string runs_csv_header() {
    return "solver,problem,seed,status,success,iterations,wall_time,n_f,n_g,n_H,n_hvp,f,grad_norm,raw_iterations,"
           "raw_time";
}

std::string runs_to_csv(const std::vector<RunResult>& results) {
    std::ostringstream os;
    os << runs_csv_header() << '\n';
    for (const RunResult& r : results) {
        os << r.solver << ',' << r.problem << ',' << r.seed << ',' << sanitize(r.status) << ','
           << (r.success ? 1 : 0) << ',' << r.iterations << ',' << fmt(r.wall_time) << ',' << r.n_f << ','
           << r.n_g << ',' << r.n_H << ',' << r.n_hvp << ',' << fmt(r.f) << ',' << fmt(r.grad_norm) << ','
           << r.raw_iterations << ',' << fmt(r.raw_time) << '\n';
    }
    return os.str();
}

std::vector<RunResult> parse_runs_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line != runs_csv_header())
        throw IOError("runs CSV: unexpected header");
    std::vector<RunResult> out;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::vector<std::string> c = split(line, ',');
        if (c.size() != 15) throw IOError("runs CSV line " + std::to_string(lineno) + ": expected 15 fields");
        try {
            RunResult r;
            r.solver = c[0];
            r.problem = c[1];
            r.seed = static_cast<std::uint64_t>(std::stoull(c[2]));
            r.status = c[3];
            r.success = parse_bool(c[4], "success");
            r.iterations = static_cast<int>(parse_integer(c[5], "iterations"));
            r.wall_time = std::stod(c[6]);
            r.n_f = parse_integer(c[7], "n_f");
            r.n_g = parse_integer(c[8], "n_g");
            r.n_H = parse_integer(c[9], "n_H");
            r.n_hvp = parse_integer(c[10], "n_hvp");
            r.f = std::stod(c[11]);
            r.grad_norm = std::stod(c[12]);
            r.raw_iterations = static_cast<int>(parse_integer(c[13], "raw_iterations"));
            r.raw_time = std::stod(c[14]);
            out.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw IOError("runs CSV line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<RunResult> read_runs_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_runs_csv(ss.str());
}

std::string profile_csv(const ProfileTable& table, std::size_t solver) {
    std::ostringstream os;
    os << "alpha,fraction\n";
    for (std::size_t a = 0; a < table.alphas.size(); ++a)
        os << fmt(table.alphas[a]) << ',' << fmt(table.curves.at(solver)[a]) << '\n';
    return os.str();
}

namespace {

nlohmann::json profile_json(const ProfileTable& t) {
    nlohmann::json curves = nlohmann::json::object();
    for (std::size_t s = 0; s < t.solvers.size(); ++s)
        curves[t.solvers[s]] = {{"fraction", t.curves[s]}, {"success_fraction", t.success_fraction[s]}};
    return {{"metric", std::string(to_string(t.metric))},
            {"problems", t.problems},
            {"alphas", t.alphas},
            {"solvers", std::move(curves)}};
}

} // namespace

std::string report_json(const std::vector<RunResult>& results, const std::vector<ProfileTable>& profiles) {
    nlohmann::json runs = nlohmann::json::array();
    for (const RunResult& r : results)
        runs.push_back({{"solver", r.solver},
                        {"problem", r.problem},
                        {"seed", r.seed},
                        {"status", r.status},
                        {"success", r.success},
                        {"iterations", r.iterations},
                        {"wall_time", num(r.wall_time)},
                        {"n_f", r.n_f},
                        {"n_g", r.n_g},
                        {"n_H", r.n_H},
                        {"n_hvp", r.n_hvp},
                        {"f", num(r.f)},
                        {"grad_norm", num(r.grad_norm)},
                        {"raw_iterations", r.raw_iterations},
                        {"raw_time", num(r.raw_time)}});
    nlohmann::json sgm = nlohmann::json::array();
    if (!results.empty())
        for (const SgmRow& row : sgm_table(results))
            sgm.push_back({{"solver", row.solver},
                           {"runs", row.runs},
                           {"successes", row.successes},
                           {"time", row.time},
                           {"iterations", row.iterations},
                           {"n_f", row.n_f},
                           {"n_g", row.n_g},
                           {"n_H", row.n_H}});
    nlohmann::json prof = nlohmann::json::array();
    for (const ProfileTable& t : profiles) prof.push_back(profile_json(t));
    nlohmann::json j = {{"runs", std::move(runs)}, {"sgm_table", std::move(sgm)}, {"profiles", std::move(prof)}};
    return j.dump(2);
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const fs::path target(path);
    static std::atomic<unsigned> counter{0};
    fs::path tmp = target;
    tmp += ".tmp." + std::to_string(std::random_device{}()) + "." + std::to_string(counter++);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IOError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw IOError("write failed for '" + tmp.string() + "'");
        }
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IOError("cannot rename into '" + path + "'");
    }
}

namespace {

fs::path prepare_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw IOError("cannot create output directory '" + dir + "'");
    return fs::path(dir);
}

} // namespace

void emit_profiles(const std::vector<ProfileTable>& profiles, const std::string& dir) {
    const fs::path base = prepare_dir(dir);
    for (const ProfileTable& t : profiles) {
        for (std::size_t s = 0; s < t.solvers.size(); ++s)
            write_file_atomic((base / ("profile_" + std::string(to_string(t.metric)) + "_" + t.solvers[s] + ".csv"))
                                  .string(),
                              profile_csv(t, s));
        write_file_atomic((base / ("profile_" + std::string(to_string(t.metric)) + ".json")).string(),
                          profile_json(t).dump(2));
    }
}

void emit_report(const std::vector<RunResult>& results, const std::vector<ProfileTable>& profiles,
                 const std::string& dir) {
    const fs::path base = prepare_dir(dir);
    write_file_atomic((base / "runs.csv").string(), runs_to_csv(results));
    write_file_atomic((base / "report.json").string(), report_json(results, profiles));
    emit_profiles(profiles, dir);
}

} // namespace hsodm
