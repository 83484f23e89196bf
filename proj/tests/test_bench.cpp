#include "doctest.h"

#include "hsodm/bench.hpp"
#include "hsodm/options.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <unistd.h>

using namespace hsodm;

namespace {

RunResult fake(const std::string& solver, const std::string& problem, bool success, int iters, double time = 1.0,
               std::int64_t ng = 10) {
    RunResult r;
    r.solver = solver;
    r.problem = problem;
    r.success = success;
    r.iterations = r.raw_iterations = iters;
    r.wall_time = r.raw_time = time;
    r.n_g = ng;
    r.status = success ? "gradient_converged" : "max_iters";
    return r;
}

// O(S^2 P) recomputation straight from the definition.
double brute_force_fraction(const std::vector<RunResult>& rs, const std::string& solver, double alpha,
                            ProfileMetric metric, int instances) {
    int count = 0;
    for (const RunResult& a : rs) {
        if (a.solver != solver || !a.success) continue;
        double best = std::numeric_limits<double>::infinity();
        for (const RunResult& b : rs)
            if (b.problem == a.problem && b.seed == a.seed && b.success)
                best = std::min(best, profile_metric(b, metric));
        if (std::log2(profile_metric(a, metric) / best) <= alpha) ++count;
    }
    return static_cast<double>(count) / instances;
}

const std::vector<std::string> kSuite8 = {"rosenbrock:2", "rosenbrock:100", "quadratic:50", "saddle:10",
                                          "powell:8",     "wood:4",         "quartic:10",   "convex_quartic:10"};

RunSpec full_matrix() {
    RunSpec s;
    for (const char* id : kSolverIds) s.solvers.push_back({id, {}});
    s.problems = kSuite8;
    return s;
}

} // namespace

TEST_CASE("scaled geometric mean") {
    CHECK(scaled_geometric_mean({7.0, 7.0, 7.0}, 50.0) == doctest::Approx(7.0).epsilon(1e-14));
    CHECK(scaled_geometric_mean({0.0, 0.0}, 50.0) == doctest::Approx(0.0).epsilon(1e-14));
    // exp((ln 60 + ln 1050) / 2) - 50 = sqrt(63000) - 50.
    CHECK(scaled_geometric_mean({10.0, 1000.0}, 50.0) == doctest::Approx(std::sqrt(63000.0) - 50.0).epsilon(1e-14));
    CHECK(scaled_geometric_mean({10.0, 1000.0}, 50.0) == doctest::Approx(201.0).epsilon(1e-3));
    // Shift to zero approaches the plain geometric mean.
    const std::vector<double> v = {0.5, 3.0, 17.0, 2.25};
    const double gm = std::pow(0.5 * 3.0 * 17.0 * 2.25, 0.25);
    double prev = std::abs(scaled_geometric_mean(v, 1.0) - gm);
    for (double shift : {1e-2, 1e-4, 1e-6, 1e-8}) {
        const double err = std::abs(scaled_geometric_mean(v, shift) - gm);
        CHECK(err <= prev);
        prev = err;
    }
    CHECK(prev <= 1e-7);
    CHECK_THROWS_AS(scaled_geometric_mean({1.0, -1.0}, 50.0), DomainError);
    CHECK_THROWS_AS(scaled_geometric_mean({}, 50.0), DomainError);
    CHECK_THROWS_AS(scaled_geometric_mean({1.0}, 0.0), DomainError);
}

TEST_CASE("performance profile examples") {
    SUBCASE("single solver with all successes is 1 at alpha = 0") {
        const std::vector<RunResult> rs = {fake("a", "p1", true, 5), fake("a", "p2", true, 9)};
        const ProfileTable t = performance_profile(rs, ProfileMetric::Iterations);
        REQUIRE(t.solvers.size() == 1);
        for (double f : t.curves[0]) CHECK(f == 1.0);
    }
    SUBCASE("metrics 10 and 20 on one problem: B enters at alpha = 1") {
        const std::vector<RunResult> rs = {fake("A", "p", true, 10), fake("B", "p", true, 20)};
        const ProfileTable t = performance_profile(rs, ProfileMetric::Iterations, 0.25);
        for (std::size_t a = 0; a < t.alphas.size(); ++a) {
            CHECK(t.curves[0][a] == 1.0);
            CHECK(t.curves[1][a] == (t.alphas[a] >= 1.0 ? 1.0 : 0.0));
        }
    }
    SUBCASE("unsolved instances stay in the denominator") {
        const std::vector<RunResult> rs = {fake("A", "p", true, 10), fake("B", "p", false, 20000),
                                           fake("A", "q", false, 20000), fake("B", "q", false, 20000)};
        const ProfileTable t = performance_profile(rs, ProfileMetric::Iterations);
        CHECK(t.problems == 2);
        CHECK(t.curves[0].back() == 0.5);
        CHECK(t.curves[1].back() == 0.0);
        CHECK(t.success_fraction[0] == 0.5);
    }
    CHECK_THROWS_AS(parse_metric("bogus"), ConfigError);
    CHECK(parse_metric("gradient_evals") == ProfileMetric::GradientEvals);
}

TEST_CASE("profile properties on random result sets") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> it(0, 500);
    std::bernoulli_distribution ok(0.7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<RunResult> rs;
        for (const char* s : {"s1", "s2", "s3"})
            for (int p = 0; p < 7; ++p) rs.push_back(fake(s, "p" + std::to_string(p), ok(rng), it(rng), 1.0, it(rng)));
        for (ProfileMetric m : {ProfileMetric::Iterations, ProfileMetric::GradientEvals}) {
            const ProfileTable t = performance_profile(rs, m, 0.1);
            for (std::size_t s = 0; s < t.solvers.size(); ++s) {
                for (std::size_t a = 0; a < t.alphas.size(); ++a) {
                    CHECK(t.curves[s][a] >= 0.0);
                    CHECK(t.curves[s][a] <= 1.0);
                    if (a > 0) CHECK(t.curves[s][a] >= t.curves[s][a - 1]);
                    CHECK(t.curves[s][a] == brute_force_fraction(rs, t.solvers[s], t.alphas[a], m, t.problems));
                }
                CHECK(t.curves[s].back() == t.success_fraction[s]);
            }
            // Order independence.
            std::vector<RunResult> shuffled = rs;
            std::shuffle(shuffled.begin(), shuffled.end(), rng);
            const ProfileTable u = performance_profile(shuffled, m, 0.1);
            CHECK(u.alphas == t.alphas);
            CHECK(u.curves == t.curves);
            std::vector<SgmRow> x = sgm_table(rs), y = sgm_table(shuffled);
            REQUIRE(x.size() == y.size());
            for (std::size_t i = 0; i < x.size(); ++i) {
                CHECK(x[i].iterations == y[i].iterations);
                CHECK(x[i].time == y[i].time);
                CHECK(x[i].n_g == y[i].n_g);
            }
        }
    }
}

TEST_CASE("run_benchmark cells") {
    SUBCASE("one solver on a trivial quadratic succeeds") {
        RunSpec s;
        s.solvers = {{"hsodm", {}}};
        s.problems = {"quadratic:5"};
        const std::vector<RunResult> r = run_benchmark(s);
        REQUIRE(r.size() == 1);
        CHECK(r[0].success);
        CHECK(r[0].grad_norm <= 1e-5);
    }
    SUBCASE("failing cell records the cap") {
        RunSpec s;
        s.solvers = {{"hsodm", {}}};
        s.problems = {"rosenbrock:2"};
        s.max_iters = 1;
        const std::vector<RunResult> r = run_benchmark(s);
        REQUIRE(r.size() == 1);
        CHECK(!r[0].success);
        CHECK(r[0].raw_iterations == 1);
        CHECK(r[0].iterations == 1);
        CHECK(r[0].wall_time == 1.0);
    }
    SUBCASE("a throwing cell becomes a failure") {
        RunSpec s;
        s.solvers = {{"hsodm", {{"nu", "0.9"}}}, {"newton-tr", {}}};
        s.problems = {"quadratic:5"};
        s.max_iters = 100;
        const std::vector<RunResult> r = run_benchmark(s);
        REQUIRE(r.size() == 2);
        CHECK(!r[0].success);
        CHECK(r[0].status.rfind("error:", 0) == 0);
        CHECK(r[0].iterations == 100);
        CHECK(r[1].success);
    }
    SUBCASE("spec validation") {
        RunSpec s;
        CHECK_THROWS_AS(run_benchmark(s), ConfigError);
        s.solvers = {{"lbfgs", {}}};
        s.problems = {"quadratic:5"};
        CHECK_THROWS_AS(run_benchmark(s), ConfigError);
        s.solvers = {{"cubic", {}}};
        s.problems = {"nonexistent:4"};
        CHECK_THROWS_AS(run_benchmark(s), ConfigError);
    }
}

TEST_CASE("full matrix: concurrency, determinism and CSV round trip") {
    RunSpec s = full_matrix();
    s.jobs = 1;
    const std::vector<RunResult> serial = run_benchmark(s);
    s.jobs = 4;
    const std::vector<RunResult> parallel = run_benchmark(s);
    REQUIRE(serial.size() == 32);
    REQUIRE(parallel.size() == 32);
    for (std::size_t i = 0; i < serial.size(); ++i) {
        CHECK(serial[i].solver == parallel[i].solver);
        CHECK(serial[i].problem == parallel[i].problem);
        CHECK(serial[i].success == parallel[i].success);
        CHECK(serial[i].raw_iterations == parallel[i].raw_iterations);
        CHECK(serial[i].f == parallel[i].f);
        CHECK(serial[i].n_g == parallel[i].n_g);
    }

    const std::string csv = runs_to_csv(parallel);
    const std::vector<RunResult> back = parse_runs_csv(csv);
    REQUIRE(back.size() == parallel.size());
    const std::vector<SgmRow> a = sgm_table(parallel), b = sgm_table(back);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(std::abs(a[i].time - b[i].time) <= 1e-12 * std::max(1.0, a[i].time));
        CHECK(std::abs(a[i].iterations - b[i].iterations) <= 1e-12 * std::max(1.0, a[i].iterations));
        CHECK(a[i].n_H == b[i].n_H);
    }
    CHECK(runs_to_csv(back) == csv);
}

TEST_CASE("report emission") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("hsodm_bench_test_" + std::to_string(::getpid()));
    fs::remove_all(dir);

    SUBCASE("empty results give a header-only CSV") {
        emit_report({}, {}, dir.string());
        std::ifstream in(dir / "runs.csv");
        std::stringstream ss;
        ss << in.rdbuf();
        CHECK(ss.str() == runs_csv_header() + "\n");
        CHECK(read_runs_csv((dir / "runs.csv").string()).empty());
        const nlohmann::json j = nlohmann::json::parse(std::ifstream(dir / "report.json"));
        CHECK(j["runs"].empty());
    }
    SUBCASE("report contents") {
        const std::vector<RunResult> rs = {fake("A", "p", true, 10), fake("B", "p", true, 20)};
        const ProfileTable t = performance_profile(rs, ProfileMetric::Iterations, 0.5);
        emit_report(rs, {t}, dir.string());
        const nlohmann::json j = nlohmann::json::parse(std::ifstream(dir / "report.json"));
        CHECK(j["runs"].size() == 2);
        CHECK(j["sgm_table"].size() == 2);
        CHECK(j["profiles"][0]["metric"] == "iterations");
        CHECK(fs::exists(dir / "profile_iterations_A.csv"));
        CHECK(fs::exists(dir / "profile_iterations_B.csv"));
        for (const auto& e : fs::directory_iterator(dir))
            CHECK(e.path().filename().string().find(".tmp.") == std::string::npos);
    }
    SUBCASE("unwritable destination") {
        std::ofstream(dir.string() + "_file") << "x";
        CHECK_THROWS_AS(emit_report({}, {}, dir.string() + "_file/sub"), IOError);
        fs::remove(dir.string() + "_file");
    }
    CHECK_THROWS_AS(read_runs_csv((dir / "missing.csv").string()), IOError);
    CHECK_THROWS_AS(parse_runs_csv("not,a,header\n"), IOError);
    fs::remove_all(dir);
}

TEST_CASE("string options") {
    SolverConfig c;
    set_option(c, "nu", "0.2");
    set_option(c, "stepsize", "fixed_radius");
    set_option(c, "mode", "inexact");
    set_option(c, "max_ls_trials", "7");
    set_option(c, "record_trace", "false");
    set_option(c, "seed", "42");
    CHECK(*c.nu == 0.2);
    CHECK(c.stepsize == StepsizeRule::FixedRadius);
    CHECK(c.mode == SolveMode::Inexact);
    CHECK(*c.max_ls_trials == 7);
    CHECK(!c.record_trace);
    CHECK(c.seed == 42);
    CHECK_THROWS_AS(set_option(c, "nu", "0.2x"), ConfigError);
    CHECK_THROWS_AS(set_option(c, "nope", "1"), ConfigError);
    CHECK_THROWS_AS(set_option(c, "max_outer_iters", "99999999999"), ConfigError);
    TrustRegionConfig t;
    set_option(t, "initial_radius", "0.5");
    CHECK(t.initial_radius == 0.5);
    CubicRegConfig q;
    set_option(q, "initial_sigma", "2");
    CHECK(q.initial_sigma == 2.0);
    CHECK(option_keys(c).size() > 20);
}
