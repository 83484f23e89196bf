#include "doctest.h"

#include "hsodm/problem.hpp"

#include <cmath>
#include <random>

using namespace hsodm;

namespace {

ObjectiveProblem identity_quadratic(Index n) {
    return make_quadratic(std::vector<double>(static_cast<std::size_t>(n), 1.0), Vector::Zero(n));
}

Vector vec(std::initializer_list<double> xs) {
    Vector v(static_cast<Index>(xs.size()));
    Index i = 0;
    for (double x : xs) v(i++) = x;
    return v;
}

} // namespace

TEST_CASE("evaluate_value on known points") {
    const ObjectiveProblem rb = make_problem("rosenbrock", 2);
    Evaluator ev(rb);
    CHECK(evaluate_value(ev, vec({1.0, 1.0})) == doctest::Approx(0.0));
    CHECK(evaluate_value(ev, vec({-1.2, 1.0})) == doctest::Approx(24.2).epsilon(1e-14));

    const ObjectiveProblem q = identity_quadratic(2);
    Evaluator eq(q);
    CHECK(evaluate_value(eq, vec({3.0, 4.0})) == doctest::Approx(12.5).epsilon(1e-14));
}

TEST_CASE("evaluate_gradient on known points") {
    const ObjectiveProblem q = identity_quadratic(2);
    Evaluator eq(q);
    const Vector g = evaluate_gradient(eq, vec({3.0, 4.0}));
    CHECK(g(0) == doctest::Approx(3.0));
    CHECK(g(1) == doctest::Approx(4.0));

    const ObjectiveProblem rb = make_problem("rosenbrock", 2);
    Evaluator ev(rb);
    CHECK(evaluate_gradient(ev, vec({1.0, 1.0})).norm() == doctest::Approx(0.0));
    const Vector g2 = evaluate_gradient(ev, vec({-1.2, 1.0}));
    CHECK(g2(0) == doctest::Approx(-215.6).epsilon(1e-13));
    CHECK(g2(1) == doctest::Approx(-88.0).epsilon(1e-13));
}

TEST_CASE("hessian_vector_product") {
    const ObjectiveProblem q = make_quadratic({1.0, 2.0, 3.0}, Vector::Ones(3));
    Evaluator eq(q);
    const Matrix a = q.hessian_fn(Vector::Zero(3));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 5; ++k) {
        Vector x(3), v(3);
        for (int i = 0; i < 3; ++i) {
            x(i) = nd(rng);
            v(i) = nd(rng);
        }
        CHECK((hessian_vector_product(eq, x, v) - a * v).norm() <= 1e-12);
    }
    CHECK(hessian_vector_product(eq, Vector::Ones(3), Vector::Zero(3)).norm() == 0.0);

    const ObjectiveProblem rb = make_problem("rosenbrock", 2);
    Evaluator ev(rb);
    const Vector hv = hessian_vector_product(ev, vec({1.0, 1.0}), vec({1.0, 0.0}));
    CHECK(hv(0) == doctest::Approx(802.0));
    CHECK(hv(1) == doctest::Approx(-400.0));
}

TEST_CASE("hessian_vector_product without any capability") {
    ObjectiveProblem p = identity_quadratic(2);
    p.hessian_fn = nullptr;
    p.hvp_fn = nullptr;
    CHECK_THROWS_AS(Evaluator{p}, ConfigError);
}

TEST_CASE("fallback hvp counts one Hessian per distinct point") {
    const ObjectiveProblem p = make_problem("powell", 4);
    REQUIRE_FALSE(p.has_hvp());
    Evaluator ev(p);
    const Vector x = p.standard_start;
    for (int k = 0; k < 5; ++k) hessian_vector_product(ev, x, Vector::Unit(4, k % 4));
    CHECK(ev.counters().n_H == 1);
    CHECK(ev.counters().n_hvp == 0);
    Vector y = x;
    y(0) = std::nextafter(y(0), 10.0);
    hessian_vector_product(ev, y, Vector::Unit(4, 0));
    CHECK(ev.counters().n_H == 2);
}

TEST_CASE("counters equal callback invocations") {
    ObjectiveProblem p = make_problem("quartic", 6);
    int nf = 0, ng = 0, nh = 0, nv = 0;
    auto f = p.value_fn;
    auto g = p.gradient_fn;
    auto h = p.hessian_fn;
    auto v = p.hvp_fn;
    p.value_fn = [&](const Vector& x) { ++nf; return f(x); };
    p.gradient_fn = [&](const Vector& x) { ++ng; return g(x); };
    p.hessian_fn = [&](const Vector& x) { ++nh; return h(x); };
    p.hvp_fn = [&](const Vector& x, const Vector& w) { ++nv; return v(x, w); };
    Evaluator ev(p);
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pick(0, 3);
    for (int k = 0; k < 200; ++k) {
        const Vector x = random_point(p, static_cast<std::uint64_t>(k % 17));
        switch (pick(rng)) {
        case 0: ev.value(x); break;
        case 1: ev.gradient(x); break;
        case 2: ev.hessian(x); break;
        default: ev.hvp(x, Vector::Ones(6)); break;
        }
    }
    CHECK(ev.counters().n_f == nf);
    CHECK(ev.counters().n_g == ng);
    CHECK(ev.counters().n_H == nh);
    CHECK(ev.counters().n_hvp == nv);
}

TEST_CASE("non-finite values raise EvaluationError carrying the point") {
    ObjectiveProblem p = identity_quadratic(2);
    p.value_fn = [](const Vector&) { return std::nan(""); };
    Evaluator ev(p);
    try {
        ev.value(vec({1.0, 2.0}));
        FAIL("expected EvaluationError");
    } catch (const EvaluationError& e) {
        CHECK(e.point()(1) == 2.0);
    }
    CHECK_THROWS_AS(ev.gradient(vec({1.0})), DomainError);
    CHECK_THROWS_AS(ev.gradient(vec({1.0, INFINITY})), DomainError);
}

TEST_CASE("check_derivatives") {
    const ObjectiveProblem q = make_problem("quadratic", 10);
    const DerivativeReport rq = check_derivatives(q, random_point(q, 1), 1e-5);
    CHECK(rq.passed());
    CHECK(rq.gradient_max_rel_error <= 1e-8);

    const ObjectiveProblem rb = make_problem("rosenbrock", 10);
    const DerivativeReport rr = check_derivatives(rb, random_point(rb, 2), 1e-5);
    CHECK(rr.passed());
    CHECK(rr.gradient_max_rel_error <= 1e-5);

    ObjectiveProblem bad = make_problem("rosenbrock", 10);
    auto good = bad.gradient_fn;
    bad.gradient_fn = [good](const Vector& x) {
        Vector g = good(x);
        g(3) += 0.5;
        return g;
    };
    CHECK_FALSE(check_derivatives(bad, random_point(bad, 2), 1e-5).passed());
}

TEST_CASE("suite: every problem passes derivative checks at 20 random points") {
    for (const std::string& name : suite_names()) {
        const ObjectiveProblem p = parse_problem_id(name);
        for (std::uint64_t s = 0; s < 20; ++s) {
            const DerivativeReport r = check_derivatives(p, random_point(p, s), 1e-5);
            INFO(name << " seed " << s << " grad " << r.gradient_max_rel_error << " hess "
                      << r.hessian_max_rel_error << " hvp " << r.hvp_max_rel_error);
            CHECK(r.passed());
            if (p.has_hvp() && p.has_hessian()) CHECK(r.hvp_vs_hessian_rel_error <= 1e-10);
        }
    }
}

TEST_CASE("suite: hvp is linear in v") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (const std::string& name : suite_names()) {
        const ObjectiveProblem p = parse_problem_id(name);
        Evaluator ev(p);
        const Index n = p.dimension;
        for (std::uint64_t s = 0; s < 5; ++s) {
            const Vector x = random_point(p, s);
            Vector v(n), w(n);
            for (Index i = 0; i < n; ++i) {
                v(i) = nd(rng);
                w(i) = nd(rng);
            }
            const double a = nd(rng), b = nd(rng);
            const Vector lhs = ev.hvp(x, a * v + b * w);
            const Vector rhs = a * ev.hvp(x, v) + b * ev.hvp(x, w);
            INFO(name);
            CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, lhs.norm()));
        }
    }
}

TEST_CASE("make_problem examples") {
    const ObjectiveProblem q = make_problem("quadratic", 5);
    REQUIRE(q.constants.hessian_bound);
    REQUIRE(q.constants.hessian_lipschitz);
    CHECK(*q.constants.hessian_bound == doctest::Approx(5.0));
    CHECK(*q.constants.hessian_lipschitz == 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(q.hessian_fn(Vector::Zero(5)));
    CHECK(es.eigenvalues()(0) == doctest::Approx(1.0));
    CHECK(es.eigenvalues()(4) == doctest::Approx(5.0));

    for (const char* name : {"saddle", "pure_saddle"}) {
        const ObjectiveProblem s = make_problem(name, 2);
        const Vector zero = Vector::Zero(2);
        CHECK(s.gradient_fn(zero).norm() == 0.0);
        Eigen::SelfAdjointEigenSolver<Matrix> ss(s.hessian_fn(zero));
        CHECK(ss.eigenvalues()(0) == doctest::Approx(-1.0));
    }

    // Chained Rosenbrock from the alternating (-1.2, 1) start; frozen from an
    // independent evaluation.
    const ObjectiveProblem rb = make_problem("rosenbrock", 100);
    CHECK(rb.value_fn(rb.standard_start) == doctest::Approx(24926.0).epsilon(1e-12));

    CHECK_THROWS_AS(make_problem("no_such_problem", 3), ConfigError);
    CHECK_THROWS_AS(make_problem("powell", 6), ConfigError);
    CHECK_THROWS_AS(make_problem("rosenbrock", 1), ConfigError);
}

TEST_CASE("parse_problem_id") {
    CHECK(parse_problem_id("rosenbrock:100").dimension == 100);
    CHECK(parse_problem_id("rosenbrock").dimension == 2);
    CHECK_THROWS_AS(parse_problem_id("rosenbrock:abc"), ConfigError);
    CHECK_THROWS_AS(parse_problem_id("rosenbrock:0"), ConfigError);
}

TEST_CASE("known optima are stationary with the stated value") {
    for (const std::string& name : suite_names()) {
        const ObjectiveProblem p = parse_problem_id(name);
        if (!p.optimum) continue;
        INFO(name);
        CHECK(p.gradient_fn(p.optimum->x).norm() <= 1e-10);
        CHECK(p.value_fn(p.optimum->x) == doctest::Approx(p.optimum->f).epsilon(1e-12));
    }
}
