#include "doctest.h"

#include "hsodm/baselines.hpp"

#include <cmath>
#include <random>

using namespace hsodm;

namespace {

LinearMap dense_map(const Matrix& h) {
    return [h](const Vector& v) -> Vector { return h * v; };
}

double quad_model(const Matrix& h, const Vector& g, const Vector& d) { return g.dot(d) + 0.5 * d.dot(h * d); }

double cubic_model(const Matrix& h, const Vector& g, double sigma, const Vector& d) {
    return quad_model(h, g, d) + sigma * std::pow(d.norm(), 3) / 3.0;
}

Matrix random_symmetric(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix a(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = nd(rng);
    return 0.5 * (a + a.transpose());
}

Vector random_vector(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

// Minimum of the Cauchy model g'(-s g) + (s^2/2) g'Hg over 0 <= s <= radius/||g||.
double cauchy_model(const Matrix& h, const Vector& g, double radius) {
    const double gg = g.squaredNorm();
    const double ghg = g.dot(h * g);
    const double smax = radius / g.norm();
    const double s = ghg > 0.0 ? std::min(smax, gg / ghg) : smax;
    return -s * gg + 0.5 * s * s * ghg;
}

} // namespace

TEST_CASE("steihaug_cg spec examples") {
    const Matrix eye = Matrix::Identity(3, 3);
    Vector g(3);
    g << 0.3, -0.4, 1.2;
    SUBCASE("H = I with a large radius gives the Newton step") {
        const SteihaugResult s = steihaug_cg(dense_map(eye), g, 100.0, 1e-12, 10);
        CHECK((s.d + g).norm() <= 1e-14);
        CHECK(s.reason == "converged");
    }
    SUBCASE("H = I with ||g|| > radius gives scaled steepest descent") {
        const SteihaugResult s = steihaug_cg(dense_map(eye), g, 0.5, 1e-12, 10);
        CHECK((s.d + 0.5 * g / g.norm()).norm() <= 1e-14);
        CHECK(s.reason == "boundary");
    }
    SUBCASE("negative curvature exits at the boundary below the Cauchy model") {
        Matrix h(2, 2);
        h << 1, 0, 0, -1;
        Vector g2(2);
        g2 << 1, 0;
        const SteihaugResult s = steihaug_cg(dense_map(h), g2, 1.0, 1e-12, 10);
        CHECK(s.d.norm() == doctest::Approx(1.0));
        // The Cauchy point along -g is s = 1 with model -1/2; CG reaches it exactly
        // at its first iterate, which lands on the boundary.
        CHECK(cauchy_model(h, g2, 1.0) == doctest::Approx(-0.5));
        CHECK(s.model_value <= cauchy_model(h, g2, 1.0) + 1e-14);
        CHECK(s.model_value == doctest::Approx(quad_model(h, g2, s.d)));
    }
    SUBCASE("zero gradient and invalid radius") {
        CHECK(steihaug_cg(dense_map(eye), Vector::Zero(3), 1.0, 1e-8, 5).d.norm() == 0.0);
        CHECK_THROWS_AS(steihaug_cg(dense_map(eye), g, 0.0, 1e-8, 5), ConfigError);
    }
}

TEST_CASE("steihaug_cg properties over random instances") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ur(0.01, 3.0);
    for (int k = 0; k < 300; ++k) {
        const Index n = 2 + k % 15;
        const Matrix h = random_symmetric(n, rng);
        const Vector g = random_vector(n, rng);
        const double radius = ur(rng);
        const SteihaugResult s = steihaug_cg(dense_map(h), g, radius, 1e-10, 2 * static_cast<int>(n));
        CHECK(s.d.norm() <= radius * (1.0 + 1e-12));
        CHECK(s.model_value == doctest::Approx(quad_model(h, g, s.d)).epsilon(1e-10));
        CHECK(s.model_value <= cauchy_model(h, g, radius) + 1e-12 * std::max(1.0, std::abs(s.model_value)));
    }
}

TEST_CASE("cubic subproblem frozen values") {
    SUBCASE("H = 1, g = 1, sigma = 1 gives lambda = (sqrt 5 - 1) / 2") {
        const CubicStep s = cubic_subproblem(Matrix::Ones(1, 1), Vector::Ones(1), 1.0);
        CHECK(s.lambda == doctest::Approx((std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
        CHECK(s.d(0) == doctest::Approx(-(std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-14));
        CHECK(!s.hard_case);
    }
    SUBCASE("Newton limit as sigma goes to zero") {
        Matrix h(2, 2);
        h << 3, 1, 1, 2;
        Vector g(2);
        g << 1, -2;
        const Vector newton = -h.ldlt().solve(g);
        double prev = std::numeric_limits<double>::infinity();
        for (double sigma : {1e-1, 1e-3, 1e-5, 1e-7}) {
            const double err = (cubic_subproblem(h, g, sigma).d - newton).norm();
            CHECK(err < prev);
            prev = err;
        }
        CHECK(prev <= 1e-6);
    }
    SUBCASE("hard case matches a brute-force grid") {
        // g is orthogonal to e1, the leftmost eigenvector.
        Matrix h(2, 2);
        h << -1, 0, 0, 2;
        Vector g(2);
        g << 0, 1;
        const double sigma = 1.0;
        const CubicStep s = cubic_subproblem(h, g, sigma);
        CHECK(s.hard_case);
        CHECK(s.lambda == doctest::Approx(1.0));
        CHECK(s.d(1) == doctest::Approx(-1.0 / 3.0));
        CHECK(std::abs(s.d(0)) == doctest::Approx(std::sqrt(1.0 - 1.0 / 9.0)));
        double best = std::numeric_limits<double>::infinity();
        for (int i = -400; i <= 400; ++i)
            for (int j = -400; j <= 400; ++j) {
                Vector d(2);
                d << i * 0.005, j * 0.005;
                best = std::min(best, cubic_model(h, g, sigma, d));
            }
        CHECK(s.model_value <= best + 1e-12);
        CHECK(s.model_value >= best - 1e-3);
    }
    SUBCASE("zero gradient") {
        CHECK(cubic_subproblem(Matrix::Identity(2, 2), Vector::Zero(2), 1.0).d.norm() == 0.0);
        Matrix h = Matrix::Identity(2, 2);
        h(1, 1) = -2.0;
        const CubicStep s = cubic_subproblem(h, Vector::Zero(2), 4.0);
        CHECK(s.hard_case);
        CHECK(s.d.norm() == doctest::Approx(0.5));
    }
}

TEST_CASE("cubic subproblem optimality over random instances") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> us(0.05, 20.0);
    for (int k = 0; k < 500; ++k) {
        const Index n = 1 + k % 12;
        const Matrix h = random_symmetric(n, rng);
        Vector g = random_vector(n, rng);
        if (k % 10 == 0) {
            // Plant a hard-case instance: remove the leftmost eigencomponent of g.
            Eigen::SelfAdjointEigenSolver<Matrix> es(h);
            const Vector u = es.eigenvectors().col(0);
            g -= u.dot(g) * u;
        }
        const double sigma = us(rng);
        const CubicStep s = cubic_subproblem(h, g, sigma);
        const Matrix shifted = h + s.lambda * Matrix::Identity(n, n);
        CHECK((shifted * s.d + g).norm() <= 1e-8);
        CHECK(std::abs(s.lambda - sigma * s.d.norm()) <= 1e-8);
        Eigen::SelfAdjointEigenSolver<Matrix> es(shifted);
        CHECK(es.eigenvalues()(0) >= -1e-9);
        CHECK(s.model_value == doctest::Approx(cubic_model(h, g, sigma, s.d)).epsilon(1e-10));
        // Global minimality against random probes.
        for (int t = 0; t < 20; ++t) {
            const Vector probe = s.d + 0.1 * random_vector(n, rng);
            CHECK(cubic_model(h, g, sigma, probe) >= s.model_value - 1e-10);
        }
    }
    CHECK_THROWS_AS(cubic_subproblem(Matrix::Identity(2, 2), Vector::Ones(2), 0.0), ConfigError);
    CHECK_THROWS_AS(cubic_subproblem(Matrix::Identity(2, 2), Vector::Ones(3), 1.0), DomainError);
}

TEST_CASE("newton trust region") {
    SUBCASE("convex quadratic converges to the closed form and rho = 1 inside the radius") {
        const ObjectiveProblem q = parse_problem_id("quadratic:30");
        TrustRegionConfig c;
        c.gtol = 1e-8;
        const SolveResult r = newton_tr_solve(q, q.standard_start, c);
        CHECK(r.status == SolverStatus::GradientConverged);
        CHECK(r.solver == "newton-tr");
        CHECK((r.x - q.optimum->x).norm() <= 1e-7);
        bool interior = false;
        for (const IterationRecord& rec : r.trace) {
            REQUIRE(rec.rho);
            // Skip steps whose decrease is at roundoff level, where rho is a ratio of noise.
            if (rec.d_norm < 0.999 * rec.radius && rec.f - rec.f_next > 1e-8 * (1.0 + std::abs(rec.f))) {
                interior = true;
                CHECK(*rec.rho == doctest::Approx(1.0).epsilon(1e-6));
            }
        }
        CHECK(interior);
    }
    SUBCASE("Rosenbrock(2) converges") {
        const ObjectiveProblem p = parse_problem_id("rosenbrock:2");
        const SolveResult r = newton_tr_solve(p, p.standard_start, TrustRegionConfig{});
        CHECK(r.status == SolverStatus::GradientConverged);
        CHECK((r.x - Vector::Ones(2)).norm() <= 1e-4);
        MESSAGE("newton-tr rosenbrock:2 iterations = " << r.iterations);
    }
    SUBCASE("radius update and monotonicity") {
        const ObjectiveProblem p = parse_problem_id("rosenbrock:10");
        TrustRegionConfig c;
        const SolveResult r = newton_tr_solve(p, p.standard_start, c);
        for (std::size_t i = 0; i < r.trace.size(); ++i) {
            const IterationRecord& rec = r.trace[i];
            CHECK(rec.f_next <= rec.f);
            CHECK(rec.radius > 0.0);
            CHECK(rec.d_norm <= rec.radius * (1.0 + 1e-12));
            if (i + 1 < r.trace.size()) {
                const double next = r.trace[i + 1].radius;
                if (*rec.rho < c.accept_ratio)
                    CHECK(next == doctest::Approx(c.shrink_factor * rec.radius));
                else if (*rec.rho >= c.expand_ratio && rec.d_norm >= 0.999 * rec.radius)
                    CHECK(next == doctest::Approx(std::min(c.max_radius, 2.0 * rec.radius)));
                else
                    CHECK(next == rec.radius);
            }
        }
    }
    SUBCASE("iteration cap") {
        const ObjectiveProblem p = parse_problem_id("rosenbrock:2");
        TrustRegionConfig c;
        c.max_iters = 1;
        const SolveResult r = newton_tr_solve(p, p.standard_start, c);
        CHECK(r.status == SolverStatus::MaxIters);
        CHECK(r.iterations == 1);
    }
    SUBCASE("matrix-free problems use products") {
        ObjectiveProblem p = parse_problem_id("powell:8");
        p.hvp_fn = [h = p.hessian_fn](const Vector& x, const Vector& v) -> Vector { return h(x) * v; };
        p.hessian_fn = nullptr;
        const SolveResult r = newton_tr_solve(p, p.standard_start, TrustRegionConfig{});
        CHECK(r.status == SolverStatus::GradientConverged);
        CHECK(r.evals.n_H == 0);
        CHECK(r.evals.n_hvp > 0);
    }
    TrustRegionConfig bad;
    bad.shrink_factor = 1.5;
    CHECK_THROWS_AS(newton_tr_solve(parse_problem_id("rosenbrock:2"), Vector::Zero(2), bad), ConfigError);
}

TEST_CASE("adaptive cubic regularization") {
    SUBCASE("suite problems converge monotonically") {
        for (const char* id : {"rosenbrock:2", "quadratic:20", "wood:4", "convex_quartic:10", "quartic:10"}) {
            const ObjectiveProblem p = parse_problem_id(id);
            CubicRegConfig c;
            const SolveResult r = cubic_reg_solve(p, p.standard_start, c);
            CAPTURE(id);
            CHECK(r.status == SolverStatus::GradientConverged);
            CHECK(r.solver == "cubic");
            for (const IterationRecord& rec : r.trace) {
                CHECK(rec.f_next <= rec.f);
                if (rec.kind == "rejected") CHECK(rec.f_next == rec.f);
            }
        }
    }
    SUBCASE("escapes the saddle point through the hard case") {
        const ObjectiveProblem p = parse_problem_id("pure_saddle:3");
        CubicRegConfig c;
        c.max_iters = 1;
        // g = 0 at the start, so gtol alone would stop; perturb one coordinate.
        Vector x = p.standard_start;
        x(0) = 1e-3;
        const SolveResult r = cubic_reg_solve(p, x, c);
        REQUIRE(r.trace.size() == 1);
        CHECK(r.trace[0].flags.find("hard_case") != std::string::npos);
        CHECK(r.trace[0].f_next < r.trace[0].f);
    }
}
