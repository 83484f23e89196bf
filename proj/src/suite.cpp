// Built-in desk-scale test problems. Every member ships analytic derivatives;
// hvp_fn is provided where it is cheaper than forming the Hessian.

#include "hsodm/problem.hpp"

#include <charconv>
#include <cmath>
#include <map>

namespace hsodm {

namespace {

// P = I - 2 w w' with w proportional to (1, 2, ..., n).
Matrix householder(Index n) {
    Vector w(n);
    for (Index i = 0; i < n; ++i) w(i) = static_cast<double>(i + 1);
    w.normalize();
    return Matrix::Identity(n, n) - 2.0 * w * w.transpose();
}

ObjectiveProblem rosenbrock(Index n) {
    if (n < 2) throw ConfigError("rosenbrock needs n >= 2");
    ObjectiveProblem p;
    p.name = "rosenbrock:" + std::to_string(n);
    p.dimension = n;
    p.value_fn = [](const Vector& x) {
        double f = 0.0;
        for (Index i = 0; i + 1 < x.size(); ++i) {
            const double a = x(i + 1) - x(i) * x(i);
            const double b = 1.0 - x(i);
            f += 100.0 * a * a + b * b;
        }
        return f;
    };
    p.gradient_fn = [](const Vector& x) {
        Vector g = Vector::Zero(x.size());
        for (Index i = 0; i + 1 < x.size(); ++i) {
            const double a = x(i + 1) - x(i) * x(i);
            g(i) += -400.0 * x(i) * a - 2.0 * (1.0 - x(i));
            g(i + 1) += 200.0 * a;
        }
        return g;
    };
    p.hessian_fn = [](const Vector& x) {
        const Index m = x.size();
        Matrix h = Matrix::Zero(m, m);
        for (Index i = 0; i + 1 < m; ++i) {
            h(i, i) += 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
            h(i, i + 1) += -400.0 * x(i);
            h(i + 1, i) += -400.0 * x(i);
            h(i + 1, i + 1) += 200.0;
        }
        return h;
    };
    p.hvp_fn = [](const Vector& x, const Vector& v) {
        Vector out = Vector::Zero(x.size());
        for (Index i = 0; i + 1 < x.size(); ++i) {
            const double d = 1200.0 * x(i) * x(i) - 400.0 * x(i + 1) + 2.0;
            const double o = -400.0 * x(i);
            out(i) += d * v(i) + o * v(i + 1);
            out(i + 1) += o * v(i) + 200.0 * v(i + 1);
        }
        return out;
    };
    p.standard_start.resize(n);
    for (Index i = 0; i < n; ++i) p.standard_start(i) = (i % 2 == 0) ? -1.2 : 1.0;
    p.optimum = KnownOptimum{Vector::Ones(n), 0.0};
    p.constants.f_lower = 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(p.hessian_fn(Vector::Ones(n)), Eigen::EigenvaluesOnly);
    p.constants.strong_convexity = es.eigenvalues()(0);
    return p;
}

ObjectiveProblem powell(Index n) {
    if (n < 4 || n % 4 != 0) throw ConfigError("powell needs n a positive multiple of 4");
    ObjectiveProblem p;
    p.name = "powell:" + std::to_string(n);
    p.dimension = n;
    p.value_fn = [](const Vector& x) {
        double f = 0.0;
        for (Index k = 0; k < x.size(); k += 4) {
            const double a = x(k) + 10.0 * x(k + 1);
            const double b = x(k + 2) - x(k + 3);
            const double c = x(k + 1) - 2.0 * x(k + 2);
            const double d = x(k) - x(k + 3);
            f += a * a + 5.0 * b * b + std::pow(c, 4) + 10.0 * std::pow(d, 4);
        }
        return f;
    };
    p.gradient_fn = [](const Vector& x) {
        Vector g(x.size());
        for (Index k = 0; k < x.size(); k += 4) {
            const double a = x(k) + 10.0 * x(k + 1);
            const double b = x(k + 2) - x(k + 3);
            const double c = x(k + 1) - 2.0 * x(k + 2);
            const double d = x(k) - x(k + 3);
            const double c3 = 4.0 * c * c * c;
            const double d3 = 40.0 * d * d * d;
            g(k) = 2.0 * a + d3;
            g(k + 1) = 20.0 * a + c3;
            g(k + 2) = 10.0 * b - 2.0 * c3;
            g(k + 3) = -10.0 * b - d3;
        }
        return g;
    };
    p.hessian_fn = [](const Vector& x) {
        const Index m = x.size();
        Matrix h = Matrix::Zero(m, m);
        for (Index k = 0; k < m; k += 4) {
            const double c = x(k + 1) - 2.0 * x(k + 2);
            const double d = x(k) - x(k + 3);
            const double cc = 12.0 * c * c;
            const double dd = 120.0 * d * d;
            Eigen::Matrix4d b;
            b << 2.0 + dd, 20.0, 0.0, -dd,
                 20.0, 200.0 + cc, -2.0 * cc, 0.0,
                 0.0, -2.0 * cc, 10.0 + 4.0 * cc, -10.0,
                 -dd, 0.0, -10.0, 10.0 + dd;
            h.block<4, 4>(k, k) = b;
        }
        return h;
    };
    p.standard_start.resize(n);
    for (Index k = 0; k < n; k += 4) p.standard_start.segment<4>(k) << 3.0, -1.0, 0.0, 1.0;
    p.optimum = KnownOptimum{Vector::Zero(n), 0.0};
    p.constants.f_lower = 0.0;
    return p;
}

ObjectiveProblem wood(Index n) {
    if (n < 4 || n % 4 != 0) throw ConfigError("wood needs n a positive multiple of 4");
    ObjectiveProblem p;
    p.name = "wood:" + std::to_string(n);
    p.dimension = n;
    p.value_fn = [](const Vector& x) {
        double f = 0.0;
        for (Index k = 0; k < x.size(); k += 4) {
            const double x1 = x(k), x2 = x(k + 1), x3 = x(k + 2), x4 = x(k + 3);
            f += 100.0 * std::pow(x2 - x1 * x1, 2) + std::pow(1.0 - x1, 2) +
                 90.0 * std::pow(x4 - x3 * x3, 2) + std::pow(1.0 - x3, 2) +
                 10.1 * (std::pow(x2 - 1.0, 2) + std::pow(x4 - 1.0, 2)) +
                 19.8 * (x2 - 1.0) * (x4 - 1.0);
        }
        return f;
    };
    p.gradient_fn = [](const Vector& x) {
        Vector g(x.size());
        for (Index k = 0; k < x.size(); k += 4) {
            const double x1 = x(k), x2 = x(k + 1), x3 = x(k + 2), x4 = x(k + 3);
            g(k) = -400.0 * x1 * (x2 - x1 * x1) - 2.0 * (1.0 - x1);
            g(k + 1) = 200.0 * (x2 - x1 * x1) + 20.2 * (x2 - 1.0) + 19.8 * (x4 - 1.0);
            g(k + 2) = -360.0 * x3 * (x4 - x3 * x3) - 2.0 * (1.0 - x3);
            g(k + 3) = 180.0 * (x4 - x3 * x3) + 20.2 * (x4 - 1.0) + 19.8 * (x2 - 1.0);
        }
        return g;
    };
    p.hessian_fn = [](const Vector& x) {
        const Index m = x.size();
        Matrix h = Matrix::Zero(m, m);
        for (Index k = 0; k < m; k += 4) {
            const double x1 = x(k), x2 = x(k + 1), x3 = x(k + 2), x4 = x(k + 3);
            Eigen::Matrix4d b;
            b << 1200.0 * x1 * x1 - 400.0 * x2 + 2.0, -400.0 * x1, 0.0, 0.0,
                 -400.0 * x1, 220.2, 0.0, 19.8,
                 0.0, 0.0, 1080.0 * x3 * x3 - 360.0 * x4 + 2.0, -360.0 * x3,
                 0.0, 19.8, -360.0 * x3, 200.2;
            h.block<4, 4>(k, k) = b;
        }
        return h;
    };
    p.standard_start.resize(n);
    for (Index k = 0; k < n; k += 4) p.standard_start.segment<4>(k) << -3.0, -1.0, -3.0, -1.0;
    p.optimum = KnownOptimum{Vector::Ones(n), 0.0};
    p.constants.f_lower = 0.0;
    return p;
}

// f = 0.5 sum_{i<n} x_i^2 - 0.5 x_n^2 (+ 0.25 x_n^4 when bounded). The origin is
// a saddle with g = 0 and lambda_min(H) = -1. The quartic term makes the
// problem bounded below with minimizers at x_n = +-1.
ObjectiveProblem saddle(Index n, bool bounded) {
    if (n < 1) throw ConfigError("saddle needs n >= 1");
    ObjectiveProblem p;
    p.name = std::string(bounded ? "saddle:" : "pure_saddle:") + std::to_string(n);
    p.dimension = n;
    const double q = bounded ? 1.0 : 0.0;
    p.value_fn = [q](const Vector& x) {
        const Index m = x.size();
        const double z = x(m - 1);
        return 0.5 * x.head(m - 1).squaredNorm() - 0.5 * z * z + 0.25 * q * z * z * z * z;
    };
    p.gradient_fn = [q](const Vector& x) {
        Vector g = x;
        const double z = x(x.size() - 1);
        g(x.size() - 1) = -z + q * z * z * z;
        return g;
    };
    p.hessian_fn = [q](const Vector& x) {
        const Index m = x.size();
        Matrix h = Matrix::Identity(m, m);
        const double z = x(m - 1);
        h(m - 1, m - 1) = -1.0 + 3.0 * q * z * z;
        return h;
    };
    p.hvp_fn = [q](const Vector& x, const Vector& v) {
        Vector out = v;
        const Index m = x.size();
        const double z = x(m - 1);
        out(m - 1) = (-1.0 + 3.0 * q * z * z) * v(m - 1);
        return out;
    };
    p.standard_start = Vector::Zero(n);
    if (bounded) {
        Vector xs = Vector::Zero(n);
        xs(n - 1) = 1.0;
        p.optimum = KnownOptimum{xs, -0.25};
        p.constants.f_lower = -0.25;
        p.constants.strong_convexity = 1.0;
        // From the origin the sublevel set has |x_n| <= sqrt(2); one unit of margin.
        const double r = std::sqrt(2.0) + 1.0;
        p.constants.hessian_lipschitz = 6.0 * r;
        p.constants.hessian_bound = std::max(1.0, 3.0 * r * r - 1.0);
    }
    return p;
}

// Nonconvex chain of double wells: sum 0.25 (x_i^2 - 1)^2 + (rho/2) sum (x_{i+1} - x_i)^2.
// Strict minimizers at +-(1, ..., 1); the origin is a local maximum.
constexpr double kQuarticCoupling = 0.1;

Vector quartic_start(Index n) {
    Vector x(n);
    for (Index i = 0; i < n; ++i) x(i) = 0.3 * std::sin(1.7 * static_cast<double>(i) + 0.5);
    return x;
}

ObjectiveProblem quartic(Index n) {
    if (n < 1) throw ConfigError("quartic needs n >= 1");
    const double rho = kQuarticCoupling;
    ObjectiveProblem p;
    p.name = "quartic:" + std::to_string(n);
    p.dimension = n;
    p.value_fn = [rho](const Vector& x) {
        double f = 0.0;
        for (Index i = 0; i < x.size(); ++i) f += 0.25 * std::pow(x(i) * x(i) - 1.0, 2);
        for (Index i = 0; i + 1 < x.size(); ++i) f += 0.5 * rho * std::pow(x(i + 1) - x(i), 2);
        return f;
    };
    p.gradient_fn = [rho](const Vector& x) {
        Vector g(x.size());
        for (Index i = 0; i < x.size(); ++i) g(i) = x(i) * (x(i) * x(i) - 1.0);
        for (Index i = 0; i + 1 < x.size(); ++i) {
            const double d = rho * (x(i + 1) - x(i));
            g(i) -= d;
            g(i + 1) += d;
        }
        return g;
    };
    p.hessian_fn = [rho](const Vector& x) {
        const Index m = x.size();
        Matrix h = Matrix::Zero(m, m);
        for (Index i = 0; i < m; ++i) h(i, i) = 3.0 * x(i) * x(i) - 1.0;
        for (Index i = 0; i + 1 < m; ++i) {
            h(i, i) += rho;
            h(i + 1, i + 1) += rho;
            h(i, i + 1) -= rho;
            h(i + 1, i) -= rho;
        }
        return h;
    };
    p.hvp_fn = [rho](const Vector& x, const Vector& v) {
        Vector out(x.size());
        for (Index i = 0; i < x.size(); ++i) out(i) = (3.0 * x(i) * x(i) - 1.0) * v(i);
        for (Index i = 0; i + 1 < x.size(); ++i) {
            const double d = rho * (v(i + 1) - v(i));
            out(i) -= d;
            out(i + 1) += d;
        }
        return out;
    };
    p.standard_start = quartic_start(n);
    p.optimum = KnownOptimum{Vector::Ones(n), 0.0};
    p.constants.f_lower = 0.0;
    p.constants.strong_convexity = 2.0;
    // Each well term bounds (x_i^2 - 1)^2 <= 4 f(x0) on the sublevel set.
    const double f0 = p.value_fn(p.standard_start);
    const double r = std::sqrt(1.0 + 2.0 * std::sqrt(f0)) + 1.0;
    p.constants.hessian_lipschitz = 6.0 * r;
    p.constants.hessian_bound = std::max(1.0, 3.0 * r * r - 1.0) + 4.0 * rho;
    return p;
}

// Strongly convex separable quartic sum (x_i^2 + x_i^4); x* = 0, mu = 2.
ObjectiveProblem convex_quartic(Index n) {
    if (n < 1) throw ConfigError("convex_quartic needs n >= 1");
    ObjectiveProblem p;
    p.name = "convex_quartic:" + std::to_string(n);
    p.dimension = n;
    p.value_fn = [](const Vector& x) {
        return x.squaredNorm() + x.array().pow(4).sum();
    };
    p.gradient_fn = [](const Vector& x) -> Vector {
        return (2.0 * x.array() + 4.0 * x.array().cube()).matrix();
    };
    p.hessian_fn = [](const Vector& x) -> Matrix {
        return (2.0 + 12.0 * x.array().square()).matrix().asDiagonal();
    };
    p.hvp_fn = [](const Vector& x, const Vector& v) -> Vector {
        return ((2.0 + 12.0 * x.array().square()) * v.array()).matrix();
    };
    p.standard_start = Vector::Constant(n, 0.6);
    p.optimum = KnownOptimum{Vector::Zero(n), 0.0};
    p.constants.f_lower = 0.0;
    p.constants.strong_convexity = 2.0;
    // Sublevel set: x_i^2 + x_i^4 <= f(x0) for every coordinate.
    const double f0 = p.value_fn(p.standard_start);
    const double r = std::sqrt((-1.0 + std::sqrt(1.0 + 4.0 * f0)) / 2.0) + 1.0;
    p.constants.hessian_lipschitz = 24.0 * r;
    p.constants.hessian_bound = 2.0 + 12.0 * r * r;
    return p;
}

using Factory = ObjectiveProblem (*)(Index);

ObjectiveProblem quadratic_default(Index n) {
    if (n < 1) throw ConfigError("quadratic needs n >= 1");
    std::vector<double> spectrum(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) spectrum[static_cast<std::size_t>(i)] = static_cast<double>(i + 1);
    return make_quadratic(spectrum, Vector::Ones(n));
}

ObjectiveProblem saddle_bounded(Index n) { return saddle(n, true); }
ObjectiveProblem saddle_pure(Index n) { return saddle(n, false); }

struct Family {
    Factory make;
    Index default_n;
};

const std::map<std::string, Family, std::less<>>& registry() {
    static const std::map<std::string, Family, std::less<>> r = {
        {"quadratic", {&quadratic_default, 10}},
        {"rosenbrock", {&rosenbrock, 2}},
        {"powell", {&powell, 4}},
        {"wood", {&wood, 4}},
        {"saddle", {&saddle_bounded, 2}},
        {"pure_saddle", {&saddle_pure, 2}},
        {"quartic", {&quartic, 10}},
        {"convex_quartic", {&convex_quartic, 10}},
    };
    return r;
}

} // namespace

ObjectiveProblem make_quadratic(const std::vector<double>& spectrum, const Vector& b) {
    const Index n = static_cast<Index>(spectrum.size());
    if (n == 0 || b.size() != n) throw ConfigError("quadratic: spectrum and b must match and be nonempty");
    const Matrix p = householder(n);
    const Eigen::Map<const Vector> s(spectrum.data(), n);
    const Matrix a = p * s.asDiagonal() * p;
    const double lo = s.minCoeff();
    const double hi = s.cwiseAbs().maxCoeff();

    ObjectiveProblem q;
    q.name = "quadratic:" + std::to_string(n);
    q.dimension = n;
    q.value_fn = [a, b](const Vector& x) { return 0.5 * x.dot(a * x) - b.dot(x); };
    q.gradient_fn = [a, b](const Vector& x) -> Vector { return a * x - b; };
    q.hessian_fn = [a](const Vector&) { return a; };
    q.hvp_fn = [a](const Vector&, const Vector& v) -> Vector { return a * v; };
    q.standard_start = Vector::Zero(n);
    q.constants.hessian_lipschitz = 0.0;
    q.constants.hessian_bound = hi;
    if (lo > 0.0) {
        const Vector xs = a.ldlt().solve(b);
        q.optimum = KnownOptimum{xs, -0.5 * b.dot(xs)};
        q.constants.f_lower = -0.5 * b.dot(xs);
        q.constants.strong_convexity = lo;
    }
    return q;
}

std::vector<std::string> suite_names() {
    std::vector<std::string> out;
    for (const auto& [name, fam] : registry()) out.push_back(name);
    return out;
}

ObjectiveProblem make_problem(std::string_view name, Index n) {
    const auto& r = registry();
    const auto it = r.find(name);
    if (it == r.end()) throw ConfigError("unknown problem '" + std::string(name) + "'");
    return it->second.make(n);
}

ObjectiveProblem parse_problem_id(std::string_view id) {
    const auto colon = id.find(':');
    const std::string_view name = id.substr(0, colon);
    const auto& r = registry();
    const auto it = r.find(name);
    if (it == r.end()) throw ConfigError("unknown problem '" + std::string(name) + "'");
    Index n = it->second.default_n;
    if (colon != std::string_view::npos) {
        const std::string_view digits = id.substr(colon + 1);
        long long parsed = 0;
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), parsed);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || parsed <= 0)
            throw ConfigError("bad dimension in problem id '" + std::string(id) + "'");
        n = static_cast<Index>(parsed);
    }
    return it->second.make(n);
}

} // namespace hsodm
