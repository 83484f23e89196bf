#include "hsodm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <random>
#include <sstream>

namespace hsodm {

void ObjectiveProblem::validate() const {
    if (dimension <= 0)
        throw ConfigError("problem '" + name + "': dimension must be positive");
    if (!value_fn || !gradient_fn)
        throw ConfigError("problem '" + name + "': value and gradient callbacks are required");
    if (!has_hessian() && !has_hvp())
        throw ConfigError("problem '" + name + "': needs a Hessian or a Hessian-vector product");
    if (standard_start.size() != 0 && standard_start.size() != dimension)
        throw ConfigError("problem '" + name + "': standard start has wrong length");
}

// ---------------------------------------------------------------------------
// Evaluator

Evaluator::Evaluator(const ObjectiveProblem& problem) : problem_(problem) {
    problem_.validate();
}

void Evaluator::check_input(const Vector& x) const {
    if (x.size() != problem_.dimension) {
        std::ostringstream os;
        os << "point of length " << x.size() << " passed to problem '" << problem_.name
           << "' of dimension " << problem_.dimension;
        throw DomainError(os.str());
    }
    if (!x.allFinite())
        throw DomainError("non-finite point passed to problem '" + problem_.name + "'");
}

double Evaluator::value(const Vector& x) {
    check_input(x);
    ++counters_.n_f;
    const double f = problem_.value_fn(x);
    if (!std::isfinite(f))
        throw EvaluationError("non-finite objective value in '" + problem_.name + "'", x);
    return f;
}

Vector Evaluator::gradient(const Vector& x) {
    check_input(x);
    ++counters_.n_g;
    Vector g = problem_.gradient_fn(x);
    if (g.size() != x.size() || !g.allFinite())
        throw EvaluationError("non-finite gradient in '" + problem_.name + "'", x);
    return g;
}

const Matrix& Evaluator::hessian(const Vector& x) {
    check_input(x);
    if (!problem_.has_hessian())
        throw CapabilityError("problem '" + problem_.name + "' has no dense Hessian");
    const bool hit = has_cache_ && cached_x_.size() == x.size() &&
                     std::memcmp(cached_x_.data(), x.data(), sizeof(double) * x.size()) == 0;
    if (!hit) {
        ++counters_.n_H;
        Matrix h = problem_.hessian_fn(x);
        if (h.rows() != x.size() || h.cols() != x.size() || !h.allFinite())
            throw EvaluationError("non-finite Hessian in '" + problem_.name + "'", x);
        cached_h_ = std::move(h);
        cached_x_ = x;
        has_cache_ = true;
    }
    return cached_h_;
}

Vector Evaluator::hvp(const Vector& x, const Vector& v) {
    if (problem_.has_hvp()) {
        check_input(x);
        ++counters_.n_hvp;
        Vector hv = problem_.hvp_fn(x, v);
        if (hv.size() != x.size() || !hv.allFinite())
            throw EvaluationError("non-finite Hessian-vector product in '" + problem_.name + "'", x);
        return hv;
    }
    if (problem_.has_hessian())
        return hessian(x) * v;
    throw CapabilityError("problem '" + problem_.name + "' has neither Hessian nor HVP");
}

LinearMap Evaluator::hessian_operator(const Vector& x, bool prefer_dense) {
    if (prefer_dense && problem_.has_hessian()) {
        auto h = std::make_shared<const Matrix>(hessian(x));
        return [h](const Vector& v) -> Vector { return *h * v; };
    }
    return [this, x](const Vector& v) { return hvp(x, v); };
}

double evaluate_value(Evaluator& eval, const Vector& x) { return eval.value(x); }
Vector evaluate_gradient(Evaluator& eval, const Vector& x) { return eval.gradient(x); }
Vector hessian_vector_product(Evaluator& eval, const Vector& x, const Vector& v) {
    return eval.hvp(x, v);
}

// ---------------------------------------------------------------------------
// Derivative checker

namespace {

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double max_rel_err(const Vector& a, const Vector& b) {
    double e = 0.0;
    for (Index i = 0; i < a.size(); ++i) e = std::max(e, rel_err(a(i), b(i)));
    return e;
}

} // namespace

DerivativeReport check_derivatives(const ObjectiveProblem& problem, const Vector& x, double h,
                                   double rel_tol) {
    if (!(h > 0.0)) throw DomainError("check_derivatives: step must be positive");
    if (!x.allFinite()) throw DomainError("check_derivatives: non-finite point");
    problem.validate();

    const Index n = problem.dimension;
    DerivativeReport rep;

    const Vector g = problem.gradient_fn(x);
    Vector g_fd(n);
    for (Index i = 0; i < n; ++i) {
        Vector xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        g_fd(i) = (problem.value_fn(xp) - problem.value_fn(xm)) / (2.0 * h);
    }
    rep.gradient_max_rel_error = max_rel_err(g, g_fd);
    rep.gradient_ok = rep.gradient_max_rel_error <= rel_tol;

    std::mt19937_64 rng(0x5eedULL + static_cast<std::uint64_t>(n));
    std::normal_distribution<double> normal;
    Vector probe(n);
    for (Index i = 0; i < n; ++i) probe(i) = normal(rng);

    bool ok = true;
    if (problem.has_hessian()) {
        const Matrix hess = problem.hessian_fn(x);
        Matrix h_fd(n, n);
        for (Index j = 0; j < n; ++j) {
            Vector xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            h_fd.col(j) = (problem.gradient_fn(xp) - problem.gradient_fn(xm)) / (2.0 * h);
        }
        double e = 0.0;
        for (Index j = 0; j < n; ++j) e = std::max(e, max_rel_err(hess.col(j), h_fd.col(j)));
        rep.hessian_max_rel_error = e;
        ok = ok && e <= rel_tol;
        if (problem.has_hvp()) {
            const Vector a = hess * probe;
            const Vector b = problem.hvp_fn(x, probe);
            rep.hvp_vs_hessian_rel_error = (a - b).norm() / std::max(1.0, a.norm());
            ok = ok && rep.hvp_vs_hessian_rel_error <= 1e-10;
        }
    }
    if (problem.has_hvp()) {
        const Vector hv = problem.hvp_fn(x, probe);
        const Vector fd =
            (problem.gradient_fn(x + h * probe) - problem.gradient_fn(x - h * probe)) / (2.0 * h);
        rep.hvp_max_rel_error = max_rel_err(hv, fd);
        ok = ok && rep.hvp_max_rel_error <= rel_tol;
    }
    rep.hessian_ok = ok;
    return rep;
}

Vector random_point(const ObjectiveProblem& problem, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Vector x = problem.standard_start.size() == problem.dimension
                   ? problem.standard_start
                   : Vector::Zero(problem.dimension);
    for (Index i = 0; i < x.size(); ++i) x(i) += scale * normal(rng);
    return x;
}

} // namespace hsodm
