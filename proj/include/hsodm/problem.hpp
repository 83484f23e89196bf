#pragma once

#include "hsodm/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hsodm {

/// Constants of the problem that the theory consumes. All are optional; every
/// one is only claimed valid on a region containing the iterates of a monotone
/// method started from the problem's standard start.
struct KnownConstants {
    std::optional<double> hessian_lipschitz; // M
    std::optional<double> hessian_bound;     // U_H
    std::optional<double> gradient_bound;    // U_g
    std::optional<double> f_lower;           // f_inf
    std::optional<double> strong_convexity;  // mu, near the known optimum
};

struct KnownOptimum {
    Vector x;
    double f = 0.0;
};

/// Evaluation contract of a twice differentiable objective. Immutable once built
/// and safe to share across threads.
struct ObjectiveProblem {
    std::string name;
    Index dimension = 0;
    std::function<double(const Vector&)> value_fn;
    std::function<Vector(const Vector&)> gradient_fn;
    std::function<Matrix(const Vector&)> hessian_fn;              // may be empty
    std::function<Vector(const Vector&, const Vector&)> hvp_fn;   // may be empty
    KnownConstants constants;
    std::optional<KnownOptimum> optimum;
    Vector standard_start;

    bool has_hessian() const { return static_cast<bool>(hessian_fn); }
    bool has_hvp() const { return static_cast<bool>(hvp_fn); }

    /// Throws ConfigError when the capability invariants are violated.
    void validate() const;
};

struct EvalCounters {
    std::int64_t n_f = 0;
    std::int64_t n_g = 0;
    std::int64_t n_H = 0;
    std::int64_t n_hvp = 0;

    EvalCounters operator-(const EvalCounters& o) const {
        return {n_f - o.n_f, n_g - o.n_g, n_H - o.n_H, n_hvp - o.n_hvp};
    }
    bool operator==(const EvalCounters&) const = default;
};

/// Per-solve view of a problem: checks inputs and outputs for finiteness and
/// counts every callback. Not thread-safe; create one per solve.
class Evaluator {
public:
    explicit Evaluator(const ObjectiveProblem& problem);

    const ObjectiveProblem& problem() const { return problem_; }
    Index dimension() const { return problem_.dimension; }

    double value(const Vector& x);
    Vector gradient(const Vector& x);
    /// Dense Hessian. Memoized on the exact bit pattern of x, so repeated calls
    /// at one point count a single n_H.
    const Matrix& hessian(const Vector& x);
    /// Hessian-vector product; falls back to the memoized dense Hessian when the
    /// problem has no hvp_fn.
    Vector hvp(const Vector& x, const Vector& v);

    /// Operator v -> H(x) v bound to a copy of x. Uses the dense Hessian when
    /// `prefer_dense` and it is available, otherwise hvp().
    LinearMap hessian_operator(const Vector& x, bool prefer_dense);

    const EvalCounters& counters() const { return counters_; }
    void reset_counters() { counters_ = {}; }

private:
    void check_input(const Vector& x) const;

    const ObjectiveProblem& problem_;
    EvalCounters counters_;
    Vector cached_x_;
    Matrix cached_h_;
    bool has_cache_ = false;
};

double evaluate_value(Evaluator& eval, const Vector& x);
Vector evaluate_gradient(Evaluator& eval, const Vector& x);
Vector hessian_vector_product(Evaluator& eval, const Vector& x, const Vector& v);

struct DerivativeReport {
    double gradient_max_rel_error = 0.0;
    double hessian_max_rel_error = 0.0; // dense Hessian vs finite differences of the gradient
    double hvp_max_rel_error = 0.0;     // hvp_fn vs finite differences of the gradient
    double hvp_vs_hessian_rel_error = 0.0;
    bool gradient_ok = false;
    bool hessian_ok = false;
    bool passed() const { return gradient_ok && hessian_ok; }
};

/// Central differences of f against the gradient and central differences of
/// the gradient against the Hessian and/or hvp. Relative errors are measured
/// componentwise as |a - b| / max(1, |a|, |b|).
DerivativeReport check_derivatives(const ObjectiveProblem& problem, const Vector& x, double h,
                                   double rel_tol = 1e-5);

// ---------------------------------------------------------------------------
// Built-in suite

/// Convex quadratic 0.5 x'Ax - b'x with A = P diag(spectrum) P, P a fixed
/// Householder reflector.
ObjectiveProblem make_quadratic(const std::vector<double>& spectrum, const Vector& b);

/// Names accepted by make_problem.
std::vector<std::string> suite_names();

/// Desk-scale suite member. Throws ConfigError on unknown names or invalid n.
ObjectiveProblem make_problem(std::string_view name, Index n);

/// Parses "name[:n]" (for example "rosenbrock:100"). Each family has a default n.
ObjectiveProblem parse_problem_id(std::string_view id);

/// Deterministic random point near the standard start; used by hygiene checks.
Vector random_point(const ObjectiveProblem& problem, std::uint64_t seed, double scale = 1.0);

} // namespace hsodm
