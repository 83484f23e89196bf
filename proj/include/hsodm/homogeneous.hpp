#pragma once

#include "hsodm/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>

namespace hsodm {

/// Hessian as either a dense matrix or a matrix-free product. Cheap to copy.
class HessianOperator {
public:
    HessianOperator() = default;
    explicit HessianOperator(Matrix dense);
    HessianOperator(LinearMap apply, Index dim);

    Vector apply(const Vector& v) const;
    Index dim() const { return dim_; }
    bool is_dense() const { return dense_ != nullptr; }
    /// Dense matrix; in matrix-free mode it is assembled column by column.
    Matrix to_dense() const;

private:
    std::shared_ptr<const Matrix> dense_;
    LinearMap apply_;
    Index dim_ = 0;
};

/// The (n+1)x(n+1) homogenized operator [[H, g], [g', -delta]].
class HomogeneousSystem {
public:
    HomogeneousSystem(HessianOperator hessian, Vector gradient, double delta);

    Index dim() const { return gradient_.size() + 1; }
    Index n() const { return gradient_.size(); }
    double delta() const { return delta_; }
    const Vector& gradient() const { return gradient_; }
    const HessianOperator& hessian() const { return hessian_; }

    /// [H v + t g; g'v - t delta] for y = [v; t].
    Vector apply(const Vector& y) const;
    LinearMap as_map() const;
    Matrix to_dense() const;

private:
    HessianOperator hessian_;
    Vector gradient_;
    double delta_;
};

/// Throws ConfigError when delta < 0 and DomainError on a non-finite gradient.
HomogeneousSystem homogenize(HessianOperator hessian, Vector gradient, double delta);

enum class SolveMode { Exact, Inexact };

/// Leftmost eigen or Ritz pair of F with its residual.
struct SubproblemSolution {
    Vector v;
    double t = 0.0;
    /// theta = -lambda_min(F) for exact solves, gamma = -(leftmost Ritz value) otherwise.
    double dual = 0.0;
    /// [r; sigma] = F[v;t] + dual [v;t]; identically zero for exact solves.
    Vector residual;
    SolveMode mode = SolveMode::Exact;
    std::optional<double> eigengap;

    int lanczos_iterations = 0;
    bool budget_exhausted = false;
    double alpha = 0.0;      // realized skew of the Lanczos start
    std::uint64_t seed = 0;  // rng seed used by an inexact solve

    double residual_norm() const { return residual.size() ? residual.norm() : 0.0; }
    double sigma() const { return residual.size() ? residual(residual.size() - 1) : 0.0; }
    Vector stacked() const;
};

/// Sign convention: t > 0 when t != 0, otherwise the first nonzero entry of v
/// is positive. Applied in place to y = [v; t] (and to the paired residual).
void canonicalize_sign(Vector& y, Vector* paired = nullptr);

constexpr Index kDefaultDenseThreshold = 2000;

/// Dense eigensolver oracle. Requires n <= dense_threshold.
SubproblemSolution solve_exact(const HomogeneousSystem& F, Index dense_threshold = kDefaultDenseThreshold);

struct OptimalityReport {
    double first_order_residual = 0.0; // ||(F + dual I)[v;t]||
    double norm_error = 0.0;           // | ||[v;t]|| - 1 |
    double shifted_min_eigenvalue = 0.0; // lambda_min(F + dual I) from the dense oracle
    bool first_order_ok = false;
    bool norm_ok = false;
    bool second_order_ok = false;
    bool passed() const { return first_order_ok && norm_ok && second_order_ok; }
};

OptimalityReport verify_optimality(const HomogeneousSystem& F, const SubproblemSolution& sol, double tol);

/// xi'H xi / ||xi||^2. Throws DomainError when xi = 0.
double rayleigh_quotient(const HessianOperator& hessian, const Vector& xi);

enum class StepCase { SmallValue, LargeA, LargeB };

std::string_view to_string(StepCase c);

struct Direction {
    Vector d;
    StepCase kind = StepCase::LargeB;
};

/// Small value when |t| > 1/sqrt(1 + radius^2) (equivalently ||v/t|| < radius),
/// LargeA when |t| >= nu, LargeB otherwise with d = sign(-g'v) v and sign(0) = +1.
Direction direction_from_solution(const SubproblemSolution& sol, const Vector& g, double nu, double radius);

} // namespace hsodm
