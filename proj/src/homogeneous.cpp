#include "hsodm/homogeneous.hpp"

#include <cmath>
#include <string>

namespace hsodm {

HessianOperator::HessianOperator(Matrix dense)
    : dense_(std::make_shared<const Matrix>(std::move(dense))), dim_(dense_->rows()) {
    if (dense_->rows() != dense_->cols()) throw DomainError("Hessian must be square");
}

HessianOperator::HessianOperator(LinearMap apply, Index dim) : apply_(std::move(apply)), dim_(dim) {
    if (!apply_) throw ConfigError("matrix-free Hessian needs a product callback");
}

Vector HessianOperator::apply(const Vector& v) const {
    if (dense_) return *dense_ * v;
    return apply_(v);
}

Matrix HessianOperator::to_dense() const {
    if (dense_) return *dense_;
    Matrix m(dim_, dim_);
    for (Index j = 0; j < dim_; ++j) m.col(j) = apply_(Vector::Unit(dim_, j));
    return 0.5 * (m + m.transpose());
}

HomogeneousSystem::HomogeneousSystem(HessianOperator hessian, Vector gradient, double delta)
    : hessian_(std::move(hessian)), gradient_(std::move(gradient)), delta_(delta) {}

Vector HomogeneousSystem::apply(const Vector& y) const {
    const Index n = gradient_.size();
    const auto v = y.head(n);
    const double t = y(n);
    Vector out(n + 1);
    out.head(n) = hessian_.apply(v) + t * gradient_;
    out(n) = gradient_.dot(v) - t * delta_;
    return out;
}

LinearMap HomogeneousSystem::as_map() const {
    return [self = *this](const Vector& y) { return self.apply(y); };
}

Matrix HomogeneousSystem::to_dense() const {
    const Index n = gradient_.size();
    Matrix f(n + 1, n + 1);
    f.topLeftCorner(n, n) = hessian_.to_dense();
    f.topRightCorner(n, 1) = gradient_;
    f.bottomLeftCorner(1, n) = gradient_.transpose();
    f(n, n) = -delta_;
    return f;
}

HomogeneousSystem homogenize(HessianOperator hessian, Vector gradient, double delta) {
    if (!(delta >= 0.0)) throw ConfigError("homogenize: delta must be nonnegative");
    if (!gradient.allFinite()) throw DomainError("homogenize: non-finite gradient");
    if (hessian.dim() != gradient.size()) throw DomainError("homogenize: Hessian and gradient sizes differ");
    return HomogeneousSystem(std::move(hessian), std::move(gradient), delta);
}

Vector SubproblemSolution::stacked() const {
    Vector y(v.size() + 1);
    y << v, t;
    return y;
}

void canonicalize_sign(Vector& y, Vector* paired) {
    constexpr double kZero = 1e-13;
    const Index n = y.size() - 1;
    bool flip = false;
    if (std::abs(y(n)) > kZero) {
        flip = y(n) < 0.0;
    } else {
        const double scale = std::max(y.head(n).cwiseAbs().maxCoeff(), 1e-300);
        for (Index i = 0; i < n; ++i) {
            if (std::abs(y(i)) > kZero * scale) {
                flip = y(i) < 0.0;
                break;
            }
        }
    }
    if (flip) {
        y = -y;
        if (paired) *paired = -*paired;
    }
}

SubproblemSolution solve_exact(const HomogeneousSystem& F, Index dense_threshold) {
    if (F.n() > dense_threshold)
        throw ConfigError("solve_exact: dimension " + std::to_string(F.n()) +
                          " exceeds the dense threshold " + std::to_string(dense_threshold));
    const Matrix dense = F.to_dense();
    Eigen::SelfAdjointEigenSolver<Matrix> es(dense);
    if (es.info() != Eigen::Success) throw NumericalError("solve_exact: eigensolver did not converge");

    Vector y = es.eigenvectors().col(0);
    y.normalize();
    canonicalize_sign(y);

    SubproblemSolution sol;
    sol.v = y.head(F.n());
    sol.t = y(F.n());
    sol.dual = -es.eigenvalues()(0);
    sol.residual = Vector::Zero(F.dim());
    sol.mode = SolveMode::Exact;
    if (F.dim() > 1) sol.eigengap = es.eigenvalues()(1) - es.eigenvalues()(0);
    return sol;
}

OptimalityReport verify_optimality(const HomogeneousSystem& F, const SubproblemSolution& sol, double tol) {
    OptimalityReport rep;
    const Vector y = sol.stacked();
    rep.first_order_residual = (F.apply(y) + sol.dual * y).norm();
    rep.norm_error = std::abs(y.norm() - 1.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(F.to_dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("verify_optimality: oracle eigensolver failed");
    rep.shifted_min_eigenvalue = es.eigenvalues()(0) + sol.dual;
    rep.first_order_ok = rep.first_order_residual <= tol;
    rep.norm_ok = rep.norm_error <= tol;
    rep.second_order_ok = rep.shifted_min_eigenvalue >= -tol;
    return rep;
}

double rayleigh_quotient(const HessianOperator& hessian, const Vector& xi) {
    const double nn = xi.squaredNorm();
    if (nn == 0.0) throw DomainError("rayleigh_quotient: zero vector");
    return xi.dot(hessian.apply(xi)) / nn;
}

std::string_view to_string(StepCase c) {
    switch (c) {
    case StepCase::SmallValue: return "small";
    case StepCase::LargeA: return "large_a";
    case StepCase::LargeB: return "large_b";
    }
    return "?";
}

Direction direction_from_solution(const SubproblemSolution& sol, const Vector& g, double nu, double radius) {
    if (!(nu > 0.0 && nu < 0.5)) throw ConfigError("direction_from_solution: nu must lie in (0, 1/2)");
    if (!(radius > 0.0)) throw ConfigError("direction_from_solution: radius must be positive");
    const double abs_t = std::abs(sol.t);
    const double small_threshold = std::sqrt(1.0 / (1.0 + radius * radius));
    Direction out;
    if (abs_t > small_threshold) {
        out.kind = StepCase::SmallValue;
        out.d = sol.v / sol.t;
    } else if (abs_t >= nu) {
        out.kind = StepCase::LargeA;
        out.d = sol.v / sol.t;
    } else {
        out.kind = StepCase::LargeB;
        const double s = -g.dot(sol.v) >= 0.0 ? 1.0 : -1.0;
        out.d = s * sol.v;
    }
    return out;
}

} // namespace hsodm
