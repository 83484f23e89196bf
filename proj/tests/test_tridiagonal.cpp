#include "doctest.h"

#include "hsodm/tridiagonal.hpp"

#include <random>

using namespace hsodm;

namespace {

Matrix assemble(const Vector& d, const Vector& e) {
    const Index n = d.size();
    Matrix t = Matrix::Zero(n, n);
    t.diagonal() = d;
    for (Index i = 0; i + 1 < n; ++i) t(i, i + 1) = t(i + 1, i) = e(i);
    return t;
}

} // namespace

TEST_CASE("tridiagonal eigenvalues match the dense oracle") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 200; ++k) {
        const Index n = 1 + k % 40;
        Vector d(n), e(n - 1);
        for (Index i = 0; i < n; ++i) d(i) = nd(rng);
        for (Index i = 0; i + 1 < n; ++i) e(i) = (k % 5 == 0 && i % 3 == 0) ? 0.0 : nd(rng);
        const Matrix t = assemble(d, e);
        Eigen::SelfAdjointEigenSolver<Matrix> es(t);
        const TridiagonalEigen mine = tridiagonal_eigen(d, e, true);
        CHECK((mine.values - es.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, t.norm()));
        CHECK((t * mine.vectors - mine.vectors * mine.values.asDiagonal()).norm() <= 1e-11 * std::max(1.0, t.norm()));

        const LeftmostPair lp = tridiagonal_leftmost(d, e);
        CHECK(lp.value == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-12));
        CHECK(std::abs(lp.vector.norm() - 1.0) <= 1e-12);
        CHECK((t * lp.vector - lp.value * lp.vector).norm() <= 1e-12 * std::max(1.0, t.norm()));
    }
}

TEST_CASE("tridiagonal leftmost with clustered and repeated eigenvalues") {
    // The (1,-2,1) Laplacian of size 50 has eigenvalues 2 - 2cos(k pi / 51),
    // tightly clustered near 0 after negation.
    const Index n = 50;
    Vector d = Vector::Constant(n, 2.0), e = Vector::Constant(n - 1, -1.0);
    const LeftmostPair lp = tridiagonal_leftmost(d, e);
    CHECK(lp.value == doctest::Approx(2.0 - 2.0 * std::cos(M_PI / 51.0)).epsilon(1e-10));

    // Two decoupled identical blocks: the leftmost eigenvalue is double.
    Vector d2(4), e2(3);
    d2 << 1, 1, 1, 1;
    e2 << 2, 0, 2;
    const LeftmostPair lp2 = tridiagonal_leftmost(d2, e2);
    CHECK(lp2.value == doctest::Approx(-1.0));
    CHECK((assemble(d2, e2) * lp2.vector + lp2.vector).norm() <= 1e-12);
}

TEST_CASE("tridiagonal shape errors") {
    CHECK_THROWS_AS(tridiagonal_eigen(Vector(), Vector(), false), DomainError);
    CHECK_THROWS_AS(tridiagonal_leftmost(Vector::Ones(3), Vector::Ones(3)), DomainError);
}
