#include "hsodm/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace hsodm {

namespace {

void check_shapes(const Vector& diag, const Vector& offdiag) {
    if (diag.size() == 0) throw DomainError("tridiagonal: empty matrix");
    if (offdiag.size() + 1 != diag.size())
        throw DomainError("tridiagonal: off-diagonal must have one entry fewer than the diagonal");
}

// d: diagonal, e: e(i) couples i and i+1, e(n-1) = 0 on entry. On exit d holds
// the eigenvalues (unsorted) and z, when given, the accumulated rotations.
void implicit_ql(Vector& d, Vector& e, Matrix* z) {
    const Index n = d.size();
    constexpr double eps = std::numeric_limits<double>::epsilon();
    for (Index l = 0; l < n; ++l) {
        int iter = 0;
        Index m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d(m)) + std::abs(d(m + 1));
                if (std::abs(e(m)) <= eps * dd) break;
            }
            if (m != l) {
                if (++iter > 60) throw NumericalError("tridiagonal QL: too many iterations");
                double g = (d(l + 1) - d(l)) / (2.0 * e(l));
                double r = std::hypot(g, 1.0);
                g = d(m) - d(l) + e(l) / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                Index i;
                bool deflated = false;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e(i);
                    const double b = c * e(i);
                    r = std::hypot(f, g);
                    e(i + 1) = r;
                    if (r == 0.0) {
                        d(i + 1) -= p;
                        e(m) = 0.0;
                        deflated = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d(i + 1) - p;
                    r = (d(i) - g) * s + 2.0 * c * b;
                    p = s * r;
                    d(i + 1) = g + p;
                    g = c * r - b;
                    if (z) {
                        for (Index k = 0; k < z->rows(); ++k) {
                            f = (*z)(k, i + 1);
                            (*z)(k, i + 1) = s * (*z)(k, i) + c * f;
                            (*z)(k, i) = c * (*z)(k, i) - s * f;
                        }
                    }
                    if (i == 0) {
                        --i;
                        break;
                    }
                }
                if (deflated) continue;
                d(l) -= p;
                e(l) = g;
                e(m) = 0.0;
            }
        } while (m != l);
    }
}

// Solves (T - shift I) x = b in place by Gaussian elimination with partial
// pivoting. Tiny pivots are replaced by `floor`.
void shifted_tridiagonal_solve(const Vector& diag, const Vector& offdiag, double shift, double floor,
                               Vector& b) {
    const Index n = diag.size();
    // Row i of U has entries at columns i, i+1, i+2.
    std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0);
    // Working copy of the current row: (a, c) at columns (i, i+1) and the
    // lower neighbour's coefficients.
    for (Index i = 0; i < n; ++i) {
        u0[i] = diag(i) - shift;
        if (i + 1 < n) u1[i] = offdiag(i);
    }
    std::vector<double> lower(n > 0 ? n - 1 : 0);
    for (Index i = 0; i + 1 < n; ++i) lower[i] = offdiag(i);

    for (Index i = 0; i + 1 < n; ++i) {
        // Candidate rows: i (u0[i], u1[i], u2[i]) and i+1 (lower[i], u0[i+1], u1[i+1]).
        if (std::abs(lower[i]) > std::abs(u0[i])) {
            std::swap(u0[i], lower[i]);
            std::swap(u1[i], u0[i + 1]);
            std::swap(u2[i], u1[i + 1]);
            std::swap(b(i), b(i + 1));
        }
        if (std::abs(u0[i]) < floor) u0[i] = std::copysign(floor, u0[i] == 0.0 ? 1.0 : u0[i]);
        const double mult = lower[i] / u0[i];
        u0[i + 1] -= mult * u1[i];
        u1[i + 1] -= mult * u2[i];
        b(i + 1) -= mult * b(i);
    }
    if (std::abs(u0[n - 1]) < floor) u0[n - 1] = std::copysign(floor, u0[n - 1] == 0.0 ? 1.0 : u0[n - 1]);
    for (Index i = n - 1; i >= 0; --i) {
        double acc = b(i);
        if (i + 1 < n) acc -= u1[i] * b(i + 1);
        if (i + 2 < n) acc -= u2[i] * b(i + 2);
        b(i) = acc / u0[i];
    }
}

Vector tridiagonal_apply(const Vector& diag, const Vector& offdiag, const Vector& x) {
    const Index n = diag.size();
    Vector y = diag.cwiseProduct(x);
    for (Index i = 0; i + 1 < n; ++i) {
        y(i) += offdiag(i) * x(i + 1);
        y(i + 1) += offdiag(i) * x(i);
    }
    return y;
}

} // namespace

TridiagonalEigen tridiagonal_eigen(const Vector& diag, const Vector& offdiag, bool want_vectors) {
    check_shapes(diag, offdiag);
    const Index n = diag.size();
    Vector d = diag;
    Vector e = Vector::Zero(n);
    e.head(n - 1) = offdiag;
    Matrix z;
    if (want_vectors) z = Matrix::Identity(n, n);
    implicit_ql(d, e, want_vectors ? &z : nullptr);

    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::sort(order.begin(), order.end(), [&](Index a, Index b) { return d(a) < d(b); });
    TridiagonalEigen out;
    out.values.resize(n);
    if (want_vectors) out.vectors.resize(n, n);
    for (Index k = 0; k < n; ++k) {
        out.values(k) = d(order[static_cast<std::size_t>(k)]);
        if (want_vectors) out.vectors.col(k) = z.col(order[static_cast<std::size_t>(k)]);
    }
    return out;
}

LeftmostPair tridiagonal_leftmost(const Vector& diag, const Vector& offdiag) {
    check_shapes(diag, offdiag);
    const Index n = diag.size();
    LeftmostPair out;
    if (n == 1) {
        out.value = diag(0);
        out.vector = Vector::Ones(1);
        return out;
    }
    const TridiagonalEigen vals = tridiagonal_eigen(diag, offdiag, false);
    out.value = vals.values(0);

    const double scale = std::max(diag.cwiseAbs().maxCoeff() + 2.0 * offdiag.cwiseAbs().maxCoeff(),
                                  std::numeric_limits<double>::min());
    const double floor = std::numeric_limits<double>::epsilon() * scale;
    Vector x = Vector::Ones(n);
    for (Index i = 0; i < n; ++i) x(i) += 1e-3 * static_cast<double>(i % 7); // avoid symmetric starts
    x.normalize();
    double residual = std::numeric_limits<double>::infinity();
    for (int it = 0; it < 4 && residual > 1e-13 * scale; ++it) {
        shifted_tridiagonal_solve(diag, offdiag, out.value, floor, x);
        const double nrm = x.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
        x /= nrm;
        residual = (tridiagonal_apply(diag, offdiag, x) - out.value * x).norm();
    }
    if (residual <= 1e-12 * scale) {
        out.vector = x;
        return out;
    }
    const TridiagonalEigen full = tridiagonal_eigen(diag, offdiag, true);
    out.value = full.values(0);
    out.vector = full.vectors.col(0).normalized();
    return out;
}

} // namespace hsodm
