#pragma once

#include "hsodm/types.hpp"

namespace hsodm {

/// Eigen-decomposition of a symmetric tridiagonal matrix given by its diagonal
/// and off-diagonal (offdiag(i) couples rows i and i+1).
struct TridiagonalEigen {
    Vector values;  // ascending
    Matrix vectors; // column i pairs with values(i); empty when not requested
};

/// Implicit QL with Wilkinson-type shifts. Throws NumericalError after 60
/// sweeps on one eigenvalue.
TridiagonalEigen tridiagonal_eigen(const Vector& diag, const Vector& offdiag, bool want_vectors);

struct LeftmostPair {
    double value = 0.0;
    Vector vector; // unit norm
};

/// Smallest eigenvalue by QL (values only) and its eigenvector by inverse
/// iteration. Falls back to the full QL decomposition when inverse iteration
/// does not reach a residual of 1e-12 * ||T||.
LeftmostPair tridiagonal_leftmost(const Vector& diag, const Vector& offdiag);

} // namespace hsodm
