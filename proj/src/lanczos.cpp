#include "hsodm/lanczos.hpp"

#include "hsodm/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace hsodm {

Matrix KrylovState::tridiagonal() const {
    Matrix t = Matrix::Zero(j, j);
    for (int i = 0; i < j; ++i) {
        t(i, i) = diagonal(i);
        if (i + 1 < j) t(i, i + 1) = t(i + 1, i) = offdiag(i);
    }
    return t;
}

namespace {

Vector gaussian(Index n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = nd(rng);
    return v;
}

// Two passes of classical Gram-Schmidt against the first `cols` columns.
void orthogonalize(Vector& w, const Matrix& q, Index cols) {
    if (cols == 0) return;
    for (int pass = 0; pass < 2; ++pass) {
        const Vector c = q.leftCols(cols).transpose() * w;
        w.noalias() -= q.leftCols(cols) * c;
    }
}

} // namespace

SkewedStart skewed_initial_vector(Index n, double psi, std::uint64_t seed, double failure_prob) {
    if (n < 1) throw ConfigError("skewed_initial_vector: n must be positive");
    if (!(psi > 0.0) || !std::isfinite(psi)) throw ConfigError("skewed_initial_vector: psi must be positive");
    if (!(failure_prob > 0.0 && failure_prob < 1.0))
        throw ConfigError("skewed_initial_vector: failure probability must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    SkewedStart s;
    s.psi = psi;
    s.failure_prob = failure_prob;
    s.seed = seed;
    for (;;) {
        s.draws = gaussian(n + 1, rng);
        Vector q = s.draws;
        q(n) *= psi;
        const double nrm = q.norm();
        if (nrm > 0.0 && std::isfinite(nrm)) {
            s.q1 = q / nrm;
            break;
        }
    }
    s.alpha = std::abs(s.q1(n));
    return s;
}

double default_psi(Index n, double failure_prob, double epsilon) {
    if (!(epsilon > 0.0)) throw ConfigError("default_psi: epsilon must be positive");
    if (!(failure_prob > 0.0 && failure_prob < 1.0)) throw ConfigError("default_psi: p must lie in (0, 1)");
    return 10.0 * std::sqrt(static_cast<double>(n)) / (failure_prob * epsilon * epsilon);
}

int default_norm_iterations(Index dim) {
    return 2 * static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<Index>(dim, 1))))) + 10;
}

double estimate_operator_norm(const LinearMap& apply, Index dim, int iters, std::uint64_t seed) {
    if (dim < 1) throw ConfigError("estimate_operator_norm: dimension must be positive");
    if (iters < 1) throw ConfigError("estimate_operator_norm: need at least one iteration");
    std::mt19937_64 rng(seed);
    Vector x = gaussian(dim, rng);
    x.normalize();
    double est = 0.0;
    for (int k = 0; k < iters; ++k) {
        const Vector fx = apply(x);
        const double lower = fx.norm(); // ||F x|| <= ||F|| for unit x
        est = std::max(est, lower);
        Vector ffx = apply(fx);
        const double nrm = ffx.norm();
        if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
        // The Rayleigh quotient of F^2 also lower-bounds ||F||^2.
        est = std::max(est, std::sqrt(std::max(0.0, x.dot(ffx))));
        x = ffx / nrm;
    }
    if (est == 0.0) est = std::numeric_limits<double>::min();
    return 2.0 * est;
}

int iteration_budget(double norm_est, double e_k, double overlap_est, std::optional<double> gap, int j_min,
                     Index n) {
    if (!(norm_est > 0.0)) throw ConfigError("iteration_budget: norm estimate must be positive");
    if (!(e_k > 0.0)) throw ConfigError("iteration_budget: e_k must be positive");
    if (!(overlap_est > 0.0)) throw ConfigError("iteration_budget: overlap estimate must be positive");
    if (gap && !(*gap > 0.0)) throw ConfigError("iteration_budget: eigengap must be positive");
    if (j_min < 0) throw ConfigError("iteration_budget: j_min must be nonnegative");
    const double e = std::exp(1.0);
    const double cap = static_cast<double>(n) + 2.0;
    double raw;
    if (e_k >= 2.0 * norm_est) {
        // Any unit vector already has a Ritz error below e_k.
        raw = 1.0;
    } else {
        const double lg = std::log(std::max(e, 16.0 * norm_est / (e_k * overlap_est)));
        raw = 1.0 + std::ceil(2.0 * std::sqrt(norm_est / e_k) * lg);
        if (gap) {
            const double lgd = std::log(std::max(e, 8.0 * norm_est / (e_k * overlap_est)));
            raw = std::min(raw, 1.0 + std::ceil(std::sqrt(2.0 * norm_est / *gap) * lgd));
        }
    }
    raw = std::min(raw, cap);
    raw = std::max(raw, static_cast<double>(j_min));
    return static_cast<int>(std::min(raw, std::max(cap, static_cast<double>(j_min))));
}

SubproblemSolution lanczos_leftmost(const LinearMap& apply, const Vector& q1, const InexactBudget& budget,
                                    double ritz_tol, std::uint64_t seed, LanczosDiagnostics* diagnostics) {
    const Index dim = q1.size();
    if (dim < 1) throw ConfigError("lanczos_leftmost: empty start vector");
    if (!(ritz_tol > 0.0)) throw ConfigError("lanczos_leftmost: ritz_tol must be positive");
    if (budget.j_max < 1 || budget.j_max < budget.j_min)
        throw ConfigError("lanczos_leftmost: budget requires 1 <= j_min <= j_max");
    const double q1n = q1.norm();
    if (!(q1n > 0.0) || !std::isfinite(q1n)) throw DomainError("lanczos_leftmost: invalid start vector");

    const Index cap = std::min<Index>(budget.j_max, dim);
    const Index j_min = std::min<Index>(budget.j_min, dim);
    Matrix q(dim, cap);
    q.col(0) = q1 / q1n;
    std::vector<double> alpha, beta;
    alpha.reserve(static_cast<std::size_t>(cap));
    beta.reserve(static_cast<std::size_t>(cap));
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);

    double scale = 0.0;
    Vector xi;
    LeftmostPair ritz;
    double ritz_residual = std::numeric_limits<double>::infinity();
    bool converged = false;
    int restarts = 0;
    Index j = 0;
    Vector prev_fq;
    double max_recurrence = 0.0;

    while (true) {
        Vector w = apply(q.col(j));
        if (!w.allFinite()) throw NumericalError("lanczos_leftmost: operator returned non-finite values");
        const Vector fq = diagnostics ? w : Vector();
        const double a = q.col(j).dot(w);
        w -= a * q.col(j);
        if (j > 0) w -= beta.back() * q.col(j - 1);
        orthogonalize(w, q, j + 1);
        const double b = w.norm();
        alpha.push_back(a);
        scale = std::max({scale, std::abs(a), b, j > 0 ? beta.back() : 0.0});
        ++j;

        Vector diag = Eigen::Map<const Vector>(alpha.data(), j);
        Vector off = Eigen::Map<const Vector>(beta.data(), j - 1);
        ritz = tridiagonal_leftmost(diag, off);
        ritz_residual = std::abs(ritz.vector(j - 1)) * b;
        xi = w;
        if (diagnostics) {
            diagnostics->ritz_history.push_back(ritz.value);
            diagnostics->ritz_residuals.push_back(ritz_residual);
        }

        const bool tiny = b <= 1e-13 * std::max(scale, std::numeric_limits<double>::min());
        const bool may_stop = j >= j_min;
        if (may_stop && (ritz_residual <= ritz_tol || b <= ritz_tol || tiny)) {
            converged = true;
            break;
        }
        if (j >= cap) {
            converged = (j == dim) && tiny;
            break;
        }

        Vector next;
        double coupling = b;
        if (tiny) {
            // Invariant subspace found before j_min steps: continue in a fresh direction.
            ++restarts;
            for (int attempt = 0; attempt < 10; ++attempt) {
                next = gaussian(dim, rng);
                orthogonalize(next, q, j);
                const double nn = next.norm();
                if (nn > 1e-8) {
                    next /= nn;
                    break;
                }
            }
            coupling = 0.0;
        } else {
            next = w / b;
        }
        beta.push_back(coupling);
        q.col(j) = next;
        if (diagnostics) {
            Vector rec = fq - a * q.col(j - 1) - coupling * q.col(j);
            if (j >= 2) rec -= beta[beta.size() - 2] * q.col(j - 2);
            max_recurrence = std::max(max_recurrence, rec.norm());
        }
    }

    Vector y = q.leftCols(j) * ritz.vector;
    Vector residual = ritz.vector(j - 1) * xi;
    y.normalize();
    canonicalize_sign(y, &residual);

    SubproblemSolution sol;
    const Index n = dim - 1;
    sol.v = y.head(n);
    sol.t = y(n);
    sol.dual = -ritz.value;
    sol.residual = residual;
    sol.mode = SolveMode::Inexact;
    sol.lanczos_iterations = static_cast<int>(j);
    sol.budget_exhausted = !converged;
    sol.alpha = std::abs(q(n, 0));
    sol.seed = seed;

    if (diagnostics) {
        KrylovState& st = diagnostics->state;
        st.basis = q.leftCols(j);
        st.diagonal = Eigen::Map<const Vector>(alpha.data(), j);
        st.offdiag = Eigen::Map<const Vector>(beta.data(), j - 1);
        st.xi = xi;
        st.j = static_cast<int>(j);
        st.restarts = restarts;
        diagnostics->max_recurrence_residual = max_recurrence;
    }
    return sol;
}

SubproblemSolution solve_inexact(const HomogeneousSystem& F, const InexactOptions& options,
                                 InexactDiagnostics* diagnostics) {
    if (!(options.e_k > 0.0)) throw ConfigError("solve_inexact: e_k must be positive");
    if (!(options.epsilon > 0.0)) throw ConfigError("solve_inexact: epsilon must be positive");
    if (options.j_min < 0) throw ConfigError("solve_inexact: j_min must be nonnegative");
    const Index n = F.n();
    const double p = options.failure_prob;
    const double psi = options.psi ? *options.psi : default_psi(n, p, options.epsilon);

    SkewedStart start = skewed_initial_vector(n, psi, options.seed, p);
    const double un = start.q1.head(n).norm();
    if (un > 0.0) {
        const double gu = F.gradient().dot(start.q1.head(n)) / un;
        if (start.q1(n) * gu > 0.0) start.q1(n) = -start.q1(n);
    }

    const LinearMap map = F.as_map();
    double norm_est;
    if (options.hessian_bound) {
        norm_est = std::max(*options.hessian_bound, F.delta()) + F.gradient().norm();
    } else {
        norm_est = estimate_operator_norm(map, F.dim(), default_norm_iterations(F.dim()), options.seed + 1);
    }
    norm_est = std::max(norm_est, std::numeric_limits<double>::min());

    InexactBudget budget;
    budget.e_k = options.e_k;
    budget.norm_estimate = norm_est;
    budget.eigengap = options.eigengap;
    const double eps = options.epsilon;
    const double overlap = std::max(p * p * p * eps * eps * eps * eps / static_cast<double>(n),
                                    std::numeric_limits<double>::min());
    budget.j_max = iteration_budget(norm_est, options.e_k, overlap, options.eigengap, options.j_min, n);
    budget.j_min = std::min(options.j_min, budget.j_max);
    budget.j_max = std::max(budget.j_max, 1);

    const double tol = options.ritz_tol ? *options.ritz_tol : options.e_k;
    SubproblemSolution sol = lanczos_leftmost(map, start.q1, budget, tol, options.seed + 2,
                                              diagnostics ? &diagnostics->lanczos : nullptr);
    sol.seed = options.seed;
    if (diagnostics) {
        diagnostics->start = start;
        diagnostics->budget = budget;
    }
    return sol;
}

} // namespace hsodm
