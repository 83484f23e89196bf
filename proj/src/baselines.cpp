#include "hsodm/baselines.hpp"

#include "hsodm/homogeneous.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

namespace hsodm {

namespace {

using Clock = std::chrono::steady_clock;

// Positive root tau of ||d + tau p|| = radius, assuming ||d|| <= radius.
double boundary_step(const Vector& d, const Vector& p, double radius) {
    const double a = p.squaredNorm();
    const double b = 2.0 * d.dot(p);
    const double c = std::min(0.0, d.squaredNorm() - radius * radius);
    const double disc = std::sqrt(std::max(0.0, b * b - 4.0 * a * c));
    // Avoid cancellation in the quadratic formula.
    return b <= 0.0 ? (-b + disc) / (2.0 * a) : (-2.0 * c) / (b + disc);
}

std::string fmt_flag(const char* key, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s=%.6g", key, v);
    return buf;
}

} // namespace

SteihaugResult steihaug_cg(const LinearMap& hessian, const Vector& g, double radius, double cg_tol, int max_cg) {
    if (!(radius > 0.0)) throw ConfigError("steihaug_cg: radius must be positive");
    if (max_cg < 1) throw ConfigError("steihaug_cg: max_cg must be positive");
    SteihaugResult out;
    const Index n = g.size();
    out.d = Vector::Zero(n);
    if (g.norm() == 0.0) {
        out.reason = "zero_gradient";
        return out;
    }
    Vector hd = Vector::Zero(n); // H d, updated alongside d
    Vector r = g;
    Vector p = -r;
    double rr = r.squaredNorm();
    out.reason = "max_iters";
    for (int j = 0; j < max_cg; ++j) {
        const Vector hp = hessian(p);
        const double kappa = p.dot(hp);
        ++out.iterations;
        if (kappa <= 0.0) {
            const double tau = boundary_step(out.d, p, radius);
            out.d += tau * p;
            hd += tau * hp;
            out.reason = "negative_curvature";
            break;
        }
        const double alpha = rr / kappa;
        if ((out.d + alpha * p).norm() >= radius) {
            const double tau = boundary_step(out.d, p, radius);
            out.d += tau * p;
            hd += tau * hp;
            out.reason = "boundary";
            break;
        }
        out.d += alpha * p;
        hd += alpha * hp;
        r += alpha * hp;
        const double rr_new = r.squaredNorm();
        if (std::sqrt(rr_new) <= cg_tol) {
            out.reason = "converged";
            break;
        }
        p = -r + (rr_new / rr) * p;
        rr = rr_new;
    }
    out.model_value = g.dot(out.d) + 0.5 * out.d.dot(hd);
    return out;
}

void TrustRegionConfig::validate() const {
    if (!(gtol > 0.0)) throw ConfigError("trust region: gtol must be positive");
    if (max_iters < 0) throw ConfigError("trust region: max_iters must be nonnegative");
    if (!(initial_radius > 0.0) || !(max_radius >= initial_radius))
        throw ConfigError("trust region: need 0 < initial_radius <= max_radius");
    if (!(accept_ratio > 0.0 && accept_ratio < expand_ratio && expand_ratio < 1.0))
        throw ConfigError("trust region: need 0 < accept_ratio < expand_ratio < 1");
    if (!(shrink_factor > 0.0 && shrink_factor < 1.0)) throw ConfigError("trust region: shrink_factor must lie in (0, 1)");
    if (!(expand_factor > 1.0)) throw ConfigError("trust region: expand_factor must exceed 1");
    if (max_cg < 0) throw ConfigError("trust region: max_cg must be nonnegative");
}

void CubicRegConfig::validate() const {
    if (!(gtol > 0.0)) throw ConfigError("cubic: gtol must be positive");
    if (max_iters < 0) throw ConfigError("cubic: max_iters must be nonnegative");
    if (!(min_sigma > 0.0 && min_sigma <= initial_sigma && initial_sigma <= max_sigma))
        throw ConfigError("cubic: need 0 < min_sigma <= initial_sigma <= max_sigma");
    if (!(accept_ratio > 0.0 && accept_ratio < success_ratio && success_ratio < 1.0))
        throw ConfigError("cubic: need 0 < accept_ratio < success_ratio < 1");
}

CubicStep cubic_subproblem(const Matrix& hessian, const Vector& g, double sigma) {
    if (!(sigma > 0.0)) throw ConfigError("cubic_subproblem: sigma must be positive");
    if (hessian.rows() != hessian.cols() || hessian.rows() != g.size())
        throw DomainError("cubic_subproblem: shape mismatch");
    const Index n = g.size();
    Eigen::SelfAdjointEigenSolver<Matrix> es(hessian);
    if (es.info() != Eigen::Success) throw NumericalError("cubic_subproblem: eigensolver did not converge");
    const Vector& lam = es.eigenvalues();
    const Matrix& q = es.eigenvectors();
    Vector gh = q.transpose() * g;
    const double l1 = lam(0);
    const double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());
    const double gnorm = g.norm();
    const double lo = std::max(0.0, -l1);

    CubicStep out;
    auto finish = [&](const Vector& dh, double lambda) {
        out.d = q * dh;
        out.lambda = lambda;
        const double nd = out.d.norm();
        out.model_value = g.dot(out.d) + 0.5 * out.d.dot(hessian * out.d) + sigma * nd * nd * nd / 3.0;
        return out;
    };

    if (gnorm == 0.0 && l1 >= 0.0) return finish(Vector::Zero(n), 0.0);

    // Leftmost eigenspace, up to a relative tolerance.
    Index cluster = 1;
    while (cluster < n && lam(cluster) - l1 <= 1e-12 * scale) ++cluster;
    const bool orthogonal = gh.head(cluster).norm() <= 1e-12 * std::max(1.0, gnorm);

    auto step_at = [&](double lambda, const Vector& gg) {
        Vector dh(n);
        for (Index i = 0; i < n; ++i) {
            const double den = lam(i) + lambda;
            dh(i) = gg(i) == 0.0 ? 0.0 : -gg(i) / den;
        }
        return dh;
    };

    if (l1 < 0.0 && orthogonal) {
        Vector gt = gh;
        gt.head(cluster).setZero();
        const Vector dbar = step_at(lo, gt);
        const double target = lo / sigma;
        if (dbar.norm() <= target) {
            // Hard case: the boundary is reached by adding a leftmost eigenvector component.
            Vector dh = dbar;
            dh(0) += std::sqrt(std::max(0.0, target * target - dbar.squaredNorm()));
            out.hard_case = true;
            return finish(dh, lo);
        }
        gh = gt;
    }

    auto phi = [&](double lambda) { return step_at(lambda, gh).norm() - lambda / sigma; };

    double a = lo;
    double fa = phi(a);
    if (!std::isfinite(fa) || fa <= 0.0) {
        // phi has a pole at lo: move right until it is finite and positive.
        double s = 1e-12 * scale;
        int tries = 0;
        while (true) {
            const double v = phi(lo + s);
            if (std::isfinite(v) && v > 0.0) {
                a = lo + s;
                fa = v;
                break;
            }
            if (++tries > 40) return finish(step_at(lo + s, gh), lo + s);
            s *= 1e-2;
        }
    }
    double b = a + std::max(1.0, std::sqrt(sigma * gnorm));
    double fb = phi(b);
    for (int i = 0; fb >= 0.0; ++i) {
        if (i > 2000 || !std::isfinite(fb)) throw NumericalError("cubic_subproblem: could not bracket the secular root");
        b = a + 2.0 * (b - a);
        fb = phi(b);
    }
    std::uintmax_t max_iter = 200;
    const auto root = boost::math::tools::toms748_solve(phi, a, b, fa, fb,
                                                        boost::math::tools::eps_tolerance<double>(52), max_iter);
    if (max_iter >= 200) throw NumericalError("cubic_subproblem: secular root finder did not converge");
    const double lambda = std::abs(phi(root.first)) <= std::abs(phi(root.second)) ? root.first : root.second;
    return finish(step_at(lambda, gh), lambda);
}

namespace {

// Shared acceptance loop. `propose` fills the step and its predicted decrease
// and returns false when no step could be formed.
template <class Propose, class Update>
SolveResult ratio_loop(const ObjectiveProblem& problem, const Vector& x1, const char* solver, double gtol,
                       int max_iters, bool record_trace, Propose&& propose, Update&& update) {
    problem.validate();
    if (x1.size() != problem.dimension) throw DomainError(std::string(solver) + ": start has wrong dimension");
    const auto start = Clock::now();
    Evaluator eval(problem);
    SolveResult res;
    res.solver = solver;
    res.problem = problem.name;
    res.params.epsilon = gtol;
    Vector x = x1, g;
    double f = std::numeric_limits<double>::quiet_NaN();
    try {
        f = eval.value(x);
        g = eval.gradient(x);
        while (true) {
            const double gn = g.norm();
            if (gn <= gtol) {
                res.status = SolverStatus::GradientConverged;
                break;
            }
            if (res.iterations >= max_iters) {
                res.status = SolverStatus::MaxIters;
                break;
            }
            ++res.iterations;
            const EvalCounters before = eval.counters();
            IterationRecord rec;
            rec.k = res.iterations;
            rec.f = f;
            rec.grad_norm = gn;
            Vector d;
            double pred = 0.0;
            propose(eval, x, g, d, pred, rec);
            rec.d_norm = d.norm();

            double rho = -std::numeric_limits<double>::infinity();
            double f_trial = f;
            if (pred > 0.0 && rec.d_norm > 0.0) {
                try {
                    f_trial = eval.value(x + d);
                    rho = (f - f_trial) / pred;
                } catch (const EvaluationError&) {
                } catch (const DomainError&) {
                }
            }
            rec.rho = rho;
            const bool accepted = update(rho, rec);
            if (accepted) {
                x += d;
                f = f_trial;
                g = eval.gradient(x);
                rec.eta = 1.0;
                rec.kind = "accepted";
            } else {
                rec.kind = "rejected";
            }
            rec.f_next = f;
            if (problem.optimum) rec.dist_to_opt = (x - problem.optimum->x).norm();
            rec.evals = eval.counters() - before;
            if (record_trace) res.trace.push_back(std::move(rec));
            if (!update.alive(x)) {
                res.status = SolverStatus::LineSearchStall;
                res.message = update.stall_message();
                break;
            }
        }
    } catch (const NumericalError& e) {
        res.status = SolverStatus::NumericalError;
        res.message = e.what();
    } catch (const EvaluationError& e) {
        res.status = SolverStatus::NumericalError;
        res.message = e.what();
    }
    res.x = x;
    res.f = f;
    res.grad_norm = g.size() ? g.norm() : std::numeric_limits<double>::quiet_NaN();
    res.evals = eval.counters();
    res.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
    return res;
}

struct RadiusUpdate {
    const TrustRegionConfig& c;
    double radius;
    double last_step = 0.0;

    bool operator()(double rho, IterationRecord& rec) {
        rec.radius = radius;
        const bool accepted = rho >= c.accept_ratio;
        if (!accepted)
            radius *= c.shrink_factor;
        else if (rho >= c.expand_ratio && last_step >= (1.0 - 1e-8) * radius)
            radius = std::min(c.max_radius, c.expand_factor * radius);
        return accepted;
    }
    bool alive(const Vector& x) const { return radius > 1e-15 * (1.0 + x.norm()); }
    std::string stall_message() const { return "trust-region radius collapsed"; }
};

struct SigmaUpdate {
    const CubicRegConfig& c;
    double sigma;

    bool operator()(double rho, IterationRecord& rec) {
        rec.flags = fmt_flag("sigma", sigma) + (rec.flags.empty() ? "" : ";" + rec.flags);
        const bool accepted = rho >= c.accept_ratio;
        if (!accepted)
            sigma *= 2.0;
        else if (rho >= c.success_ratio)
            sigma = std::max(c.min_sigma, 0.5 * sigma);
        return accepted;
    }
    bool alive(const Vector&) const { return sigma <= c.max_sigma; }
    std::string stall_message() const { return "cubic regularization weight exceeded its cap"; }
};

} // namespace

SolveResult newton_tr_solve(const ObjectiveProblem& problem, const Vector& x1, const TrustRegionConfig& config) {
    config.validate();
    const Index n = problem.dimension;
    const int max_cg = config.max_cg > 0 ? config.max_cg : static_cast<int>(2 * std::max<Index>(n, 1));
    RadiusUpdate upd{config, config.initial_radius};
    auto propose = [&](Evaluator& eval, const Vector& x, const Vector& g, Vector& d, double& pred,
                       IterationRecord& rec) {
        const LinearMap h = eval.hessian_operator(x, n <= config.dense_threshold);
        const double gn = g.norm();
        const SteihaugResult s = steihaug_cg(h, g, upd.radius, std::min(0.5, std::sqrt(gn)) * gn, max_cg);
        d = s.d;
        pred = -s.model_value;
        upd.last_step = d.norm();
        rec.ls_trials = s.iterations;
        rec.flags = s.reason;
    };
    SolveResult r = ratio_loop(problem, x1, "newton-tr", config.gtol, config.max_iters, config.record_trace,
                               propose, upd);
    r.params.radius = upd.radius;
    return r;
}

SolveResult cubic_reg_solve(const ObjectiveProblem& problem, const Vector& x1, const CubicRegConfig& config) {
    config.validate();
    const Index n = problem.dimension;
    SigmaUpdate upd{config, config.initial_sigma};
    auto propose = [&](Evaluator& eval, const Vector& x, const Vector& g, Vector& d, double& pred,
                       IterationRecord& rec) {
        Matrix h;
        if (problem.has_hessian() && n <= config.dense_threshold)
            h = eval.hessian(x);
        else
            h = HessianOperator(eval.hessian_operator(x, false), n).to_dense();
        const CubicStep s = cubic_subproblem(h, g, upd.sigma);
        d = s.d;
        pred = -s.model_value;
        rec.dual = s.lambda;
        if (s.hard_case) rec.flags = "hard_case";
    };
    return ratio_loop(problem, x1, "cubic", config.gtol, config.max_iters, config.record_trace, propose, upd);
}

} // namespace hsodm
