#include "hsodm/solver.hpp"

#include "hsodm/lanczos.hpp"

#include "json.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

namespace hsodm {

std::string_view to_string(SolverStatus s) {
    switch (s) {
    case SolverStatus::SospCertified: return "sosp_certified";
    case SolverStatus::GradientConverged: return "gradient_converged";
    case SolverStatus::MaxIters: return "max_iters";
    case SolverStatus::LineSearchStall: return "line_search_stall";
    case SolverStatus::NumericalError: return "numerical_error";
    }
    return "?";
}

std::string_view to_string(StepsizeRule s) {
    return s == StepsizeRule::FixedRadius ? "fixed_radius" : "backtracking";
}

std::string_view to_string(LocalPhase p) {
    return p == LocalPhase::Stop ? "stop" : "continue_delta_zero";
}

void SolverConfig::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(what);
    };
    need(epsilon > 0.0 && std::isfinite(epsilon), "epsilon must be positive");
    need(!delta || (*delta >= 0.0 && std::isfinite(*delta)), "delta must be nonnegative");
    need(!radius || (*radius > 0.0 && std::isfinite(*radius)), "radius must be positive");
    need(!nu || (*nu > 0.0 && *nu < 0.5), "nu must lie in (0, 1/2)");
    if (mode == SolveMode::Inexact)
        need(!nu || (*nu > 0.25 && *nu < 0.5), "inexact mode requires nu in (1/4, 1/2)");
    need(beta > 0.0 && beta < 1.0, "beta must lie in (0, 1)");
    need(gamma_ls > 0.0, "gamma_ls must be positive");
    need(!max_ls_trials || *max_ls_trials >= 0, "max_ls_trials must be nonnegative");
    need(!e_k || *e_k > 0.0, "e_k must be positive");
    need(failure_prob > 0.0 && failure_prob < 1.0, "failure probability must lie in (0, 1)");
    need(!psi || *psi > 0.0, "psi must be positive");
    need(j_min >= 0, "j_min must be nonnegative");
    need(max_outer_iters >= 0, "max_outer_iters must be nonnegative");
    need(max_local_iters >= 0, "max_local_iters must be nonnegative");
    need(local_gtol > 0.0, "local_gtol must be positive");
    need(dense_threshold >= 1, "dense_threshold must be positive");
    need(!gtol || *gtol > 0.0, "gtol must be positive");
    need(cert_grad_const > 0.0 && cert_curv_const > 0.0, "certification constants must be positive");
}

int line_search_cap(double delta, double nu, double lipschitz, double gamma_ls, double beta) {
    if (!(delta > 0.0) || !(nu > 0.0) || !(lipschitz >= 0.0) || !(gamma_ls > 0.0) || !(beta > 0.0 && beta < 1.0))
        throw ConfigError("line_search_cap: invalid arguments");
    const double ratio = 3.0 * delta * nu / (lipschitz + gamma_ls);
    const double j = std::ceil(std::log(ratio) / std::log(beta));
    return static_cast<int>(std::max(0.0, j));
}

ResolvedParams resolve_params(const SolverConfig& config, const ObjectiveProblem& problem) {
    config.validate();
    ResolvedParams p;
    p.epsilon = config.epsilon;
    const double se = std::sqrt(config.epsilon);
    p.delta = config.delta.value_or(se);
    p.lipschitz = problem.constants.hessian_lipschitz;
    p.hessian_bound = problem.constants.hessian_bound;
    if (config.radius) {
        p.radius = *config.radius;
    } else if (p.lipschitz && *p.lipschitz > 0.0) {
        p.radius = 2.0 * se / *p.lipschitz;
    } else {
        p.radius = se;
    }
    p.nu = config.nu.value_or(config.mode == SolveMode::Exact ? 0.01 : 0.3);
    if (config.max_ls_trials) {
        p.ls_cap = *config.max_ls_trials;
    } else if (p.lipschitz && p.delta > 0.0) {
        p.ls_cap = line_search_cap(p.delta, p.nu, *p.lipschitz, config.gamma_ls, config.beta);
    } else {
        p.ls_cap = 60;
    }
    return p;
}

bool SolveResult::success(double gtol) const {
    if (status == SolverStatus::NumericalError || status == SolverStatus::LineSearchStall) return false;
    return std::isfinite(grad_norm) && grad_norm <= gtol;
}

double fixed_radius_stepsize(const Vector& d, double radius) {
    if (!(radius > 0.0)) throw ConfigError("fixed_radius_stepsize: radius must be positive");
    const double nd = d.norm();
    if (!(nd > 0.0)) throw DomainError("fixed_radius_stepsize: zero direction");
    return radius / nd;
}

LineSearchResult backtracking_line_search(Evaluator& eval, const Vector& x, double fx, const Vector& d,
                                          double beta, double gamma_ls, int j_cap) {
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("backtracking_line_search: beta must lie in (0, 1)");
    if (!(gamma_ls > 0.0)) throw ConfigError("backtracking_line_search: gamma_ls must be positive");
    const double nd = d.norm();
    if (!(nd > 0.0)) throw DomainError("backtracking_line_search: zero direction");
    LineSearchResult out;
    double eta = 1.0;
    for (int j = 0; j <= j_cap; ++j, eta *= beta) {
        double ft;
        try {
            ft = eval.value(x + eta * d);
        } catch (const EvaluationError&) {
            continue;
        } catch (const DomainError&) {
            continue; // trial point overflowed to a non-finite coordinate
        }
        const double decrease = fx - ft;
        if (decrease >= gamma_ls * eta * eta * eta * nd * nd * nd / 6.0) {
            out.eta = eta;
            out.trials = j;
            out.decrease = decrease;
            out.f_new = ft;
            return out;
        }
    }
    out.stalled = true;
    out.trials = j_cap;
    out.eta = 0.0;
    out.f_new = fx;
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t k) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void add_flag(std::string& flags, std::string_view f) {
    if (!flags.empty()) flags += ';';
    flags += f;
}

struct CurvatureEstimate {
    double value = 0.0;
    Vector vector;
    std::string method;
};

CurvatureEstimate estimate_lambda_min(Evaluator& eval, const Vector& x, const SolverConfig& config,
                                      std::uint64_t seed) {
    const Index n = eval.dimension();
    CurvatureEstimate out;
    if (config.mode == SolveMode::Exact && eval.problem().has_hessian() && n <= config.dense_threshold) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(eval.hessian(x));
        if (es.info() != Eigen::Success) throw NumericalError("Hessian eigensolver did not converge");
        out.value = es.eigenvalues()(0);
        out.vector = es.eigenvectors().col(0);
        out.method = "dense";
        return out;
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    Vector q(n);
    for (Index i = 0; i < n; ++i) q(i) = nd(rng);
    InexactBudget b;
    b.j_max = static_cast<int>(n);
    b.j_min = static_cast<int>(std::min<Index>(n, 20));
    const SubproblemSolution s = lanczos_leftmost(eval.hessian_operator(x, false), q, b, 1e-10, seed);
    out.value = -s.dual;
    out.vector = s.stacked();
    out.method = "lanczos";
    return out;
}

} // namespace

Certificate small_step_certify(Evaluator& eval, const Vector& x_next, const Vector& g_next,
                               const ResolvedParams& params, const SolverConfig& config,
                               const SubproblemSolution& sol, double grad_norm_k,
                               std::optional<double> hessian_bound_estimate) {
    Certificate c;
    const double eps = params.epsilon;
    const double delta = params.delta;
    const double r = params.radius;
    c.grad_norm = g_next.norm();
    if (params.lipschitz && params.hessian_bound) {
        const double m = *params.lipschitz;
        const double uh = *params.hessian_bound;
        c.grad_bound = 2.0 * (uh + delta) * r * r * r + 0.5 * m * r * r + delta * r;
        c.curvature_bound = -(2.0 * (uh + delta) * r * r + m * r + delta);
        c.constants_known = true;
        // A Ritz pair satisfies (H + gamma I) v + t g = r instead of 0, so g + H d
        // carries the extra term r / t.
        if (sol.mode == SolveMode::Inexact && std::abs(sol.t) > 0.0 && sol.residual.size() > 1)
            c.grad_bound += sol.residual.head(sol.residual.size() - 1).norm() / std::abs(sol.t);
    } else {
        c.grad_bound = config.cert_grad_const * eps;
        c.curvature_bound = -config.cert_curv_const * std::sqrt(eps);
    }
    c.grad_ok = c.grad_norm <= c.grad_bound;
    const CurvatureEstimate est = estimate_lambda_min(eval, x_next, config, mix_seed(config.seed, 0xc0ffee));
    c.lambda_min = est.value;
    c.method = est.method;
    c.curvature_ok = c.lambda_min >= c.curvature_bound;
    if (sol.mode == SolveMode::Inexact) {
        const double uh = params.hessian_bound.value_or(hessian_bound_estimate.value_or(0.0));
        c.inexact_bound = -2.0 * delta - 2.0 * grad_norm_k * r - (uh + sol.dual) * r * r;
    }
    return c;
}

namespace {

class Driver {
public:
    Driver(const ObjectiveProblem& problem, const SolverConfig& config, bool start_local)
        : problem_(problem), config_(config), eval_(problem), start_local_(start_local) {
        params_ = resolve_params(config_, problem_);
        if (config_.mode == SolveMode::Exact) {
            if (!problem_.has_hessian())
                throw CapabilityError("exact mode needs a dense Hessian; problem '" + problem_.name +
                                      "' only provides Hessian-vector products (use inexact mode)");
            if (problem_.dimension > config_.dense_threshold)
                throw ConfigError("exact mode: dimension exceeds the dense threshold; use inexact mode");
        }
        result_.params = params_;
        result_.problem = problem_.name;
        result_.solver = config_.mode == SolveMode::Exact ? "hsodm" : "hsodm-hvp";
    }

    SolveResult run(const Vector& x1) {
        const auto start = Clock::now();
        if (x1.size() != problem_.dimension) throw DomainError("starting point has the wrong dimension");
        x_ = x1;
        try {
            f_ = eval_.value(x_);
            g_ = eval_.gradient(x_);
            loop();
        } catch (const NumericalError& e) {
            result_.status = SolverStatus::NumericalError;
            result_.message = e.what();
        } catch (const EvaluationError& e) {
            result_.status = SolverStatus::NumericalError;
            result_.message = e.what();
        }
        result_.x = x_;
        result_.f = f_;
        result_.grad_norm = g_.size() ? g_.norm() : std::numeric_limits<double>::quiet_NaN();
        result_.evals = eval_.counters();
        result_.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
        return std::move(result_);
    }

private:
    enum class Outcome { Continue, Stop };

    double mono_tol(double f) const { return 1e-14 * (1.0 + std::abs(f)); }

    HessianOperator hessian_at(const Vector& x) {
        if (config_.mode == SolveMode::Exact) return HessianOperator(eval_.hessian(x));
        return HessianOperator(eval_.hessian_operator(x, false), problem_.dimension);
    }

    SubproblemSolution solve(const HomogeneousSystem& F, double e_k, int j_min, std::uint64_t seed) {
        if (config_.mode == SolveMode::Exact) return solve_exact(F, config_.dense_threshold);
        InexactOptions o;
        o.e_k = e_k;
        o.j_min = j_min;
        o.failure_prob = config_.failure_prob;
        o.epsilon = params_.epsilon;
        o.psi = config_.psi;
        o.hessian_bound = params_.hessian_bound;
        o.seed = seed;
        InexactDiagnostics d;
        SubproblemSolution s = solve_inexact(F, o, &d);
        uh_estimate_ = std::max(uh_estimate_, d.budget.norm_estimate);
        return s;
    }

    std::optional<double> dist(const Vector& x) const {
        if (!problem_.optimum) return std::nullopt;
        return (x - problem_.optimum->x).norm();
    }

    void push(IterationRecord rec) {
        if (config_.record_trace) result_.trace.push_back(std::move(rec));
    }

    // Tracks the stagnation guard; returns true when the run should end.
    bool stagnating(double f_before, double f_after) {
        if (f_before - f_after < 1e-16 * (1.0 + std::abs(f_after)))
            ++stagnant_;
        else
            stagnant_ = 0;
        return stagnant_ >= 10;
    }

    void loop() {
        bool local = start_local_;
        bool local_allowed = start_local_ || config_.local_phase == LocalPhase::ContinueWithDeltaZero;
        bool certified = false;
        while (true) {
            const double gn = g_.norm();
            if (config_.gtol && gn <= *config_.gtol && !local) {
                result_.status = certified ? SolverStatus::SospCertified : SolverStatus::GradientConverged;
                return;
            }
            if (local) {
                if (gn <= config_.local_gtol) {
                    result_.status = certified ? SolverStatus::SospCertified : SolverStatus::GradientConverged;
                    return;
                }
                if (result_.local_iterations >= config_.max_local_iters) {
                    result_.status = certified ? SolverStatus::SospCertified : SolverStatus::MaxIters;
                    return;
                }
                const LocalOutcome lo = local_step();
                if (lo == LocalOutcome::AtPrecision) {
                    result_.status = certified ? SolverStatus::SospCertified : SolverStatus::GradientConverged;
                    result_.message = "local phase: step vanished at working precision";
                    return;
                }
                if (lo == LocalOutcome::Fallback) {
                    local = false;
                    local_allowed = false;
                    certified = false;
                }
                continue;
            }
            if (result_.iterations >= config_.max_outer_iters) {
                result_.status = SolverStatus::MaxIters;
                return;
            }
            ++result_.iterations;
            const double f_before = f_;
            bool now_certified = false;
            if (global_step(now_certified) == Outcome::Stop) return;
            if (now_certified) {
                certified = true;
                result_.status = SolverStatus::SospCertified;
                if (!local_allowed) return;
                local = true;
                continue;
            }
            if (stagnating(f_before, f_)) {
                result_.stagnated = true;
                result_.status = SolverStatus::MaxIters;
                result_.message = "stagnation: no decrease in 10 consecutive iterations";
                return;
            }
        }
    }

    enum class LocalOutcome { Moved, Fallback, AtPrecision };

    // One delta = 0 iteration. Fallback hands control back to the global loop;
    // AtPrecision means the step no longer changes x.
    LocalOutcome local_step() {
        const EvalCounters before = eval_.counters();
        const Index n = problem_.dimension;
        const std::uint64_t seed = mix_seed(config_.seed, 1000000 + result_.local_iterations);
        const HomogeneousSystem F = homogenize(hessian_at(x_), g_, 0.0);
        const SubproblemSolution sol = solve(F, 1e-14, static_cast<int>(n) + 1, seed);
        IterationRecord rec;
        rec.k = result_.iterations + result_.local_iterations + 1;
        rec.phase = "local";
        rec.kind = "local";
        rec.f = f_;
        rec.grad_norm = g_.norm();
        rec.t = sol.t;
        rec.dual = sol.dual;
        rec.lanczos_iters = sol.lanczos_iterations;
        rec.residual_norm = sol.residual_norm();
        rec.seed = seed;
        rec.delta = 0.0;
        rec.radius = params_.radius;
        if (std::abs(sol.t) <= 1e-13) {
            rec.f_next = f_;
            add_flag(rec.flags, "local_fallback");
            rec.evals = eval_.counters() - before;
            push(std::move(rec));
            return LocalOutcome::Fallback;
        }
        const Vector d = sol.v / sol.t;
        const Vector x_next = x_ + d;
        if (x_next == x_) {
            rec.f_next = f_;
            add_flag(rec.flags, "at_precision");
            rec.evals = eval_.counters() - before;
            push(std::move(rec));
            return LocalOutcome::AtPrecision;
        }
        double f_next;
        try {
            f_next = eval_.value(x_next);
        } catch (const EvaluationError&) {
            f_next = std::numeric_limits<double>::infinity();
        }
        if (!(f_next <= f_ + mono_tol(f_))) {
            rec.f_next = f_;
            add_flag(rec.flags, "local_fallback");
            rec.evals = eval_.counters() - before;
            push(std::move(rec));
            return LocalOutcome::Fallback;
        }
        x_ = x_next;
        f_ = f_next;
        g_ = eval_.gradient(x_);
        ++result_.local_iterations;
        rec.f_next = f_;
        rec.d_norm = d.norm();
        rec.eta = 1.0;
        rec.dist_to_opt = dist(x_);
        rec.evals = eval_.counters() - before;
        push(std::move(rec));
        return LocalOutcome::Moved;
    }

    // Moves along d with the configured stepsize rule. Returns false on a stall.
    bool large_step(const Vector& d, IterationRecord& rec) {
        if (config_.stepsize == StepsizeRule::FixedRadius) {
            const double eta = fixed_radius_stepsize(d, params_.radius);
            const Vector x_next = x_ + eta * d;
            double f_next;
            try {
                f_next = eval_.value(x_next);
            } catch (const EvaluationError&) {
                f_next = std::numeric_limits<double>::infinity();
            }
            if (f_next <= f_ + mono_tol(f_)) {
                rec.eta = eta;
                x_ = x_next;
                f_ = f_next;
                return true;
            }
            // The radius was too long for the local curvature (M invalid or
            // unknown): shorten it rather than break monotonicity.
            add_flag(rec.flags, "radius_backtrack");
            const LineSearchResult ls =
                backtracking_line_search(eval_, x_, f_, eta * d, config_.beta, config_.gamma_ls, params_.ls_cap);
            rec.ls_trials = ls.trials;
            if (ls.stalled) return false;
            rec.eta = eta * ls.eta;
            x_ = x_ + rec.eta * d;
            f_ = ls.f_new;
            return true;
        }
        const LineSearchResult ls =
            backtracking_line_search(eval_, x_, f_, d, config_.beta, config_.gamma_ls, params_.ls_cap);
        rec.ls_trials = ls.trials;
        if (ls.stalled) return false;
        rec.eta = ls.eta;
        x_ = x_ + ls.eta * d;
        f_ = ls.f_new;
        return true;
    }

    Outcome stall(IterationRecord& rec, const EvalCounters& before) {
        rec.f_next = f_;
        rec.evals = eval_.counters() - before;
        push(std::move(rec));
        result_.status = SolverStatus::LineSearchStall;
        result_.message = "line search exceeded its trial cap";
        return Outcome::Stop;
    }

    Outcome global_step(bool& certified) {
        const EvalCounters before = eval_.counters();
        const Index n = problem_.dimension;
        const double eps = params_.epsilon;
        const std::uint64_t seed = mix_seed(config_.seed, static_cast<std::uint64_t>(result_.iterations));
        const HessianOperator hop = hessian_at(x_);
        double delta = params_.delta;
        const double e_k = config_.e_k.value_or(std::sqrt(eps));

        SubproblemSolution sol = solve(homogenize(hop, g_, delta), e_k, config_.j_min, seed);
        Direction dir = direction_from_solution(sol, g_, params_.nu, params_.radius);

        IterationRecord rec;
        rec.k = result_.iterations;
        rec.f = f_;
        rec.grad_norm = g_.norm();
        rec.seed = seed;
        rec.radius = params_.radius;

        if (config_.mode == SolveMode::Inexact && dir.kind == StepCase::SmallValue &&
            sol.residual.head(n).norm() > eps) {
            const double uh = params_.hessian_bound.value_or(uh_estimate_);
            const double r = params_.radius;
            delta = 3.0 * std::sqrt(eps) + 2.0 * g_.norm() * r + (uh + sol.dual) * r * r;
            const int lanczos_first = sol.lanczos_iterations;
            sol = solve(homogenize(hop, g_, delta), eps * eps * eps, static_cast<int>(n) + 1, seed + 1);
            sol.lanczos_iterations += lanczos_first;
            dir = direction_from_solution(sol, g_, params_.nu, params_.radius);
            add_flag(rec.flags, "delta_bump");
            if (dir.kind == StepCase::SmallValue && sol.residual.head(n).norm() > eps)
                throw NumericalError("delta bump did not reduce the Ritz residual below epsilon");
        }

        rec.t = sol.t;
        rec.dual = sol.dual;
        rec.kind = std::string(to_string(dir.kind));
        rec.lanczos_iters = sol.lanczos_iterations;
        rec.residual_norm = sol.residual_norm();
        rec.delta = delta;
        rec.d_norm = dir.d.norm();

        if (dir.kind == StepCase::SmallValue) {
            const Vector x_next = x_ + dir.d;
            double f_next;
            try {
                f_next = eval_.value(x_next);
            } catch (const EvaluationError&) {
                f_next = std::numeric_limits<double>::infinity();
            }
            if (f_next <= f_ + mono_tol(f_)) {
                const Vector g_next = eval_.gradient(x_next);
                ResolvedParams p = params_;
                p.delta = delta;
                const Certificate cert = small_step_certify(eval_, x_next, g_next, p, config_, sol, g_.norm(),
                                                            uh_estimate_ > 0.0 ? std::optional<double>(uh_estimate_)
                                                                               : std::nullopt);
                x_ = x_next;
                f_ = f_next;
                g_ = g_next;
                rec.eta = 1.0;
                if (cert.certified()) {
                    result_.certificate = cert;
                    certified = true;
                    rec.f_next = f_;
                    rec.dist_to_opt = dist(x_);
                    rec.evals = eval_.counters() - before;
                    push(std::move(rec));
                    return Outcome::Continue;
                }
                add_flag(rec.flags, "uncertified");
                if (!cert.curvature_ok) {
                    // Escape along the leftmost Hessian eigenvector that the
                    // certification found.
                    const CurvatureEstimate est = estimate_lambda_min(eval_, x_, config_, seed + 2);
                    if (est.value < 0.0) {
                        Vector u = est.vector.normalized();
                        if (-g_.dot(u) < 0.0) u = -u;
                        add_flag(rec.flags, "negcurv");
                        rec.d_norm = u.norm();
                        if (!large_step(u, rec)) return stall(rec, before);
                        g_ = eval_.gradient(x_);
                    }
                }
                rec.f_next = f_;
                rec.dist_to_opt = dist(x_);
                rec.evals = eval_.counters() - before;
                push(std::move(rec));
                return Outcome::Continue;
            }
            // The unit step increased f; backtrack along it instead.
            add_flag(rec.flags, "small_backtrack");
            const LineSearchResult ls = backtracking_line_search(eval_, x_, f_, dir.d, config_.beta,
                                                                 config_.gamma_ls, params_.ls_cap);
            rec.ls_trials = ls.trials;
            if (ls.stalled) return stall(rec, before);
            rec.eta = ls.eta;
            x_ = x_ + ls.eta * dir.d;
            f_ = ls.f_new;
            g_ = eval_.gradient(x_);
            rec.f_next = f_;
            rec.dist_to_opt = dist(x_);
            rec.evals = eval_.counters() - before;
            push(std::move(rec));
            return Outcome::Continue;
        }

        if (!large_step(dir.d, rec)) return stall(rec, before);
        g_ = eval_.gradient(x_);
        rec.f_next = f_;
        rec.dist_to_opt = dist(x_);
        rec.evals = eval_.counters() - before;
        push(std::move(rec));
        return Outcome::Continue;
    }

    const ObjectiveProblem& problem_;
    SolverConfig config_;
    Evaluator eval_;
    bool start_local_;
    ResolvedParams params_;
    SolveResult result_;
    Vector x_, g_;
    double f_ = 0.0;
    double uh_estimate_ = 0.0;
    int stagnant_ = 0;
};

} // namespace

SolveResult hsodm_solve(const ObjectiveProblem& problem, const Vector& x1, const SolverConfig& config) {
    Driver d(problem, config, false);
    return d.run(x1);
}

SolveResult inexact_hsodm_solve(const ObjectiveProblem& problem, const Vector& x1, const SolverConfig& config) {
    SolverConfig c = config;
    c.mode = SolveMode::Inexact;
    Driver d(problem, c, false);
    return d.run(x1);
}

SolveResult local_phase_solve(const ObjectiveProblem& problem, const Vector& x_start, const SolverConfig& config) {
    Driver d(problem, config, true);
    return d.run(x_start);
}

// ---------------------------------------------------------------------------
// Export

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json counters_json(const EvalCounters& c) {
    return {{"n_f", c.n_f}, {"n_g", c.n_g}, {"n_H", c.n_H}, {"n_hvp", c.n_hvp}};
}

// JSON has no representation for inf/nan; emit null instead.
nlohmann::json num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

} // namespace

std::string trace_csv_header() {
    return "k,phase,f,f_next,grad_norm,t,dual,d_norm,eta,case,ls_trials,lanczos_iters,n_f,n_g,n_H,n_hvp,"
           "residual_norm,seed,delta,radius,flags,dist_to_opt,rho";
}

std::string trace_csv(const SolveResult& result) {
    std::ostringstream os;
    os << trace_csv_header() << '\n';
    for (const IterationRecord& r : result.trace) {
        os << r.k << ',' << r.phase << ',' << fmt_double(r.f) << ',' << fmt_double(r.f_next) << ','
           << fmt_double(r.grad_norm) << ',' << fmt_double(r.t) << ',' << fmt_double(r.dual) << ','
           << fmt_double(r.d_norm) << ',' << fmt_double(r.eta) << ',' << r.kind << ',' << r.ls_trials << ','
           << r.lanczos_iters << ',' << r.evals.n_f << ',' << r.evals.n_g << ',' << r.evals.n_H << ','
           << r.evals.n_hvp << ',' << fmt_double(r.residual_norm) << ',' << r.seed << ','
           << fmt_double(r.delta) << ',' << fmt_double(r.radius) << ',' << r.flags << ','
           << (r.dist_to_opt ? fmt_double(*r.dist_to_opt) : std::string()) << ','
           << (r.rho ? fmt_double(*r.rho) : std::string()) << '\n';
    }
    return os.str();
}

std::string result_to_json(const SolveResult& result, bool include_trace) {
    nlohmann::json j;
    j["solver"] = result.solver;
    j["problem"] = result.problem;
    j["status"] = std::string(to_string(result.status));
    j["message"] = result.message;
    j["x"] = std::vector<double>(result.x.data(), result.x.data() + result.x.size());
    j["f"] = num(result.f);
    j["grad_norm"] = num(result.grad_norm);
    j["iterations"] = result.iterations;
    j["local_iterations"] = result.local_iterations;
    j["stagnated"] = result.stagnated;
    j["wall_time"] = result.wall_time;
    j["evals"] = counters_json(result.evals);
    j["params"] = {{"epsilon", result.params.epsilon},
                   {"delta", result.params.delta},
                   {"radius", result.params.radius},
                   {"nu", result.params.nu},
                   {"M", result.params.lipschitz ? nlohmann::json(*result.params.lipschitz) : nlohmann::json()},
                   {"U_H", result.params.hessian_bound ? nlohmann::json(*result.params.hessian_bound)
                                                       : nlohmann::json()},
                   {"ls_cap", result.params.ls_cap}};
    if (result.certificate) {
        const Certificate& c = *result.certificate;
        j["certificate"] = {{"grad_norm", num(c.grad_norm)},
                            {"grad_bound", num(c.grad_bound)},
                            {"grad_ok", c.grad_ok},
                            {"lambda_min", num(c.lambda_min)},
                            {"curvature_bound", num(c.curvature_bound)},
                            {"curvature_ok", c.curvature_ok},
                            {"inexact_bound", c.inexact_bound ? num(*c.inexact_bound) : nlohmann::json()},
                            {"constants_known", c.constants_known},
                            {"method", c.method}};
    } else {
        j["certificate"] = nullptr;
    }
    if (include_trace) {
        nlohmann::json tr = nlohmann::json::array();
        for (const IterationRecord& r : result.trace) {
            tr.push_back({{"k", r.k},
                          {"phase", r.phase},
                          {"f", num(r.f)},
                          {"f_next", num(r.f_next)},
                          {"grad_norm", num(r.grad_norm)},
                          {"t", num(r.t)},
                          {"dual", num(r.dual)},
                          {"d_norm", num(r.d_norm)},
                          {"eta", num(r.eta)},
                          {"case", r.kind},
                          {"ls_trials", r.ls_trials},
                          {"lanczos_iters", r.lanczos_iters},
                          {"evals", counters_json(r.evals)},
                          {"residual_norm", num(r.residual_norm)},
                          {"seed", r.seed},
                          {"delta", num(r.delta)},
                          {"radius", num(r.radius)},
                          {"flags", r.flags},
                          {"dist_to_opt", r.dist_to_opt ? num(*r.dist_to_opt) : nlohmann::json()},
                          {"rho", r.rho ? num(*r.rho) : nlohmann::json()}});
        }
        j["trace"] = std::move(tr);
    }
    return j.dump(2);
}

} // namespace hsodm
