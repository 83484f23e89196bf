#include "hsodm/options.hpp"

#include <charconv>
#include <functional>
#include <limits>
#include <optional>
#include <type_traits>
#include <map>

namespace hsodm {

double parse_double(std::string_view text, std::string_view what) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw ConfigError(std::string(what) + ": expected a number, got '" + std::string(text) + "'");
    return v;
}

long long parse_integer(std::string_view text, std::string_view what) {
    long long v = 0;
    const char* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw ConfigError(std::string(what) + ": expected an integer, got '" + std::string(text) + "'");
    return v;
}

bool parse_bool(std::string_view text, std::string_view what) {
    if (text == "1" || text == "true" || text == "on" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "off" || text == "no") return false;
    throw ConfigError(std::string(what) + ": expected a boolean, got '" + std::string(text) + "'");
}

namespace {

template <class C>
using Setter = std::function<void(C&, std::string_view)>;

template <class C>
using Table = std::map<std::string, Setter<C>, std::less<>>;

int to_int(std::string_view v, std::string_view key) {
    const long long x = parse_integer(v, key);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
        throw ConfigError(std::string(key) + ": out of range");
    return static_cast<int>(x);
}

template <class C, class T>
Setter<C> number(T C::*field) {
    return [field](C& c, std::string_view v) {
        if constexpr (std::is_same_v<T, double>)
            c.*field = parse_double(v, "value");
        else if constexpr (std::is_same_v<T, std::optional<double>>)
            c.*field = parse_double(v, "value");
        else if constexpr (std::is_same_v<T, int>)
            c.*field = to_int(v, "value");
        else if constexpr (std::is_same_v<T, std::optional<int>>)
            c.*field = to_int(v, "value");
        else if constexpr (std::is_same_v<T, bool>)
            c.*field = parse_bool(v, "value");
        else
            c.*field = static_cast<T>(parse_integer(v, "value"));
    };
}

const Table<SolverConfig>& solver_table() {
    static const Table<SolverConfig> t = {
        {"epsilon", number(&SolverConfig::epsilon)},
        {"delta", number(&SolverConfig::delta)},
        {"radius", number(&SolverConfig::radius)},
        {"nu", number(&SolverConfig::nu)},
        {"stepsize",
         [](SolverConfig& c, std::string_view v) {
             if (v == "fixed_radius")
                 c.stepsize = StepsizeRule::FixedRadius;
             else if (v == "backtracking")
                 c.stepsize = StepsizeRule::Backtracking;
             else
                 throw ConfigError("stepsize: expected fixed_radius or backtracking");
         }},
        {"beta", number(&SolverConfig::beta)},
        {"gamma_ls", number(&SolverConfig::gamma_ls)},
        {"max_ls_trials", number(&SolverConfig::max_ls_trials)},
        {"mode",
         [](SolverConfig& c, std::string_view v) {
             if (v == "exact")
                 c.mode = SolveMode::Exact;
             else if (v == "inexact")
                 c.mode = SolveMode::Inexact;
             else
                 throw ConfigError("mode: expected exact or inexact");
         }},
        {"e_k", number(&SolverConfig::e_k)},
        {"failure_prob", number(&SolverConfig::failure_prob)},
        {"psi", number(&SolverConfig::psi)},
        {"j_min", number(&SolverConfig::j_min)},
        {"local_phase",
         [](SolverConfig& c, std::string_view v) {
             if (v == "stop")
                 c.local_phase = LocalPhase::Stop;
             else if (v == "continue_delta_zero")
                 c.local_phase = LocalPhase::ContinueWithDeltaZero;
             else
                 throw ConfigError("local_phase: expected stop or continue_delta_zero");
         }},
        {"max_outer_iters", number(&SolverConfig::max_outer_iters)},
        {"max_local_iters", number(&SolverConfig::max_local_iters)},
        {"local_gtol", number(&SolverConfig::local_gtol)},
        {"dense_threshold", number(&SolverConfig::dense_threshold)},
        {"gtol", number(&SolverConfig::gtol)},
        {"cert_grad_const", number(&SolverConfig::cert_grad_const)},
        {"cert_curv_const", number(&SolverConfig::cert_curv_const)},
        {"seed",
         [](SolverConfig& c, std::string_view v) {
             const long long s = parse_integer(v, "seed");
             if (s < 0) throw ConfigError("seed must be nonnegative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"record_trace", number(&SolverConfig::record_trace)},
    };
    return t;
}

const Table<TrustRegionConfig>& tr_table() {
    static const Table<TrustRegionConfig> t = {
        {"gtol", number(&TrustRegionConfig::gtol)},
        {"max_iters", number(&TrustRegionConfig::max_iters)},
        {"initial_radius", number(&TrustRegionConfig::initial_radius)},
        {"max_radius", number(&TrustRegionConfig::max_radius)},
        {"accept_ratio", number(&TrustRegionConfig::accept_ratio)},
        {"expand_ratio", number(&TrustRegionConfig::expand_ratio)},
        {"shrink_factor", number(&TrustRegionConfig::shrink_factor)},
        {"expand_factor", number(&TrustRegionConfig::expand_factor)},
        {"max_cg", number(&TrustRegionConfig::max_cg)},
        {"dense_threshold", number(&TrustRegionConfig::dense_threshold)},
        {"record_trace", number(&TrustRegionConfig::record_trace)},
    };
    return t;
}

const Table<CubicRegConfig>& cubic_table() {
    static const Table<CubicRegConfig> t = {
        {"gtol", number(&CubicRegConfig::gtol)},
        {"max_iters", number(&CubicRegConfig::max_iters)},
        {"initial_sigma", number(&CubicRegConfig::initial_sigma)},
        {"min_sigma", number(&CubicRegConfig::min_sigma)},
        {"max_sigma", number(&CubicRegConfig::max_sigma)},
        {"accept_ratio", number(&CubicRegConfig::accept_ratio)},
        {"success_ratio", number(&CubicRegConfig::success_ratio)},
        {"dense_threshold", number(&CubicRegConfig::dense_threshold)},
        {"record_trace", number(&CubicRegConfig::record_trace)},
    };
    return t;
}

template <class C>
void apply(const Table<C>& table, C& config, std::string_view key, std::string_view value) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown option '" + std::string(key) + "'");
    try {
        it->second(config, value);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(key) + ": " + e.what());
    }
}

template <class C>
std::vector<std::string> keys(const Table<C>& table) {
    std::vector<std::string> out;
    for (const auto& [k, _] : table) out.push_back(k);
    return out;
}

} // namespace

void set_option(SolverConfig& c, std::string_view k, std::string_view v) { apply(solver_table(), c, k, v); }
void set_option(TrustRegionConfig& c, std::string_view k, std::string_view v) { apply(tr_table(), c, k, v); }
void set_option(CubicRegConfig& c, std::string_view k, std::string_view v) { apply(cubic_table(), c, k, v); }

std::vector<std::string> option_keys(const SolverConfig&) { return keys(solver_table()); }
std::vector<std::string> option_keys(const TrustRegionConfig&) { return keys(tr_table()); }
std::vector<std::string> option_keys(const CubicRegConfig&) { return keys(cubic_table()); }

} // namespace hsodm
