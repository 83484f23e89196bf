#pragma once

#include "hsodm/baselines.hpp"
#include "hsodm/solver.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace hsodm {

// String-keyed configuration shared by the C API and the command line. Values
// are parsed strictly: trailing garbage, out-of-range numbers and unknown keys
// raise ConfigError. Range checks happen later in each config's validate().

void set_option(SolverConfig& config, std::string_view key, std::string_view value);
void set_option(TrustRegionConfig& config, std::string_view key, std::string_view value);
void set_option(CubicRegConfig& config, std::string_view key, std::string_view value);

std::vector<std::string> option_keys(const SolverConfig&);
std::vector<std::string> option_keys(const TrustRegionConfig&);
std::vector<std::string> option_keys(const CubicRegConfig&);

double parse_double(std::string_view text, std::string_view what);
long long parse_integer(std::string_view text, std::string_view what);
bool parse_bool(std::string_view text, std::string_view what);

} // namespace hsodm
