#pragma once

#include "sdwave/experiments.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace sdwave {

enum class Command { spatial, temporal, deterministic, energy, regularity, hs_check };

const char* to_string(Command c);

/// Everything one CLI invocation needs. Parsed from a line-oriented
/// `key = value` file; see README for the key reference.
struct RunConfig {
    Command command = Command::spatial;
    double alpha = 1.0;
    double final_time = 1.0;
    NoiseKind noise = NoiseKind::white;
    double noise_r = 0.0;
    double gamma_label = 0.0;
    int n_modes = 256;
    int mc_samples = 100;
    std::uint64_t seed = 20160722;
    std::vector<double> h_levels;
    std::vector<double> k_levels;
    double h_ref = 0.0;
    double k_ref = 0.0;
    Nonlinearity nonlinearity = Nonlinearity::sine;
    SpatialComparison comparison = SpatialComparison::fine; // spatial command only
    SweepAxis sweep = SweepAxis::space; // deterministic command only
    int initial_mode = 0; // 0: zero data; j >= 1: u0 = sqrt(2) sin(j pi x), v0 = 0
    int holder_min_lag_steps = 4;
    double holder_max_lag = 1.0 / 32; // fraction of T
    bool dump_increments = false;
    bool trajectory_csv = false;
    std::string output_path = ".";
};

/// Parses, fills command-dependent defaults for anything left unset, and
/// validates. Unknown keys are parse errors; violated constraints
/// are validation errors naming the constraint.
RunConfig parse_config(const std::string& text);

/// Checks cross-field constraints for the selected command.
void validate_config(const RunConfig& cfg);

/// Canonical `key = value` listing of every field, in a fixed order.
std::string config_echo(const RunConfig& cfg);

/// Parses one number: decimal, `a/b`, or `2^e`.
double parse_number(const std::string& token);
/// Comma-separated numbers; `2^-1..2^-5` expands to every power of two in between.
std::vector<double> parse_ladder(const std::string& value);

} // namespace sdwave
