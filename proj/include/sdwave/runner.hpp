#pragma once

#include "sdwave/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace sdwave {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::filesystem::path out_dir = ".";
    int threads = 0;
};

/// Executes one configured command and writes its files into out_dir.
/// Returns 0 when every requested check passed, 1 when a check failed or the
/// data were degenerate, 2 on configuration or I/O errors. Progress and
/// summaries go to `log`.
int run_command(const RunConfig& cfg, const RunOptions& opts, std::ostream& log);

/// Noise and scheme settings for the stochastic commands.
StochasticSetup make_setup(const RunConfig& cfg, int threads);

void write_errors_csv(std::ostream& os, const ConvergenceReport& report);
void write_rates_csv(std::ostream& os, const ConvergenceReport& report);
/// Columns t, node_index, u, v; node_index is 1-based over interior nodes.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

} // namespace sdwave
