#pragma once

#include "sdwave/noise.hpp"
#include "sdwave/schemes.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace sdwave {

/// Root-mean-square errors over Monte-Carlo samples with jackknife standard errors.
struct McError {
    double err_u = 0.0;
    double err_v = 0.0;
    double se_u = 0.0;
    double se_v = 0.0;
};

struct TerminalPair {
    FemState approx;
    FemState reference; // already restricted to the approximation's mesh
};

McError mc_rms_error(const std::vector<TerminalPair>& samples, const SymTridiagonal& mass);

/// RMS and jackknife standard error of the root of a sample mean.
std::pair<double, double> rms_with_jackknife(std::span<const double> squared);

struct RateFit {
    double slope = 0.0;               // least squares over all levels
    std::vector<double> pairwise;     // log(e_i / e_{i+1}) / log(s_i / s_{i+1})
};

RateFit estimate_rates(std::span<const double> errors, std::span<const double> steps);

struct LevelErrors {
    std::vector<double> h;
    std::vector<double> k;
    std::vector<double> errors_u;
    std::vector<double> errors_v;
    std::vector<double> se_u;
    std::vector<double> se_v;
    int n_samples = 0;
};

enum class SweepAxis { space, time };

struct ConvergenceReport {
    LevelErrors levels;
    SweepAxis axis = SweepAxis::space;
    std::optional<RateFit> rate_u; // empty when the errors are degenerate
    std::optional<RateFit> rate_v;
    std::string degenerate_reason;
    std::uint64_t seed = 0;
    std::string config_echo;

    bool has_rates() const { return rate_u.has_value() && rate_v.has_value(); }
};

/// Fits both components; leaves the rates empty and records why on degenerate data.
void fit_report_rates(ConvergenceReport& report);

/// How a coarse level is compared with the fine reference in the spatial study:
/// `fine` embeds the coarse solution in the reference mesh and uses the fine
/// L2 norm; `coarse_nodes` samples the reference at the coarse nodes.
enum class SpatialComparison { fine, coarse_nodes };

struct StochasticSetup {
    double alpha = 1.0;
    double final_time = 1.0;
    std::optional<QSpec> noise;    // empty: no noise
    Nonlinearity nonlinearity = Nonlinearity::sine;
    ModalState initial;            // empty vectors: zero data
    int samples = 100;
    std::uint64_t seed = 0;
    int threads = 0;               // 0: hardware concurrency
    SpatialComparison comparison = SpatialComparison::fine;
};

/// Per-sample seed derived from the master seed.
std::uint64_t sample_seed(std::uint64_t master, int sample);

/// The fine-grid increments driving sample `sample` (zeros when noise is off).
ModeIncrements sample_path(const StochasticSetup& setup, int sample, int n_steps, double k);

/// Levels h = 1 / level_cells[i] against a reference on reference_cells, all
/// with one time step k and one shared noise path per sample.
ConvergenceReport run_spatial_convergence(const StochasticSetup& setup, const std::vector<int>& level_cells,
                                          int reference_cells, double k);

/// Levels k = level_k[i] on a fixed mesh, against a reference at reference_k;
/// coarse levels consume coarsened copies of the reference path.
ConvergenceReport run_temporal_convergence(const StochasticSetup& setup, int cells,
                                           const std::vector<double>& level_k, double reference_k);

/// Deterministic linear problem against the modal exact solution.
ConvergenceReport deterministic_spatial_convergence(double alpha, double final_time, const ModalState& initial,
                                                    const std::vector<int>& level_cells, double k);
ConvergenceReport deterministic_temporal_convergence(double alpha, double final_time, const ModalState& initial,
                                                     int cells, const std::vector<double>& level_k);

struct EnergyEntry {
    double energy = 0.0;      // ||U^n||^2 + ||T_h^{1/2} V^n||^2
    double dissipation = 0.0; // 2 alpha k ||V^n||^2
    double slack = 0.0;       // E^{n-1} - E^n - dissipation
};

std::vector<EnergyEntry> energy_audit(const Trajectory& traj, const SymTridiagonal& mass,
                                      const SpectralDecomp& decomp, double alpha);

/// True when every slack >= -rel_tol * E^0.
bool energy_ledger_ok(const std::vector<EnergyEntry>& ledger, double rel_tol = 1e-10);

enum class Component { u, v };

/// Lags are 2^m k with min_lag_steps <= 2^m and 2^m k <= max_lag_fraction * T.
struct HolderWindow {
    int min_lag_steps = 4;
    double max_lag_fraction = 1.0 / 32;
};

/// Streams trajectories in and regresses log RMS increment against log lag.
class HolderAccumulator {
public:
    HolderAccumulator(SymTridiagonal mass, Component component, HolderWindow window = {});

    void add(const Trajectory& traj);
    void merge(const HolderAccumulator& other);
    double estimate() const;

    const std::vector<double>& lags() const { return lags_; }
    /// sqrt of the mean squared increment per lag.
    std::vector<double> rms_increments() const;

private:
    SymTridiagonal mass_;
    Component component_;
    HolderWindow window_;
    int n_steps_ = -1;
    double k_ = 0.0;
    std::vector<int> lag_steps_;
    std::vector<double> lags_;
    std::vector<double> sum_sq_;
    std::vector<double> counts_;
};

double holder_estimate(const std::vector<Trajectory>& samples, const SymTridiagonal& mass, Component component,
                       HolderWindow window = {});

struct RegularityReport {
    double exponent_u = 0.0;
    double exponent_v = 0.0;
    std::vector<double> lags;
    std::vector<double> rms_u;
    std::vector<double> rms_v;
};

/// Hoelder exponents of the stochastic scheme's paths on a fixed grid.
RegularityReport run_regularity(const StochasticSetup& setup, int cells, double k, HolderWindow window = {});

struct EnergyReport {
    int samples = 0;
    int steps = 0;
    double min_relative_slack = 0.0; // min over samples and steps of slack / E^0
    bool ok = false;
    std::vector<std::vector<EnergyEntry>> ledgers;
};

/// Random initial states, linear deterministic runs, one ledger per sample.
EnergyReport run_energy_audit(double alpha, double final_time, int cells, double k, int samples,
                              std::uint64_t seed, double rel_tol = 1e-10);

/// Runs fn(i) for i in [0, count) over a small worker pool.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

} // namespace sdwave
