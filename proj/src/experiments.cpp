#include "sdwave/experiments.hpp"

#include "sdwave/error.hpp"
#include "sdwave/philox.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>

namespace sdwave {

namespace {

bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

int steps_for(double final_time, double k) {
    const double ratio = final_time / k;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw Error(ErrorKind::configuration, "T / k = " + std::to_string(ratio) + " is not an integer");
    return static_cast<int>(rounded);
}

FemState initial_state(const ModalState& initial, const Mesh1D& mesh) {
    if (initial.a.size() == 0 && initial.b.size() == 0) return FemState::zero(mesh);
    return project_modal_state(initial, mesh);
}

struct SquaredErrors {
    std::vector<std::vector<double>> u; // [level][sample]
    std::vector<std::vector<double>> v;

    SquaredErrors(std::size_t levels, int samples)
        : u(levels, std::vector<double>(samples)), v(levels, std::vector<double>(samples)) {}
};

void fill_level_errors(LevelErrors& out, const SquaredErrors& sq) {
    for (std::size_t i = 0; i < sq.u.size(); ++i) {
        const auto [eu, su] = rms_with_jackknife(sq.u[i]);
        const auto [ev, sv] = rms_with_jackknife(sq.v[i]);
        out.errors_u.push_back(eu);
        out.errors_v.push_back(ev);
        out.se_u.push_back(su);
        out.se_v.push_back(sv);
    }
}

} // namespace

std::pair<double, double> rms_with_jackknife(std::span<const double> squared) {
    const std::size_t m = squared.size();
    if (m == 0) throw Error(ErrorKind::configuration, "no samples to aggregate");
    const double total = std::accumulate(squared.begin(), squared.end(), 0.0);
    const double rms = std::sqrt(total / static_cast<double>(m));
    if (m == 1) return {rms, 0.0};
    std::vector<double> leave_one_out(m);
    for (std::size_t i = 0; i < m; ++i)
        leave_one_out[i] = std::sqrt(std::max(total - squared[i], 0.0) / static_cast<double>(m - 1));
    const double mean = std::accumulate(leave_one_out.begin(), leave_one_out.end(), 0.0) / static_cast<double>(m);
    double acc = 0.0;
    for (double x : leave_one_out) acc += (x - mean) * (x - mean);
    return {rms, std::sqrt(acc * static_cast<double>(m - 1) / static_cast<double>(m))};
}

McError mc_rms_error(const std::vector<TerminalPair>& samples, const SymTridiagonal& mass) {
    if (samples.empty()) throw Error(ErrorKind::configuration, "empty sample list");
    std::vector<double> su;
    std::vector<double> sv;
    su.reserve(samples.size());
    sv.reserve(samples.size());
    for (const auto& p : samples) {
        if (p.approx.u.size() != mass.dim() || p.reference.u.size() != mass.dim() ||
            p.approx.v.size() != mass.dim() || p.reference.v.size() != mass.dim())
            throw Error(ErrorKind::shape, "sample does not match the mass matrix");
        const Vector du = p.approx.u - p.reference.u;
        const Vector dv = p.approx.v - p.reference.v;
        su.push_back(std::max(mass.quadratic(du, du), 0.0));
        sv.push_back(std::max(mass.quadratic(dv, dv), 0.0));
    }
    McError out;
    std::tie(out.err_u, out.se_u) = rms_with_jackknife(su);
    std::tie(out.err_v, out.se_v) = rms_with_jackknife(sv);
    return out;
}

RateFit estimate_rates(std::span<const double> errors, std::span<const double> steps) {
    if (errors.size() != steps.size())
        throw Error(ErrorKind::shape, "errors and steps differ in length");
    if (errors.size() < 2) throw Error(ErrorKind::configuration, "need at least two levels to fit a rate");
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!(errors[i] > 0.0) || !std::isfinite(errors[i]))
            throw Error(ErrorKind::degenerate_data, "error at level " + std::to_string(i) + " is not positive");
        if (!(steps[i] > 0.0)) throw Error(ErrorKind::configuration, "step sizes must be positive");
        if (i > 0 && !(steps[i] < steps[i - 1]))
            throw Error(ErrorKind::configuration, "step sizes must be strictly decreasing");
    }
    RateFit fit;
    const std::size_t n = errors.size();
    for (std::size_t i = 0; i + 1 < n; ++i)
        fit.pairwise.push_back(std::log(errors[i] / errors[i + 1]) / std::log(steps[i] / steps[i + 1]));
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(steps[i]);
        my += std::log(errors[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(steps[i]) - mx;
        sxy += dx * (std::log(errors[i]) - my);
        sxx += dx * dx;
    }
    fit.slope = sxy / sxx;
    return fit;
}

void fit_report_rates(ConvergenceReport& report) {
    const auto& steps = report.axis == SweepAxis::space ? report.levels.h : report.levels.k;
    report.rate_u.reset();
    report.rate_v.reset();
    try {
        report.rate_u = estimate_rates(report.levels.errors_u, steps);
        report.rate_v = estimate_rates(report.levels.errors_v, steps);
        report.degenerate_reason.clear();
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::degenerate_data) throw;
        report.rate_u.reset();
        report.rate_v.reset();
        report.degenerate_reason = e.what();
    }
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, std::max(count, 1));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

std::uint64_t sample_seed(std::uint64_t master, int sample) {
    return mix_seed(master, static_cast<std::uint64_t>(sample));
}

ModeIncrements sample_path(const StochasticSetup& setup, int sample, int n_steps, double k) {
    if (setup.noise) return sample_mode_increments(*setup.noise, n_steps, k, sample_seed(setup.seed, sample));
    ModeIncrements zero;
    zero.n_steps = n_steps;
    zero.k = k;
    zero.seed = sample_seed(setup.seed, sample);
    zero.increments = RowMatrix::Zero(n_steps, 1);
    return zero;
}

ConvergenceReport run_spatial_convergence(const StochasticSetup& setup, const std::vector<int>& level_cells,
                                          int reference_cells, double k) {
    if (level_cells.empty()) throw Error(ErrorKind::configuration, "no spatial levels given");
    if (setup.samples < 1) throw Error(ErrorKind::configuration, "need at least one sample");
    for (int c : level_cells) {
        if (c >= reference_cells)
            throw Error(ErrorKind::configuration, "reference mesh is not finer than level with " +
                                                      std::to_string(c) + " cells");
        if (reference_cells % c != 0)
            throw Error(ErrorKind::configuration, "level mesh is not nested in the reference mesh");
    }
    const int steps = steps_for(setup.final_time, k);
    const Mesh1D ref_mesh(reference_cells);
    const SchemeConfig ref_cfg(ref_mesh, setup.alpha, k, setup.final_time, setup.nonlinearity);
    const int modes = setup.noise ? setup.noise->n_modes : 1;
    const SineLoadTable ref_table = build_sine_load_table(ref_mesh, modes);
    const FemState ref_start = initial_state(setup.initial, ref_mesh);

    std::vector<Mesh1D> meshes;
    std::vector<SchemeConfig> cfgs;
    std::vector<SineLoadTable> tables;
    std::vector<FemState> starts;
    for (int c : level_cells) {
        meshes.emplace_back(c);
        cfgs.emplace_back(meshes.back(), setup.alpha, k, setup.final_time, setup.nonlinearity);
        tables.push_back(build_sine_load_table(meshes.back(), modes));
        starts.push_back(initial_state(setup.initial, meshes.back()));
    }

    SquaredErrors sq(level_cells.size(), setup.samples);
    parallel_for(setup.samples, setup.threads, [&](int s) {
        const ModeIncrements inc = sample_path(setup, s, steps, k);
        const FemState ref = simulate_stochastic(ref_start, inc, ref_table, ref_cfg);
        for (std::size_t i = 0; i < meshes.size(); ++i) {
            const FemState approx = simulate_stochastic(starts[i], inc, tables[i], cfgs[i]);
            if (setup.comparison == SpatialComparison::fine) {
                const Vector du = prolong_to_fine(approx.u, meshes[i], ref_mesh) - ref.u;
                const Vector dv = prolong_to_fine(approx.v, meshes[i], ref_mesh) - ref.v;
                sq.u[i][s] = std::max(ref_cfg.mass().quadratic(du, du), 0.0);
                sq.v[i][s] = std::max(ref_cfg.mass().quadratic(dv, dv), 0.0);
            } else {
                const Vector du = approx.u - restrict_to_coarse(ref.u, ref_mesh, meshes[i]);
                const Vector dv = approx.v - restrict_to_coarse(ref.v, ref_mesh, meshes[i]);
                sq.u[i][s] = std::max(cfgs[i].mass().quadratic(du, du), 0.0);
                sq.v[i][s] = std::max(cfgs[i].mass().quadratic(dv, dv), 0.0);
            }
        }
    });

    ConvergenceReport report;
    report.axis = SweepAxis::space;
    report.seed = setup.seed;
    report.levels.n_samples = setup.samples;
    for (const auto& m : meshes) {
        report.levels.h.push_back(m.h());
        report.levels.k.push_back(k);
    }
    fill_level_errors(report.levels, sq);
    fit_report_rates(report);
    return report;
}

ConvergenceReport run_temporal_convergence(const StochasticSetup& setup, int cells,
                                           const std::vector<double>& level_k, double reference_k) {
    if (level_k.empty()) throw Error(ErrorKind::configuration, "no temporal levels given");
    if (setup.samples < 1) throw Error(ErrorKind::configuration, "need at least one sample");
    const int ref_steps = steps_for(setup.final_time, reference_k);
    std::vector<int> factors;
    for (double kl : level_k) {
        const double ratio = kl / reference_k;
        const long long f = std::llround(ratio);
        if (std::abs(ratio - static_cast<double>(f)) > 1e-9 * ratio || f < 2 || !is_power_of_two(f))
            throw Error(ErrorKind::configuration,
                        "time step " + std::to_string(kl) + " is not a dyadic coarsening of the reference");
        if (ref_steps % f != 0)
            throw Error(ErrorKind::configuration, "time step does not divide the interval");
        factors.push_back(static_cast<int>(f));
    }
    const Mesh1D mesh(cells);
    const int modes = setup.noise ? setup.noise->n_modes : 1;
    const SineLoadTable table = build_sine_load_table(mesh, modes);
    const FemState start = initial_state(setup.initial, mesh);
    const SchemeConfig ref_cfg(mesh, setup.alpha, reference_k, setup.final_time, setup.nonlinearity);
    std::vector<SchemeConfig> cfgs;
    for (int f : factors) cfgs.emplace_back(mesh, setup.alpha, reference_k * f, setup.final_time, setup.nonlinearity);

    SquaredErrors sq(level_k.size(), setup.samples);
    parallel_for(setup.samples, setup.threads, [&](int s) {
        const ModeIncrements fine = sample_path(setup, s, ref_steps, reference_k);
        const FemState ref = simulate_stochastic(start, fine, table, ref_cfg);
        for (std::size_t i = 0; i < factors.size(); ++i) {
            const FemState approx = simulate_stochastic(start, coarsen_increments(fine, factors[i]), table, cfgs[i]);
            const Vector du = approx.u - ref.u;
            const Vector dv = approx.v - ref.v;
            sq.u[i][s] = std::max(ref_cfg.mass().quadratic(du, du), 0.0);
            sq.v[i][s] = std::max(ref_cfg.mass().quadratic(dv, dv), 0.0);
        }
    });

    ConvergenceReport report;
    report.axis = SweepAxis::time;
    report.seed = setup.seed;
    report.levels.n_samples = setup.samples;
    for (int f : factors) {
        report.levels.h.push_back(mesh.h());
        report.levels.k.push_back(reference_k * f);
    }
    fill_level_errors(report.levels, sq);
    fit_report_rates(report);
    return report;
}

namespace {

std::pair<double, double> oracle_errors(const FemState& approx, const ModalState& exact, const Mesh1D& mesh,
                                        const SymTridiagonal& mass) {
    const FemState nodal = interpolate_modal_state(exact, mesh);
    const Vector du = approx.u - nodal.u;
    const Vector dv = approx.v - nodal.v;
    return {discrete_l2_norm(du, mass), discrete_l2_norm(dv, mass)};
}

ConvergenceReport single_sample_report(SweepAxis axis) {
    ConvergenceReport r;
    r.axis = axis;
    r.levels.n_samples = 1;
    return r;
}

} // namespace

ConvergenceReport deterministic_spatial_convergence(double alpha, double final_time, const ModalState& initial,
                                                    const std::vector<int>& level_cells, double k) {
    const ModalState exact = spectral_exact_linear(initial, final_time, alpha);
    ConvergenceReport report = single_sample_report(SweepAxis::space);
    for (int c : level_cells) {
        const Mesh1D mesh(c);
        const SchemeConfig cfg(mesh, alpha, k, final_time, Nonlinearity::zero);
        FemState state = project_modal_state(initial, mesh);
        for (int n = 0, steps = cfg.n_steps(); n < steps; ++n) state = deterministic_step(state, cfg);
        const auto [eu, ev] = oracle_errors(state, exact, mesh, cfg.mass());
        report.levels.h.push_back(mesh.h());
        report.levels.k.push_back(k);
        report.levels.errors_u.push_back(eu);
        report.levels.errors_v.push_back(ev);
        report.levels.se_u.push_back(0.0);
        report.levels.se_v.push_back(0.0);
    }
    fit_report_rates(report);
    return report;
}

ConvergenceReport deterministic_temporal_convergence(double alpha, double final_time, const ModalState& initial,
                                                     int cells, const std::vector<double>& level_k) {
    const ModalState exact = spectral_exact_linear(initial, final_time, alpha);
    const Mesh1D mesh(cells);
    const FemState start = project_modal_state(initial, mesh);
    ConvergenceReport report = single_sample_report(SweepAxis::time);
    for (double k : level_k) {
        const SchemeConfig cfg(mesh, alpha, k, final_time, Nonlinearity::zero);
        FemState state = start;
        for (int n = 0, steps = cfg.n_steps(); n < steps; ++n) state = deterministic_step(state, cfg);
        const auto [eu, ev] = oracle_errors(state, exact, mesh, cfg.mass());
        report.levels.h.push_back(mesh.h());
        report.levels.k.push_back(k);
        report.levels.errors_u.push_back(eu);
        report.levels.errors_v.push_back(ev);
        report.levels.se_u.push_back(0.0);
        report.levels.se_v.push_back(0.0);
    }
    fit_report_rates(report);
    return report;
}

std::vector<EnergyEntry> energy_audit(const Trajectory& traj, const SymTridiagonal& mass,
                                      const SpectralDecomp& decomp, double alpha) {
    std::vector<EnergyEntry> ledger;
    ledger.reserve(traj.size());
    auto energy = [&](const FemState& s) {
        return mass.quadratic(s.u, s.u) + std::pow(discrete_fractional_norm(s.v, -1.0, decomp, mass), 2);
    };
    for (std::size_t n = 0; n < traj.size(); ++n) {
        EnergyEntry e;
        e.energy = energy(traj[n]);
        if (n > 0) {
            const double k = traj[n].t - traj[n - 1].t;
            e.dissipation = 2.0 * alpha * k * mass.quadratic(traj[n].v, traj[n].v);
            e.slack = ledger.back().energy - e.energy - e.dissipation;
        }
        ledger.push_back(e);
    }
    return ledger;
}

bool energy_ledger_ok(const std::vector<EnergyEntry>& ledger, double rel_tol) {
    if (ledger.empty()) return true;
    const double floor = -rel_tol * ledger.front().energy;
    return std::all_of(ledger.begin(), ledger.end(), [&](const EnergyEntry& e) { return e.slack >= floor; });
}

HolderAccumulator::HolderAccumulator(SymTridiagonal mass, Component component, HolderWindow window)
    : mass_(std::move(mass)), component_(component), window_(window) {}

void HolderAccumulator::add(const Trajectory& traj) {
    const int steps = static_cast<int>(traj.size()) - 1;
    if (steps < 64)
        throw Error(ErrorKind::configuration, "Hoelder estimate needs at least 64 steps, got " + std::to_string(steps));
    const double k = traj[1].t - traj[0].t;
    if (n_steps_ < 0) {
        n_steps_ = steps;
        k_ = k;
        const double span = traj.back().t - traj.front().t;
        for (int lag = 1; lag <= steps; lag *= 2) {
            if (lag < window_.min_lag_steps) continue;
            if (lag * k > window_.max_lag_fraction * span * (1.0 + 1e-12)) break;
            lag_steps_.push_back(lag);
            lags_.push_back(lag * k);
        }
        if (lag_steps_.size() < 2)
            throw Error(ErrorKind::configuration, "lag window holds fewer than two dyadic lags");
        sum_sq_.assign(lag_steps_.size(), 0.0);
        counts_.assign(lag_steps_.size(), 0.0);
    } else if (steps != n_steps_ || std::abs(k - k_) > 1e-12 * k_) {
        throw Error(ErrorKind::shape, "trajectories on different time grids");
    }
    Vector diff;
    for (std::size_t l = 0; l < lag_steps_.size(); ++l) {
        const int lag = lag_steps_[l];
        for (int n = 0; n + lag <= steps; ++n) {
            const auto& a = component_ == Component::u ? traj[n + lag].u : traj[n + lag].v;
            const auto& b = component_ == Component::u ? traj[n].u : traj[n].v;
            diff = a - b;
            sum_sq_[l] += mass_.quadratic(diff, diff);
            counts_[l] += 1.0;
        }
    }
}

void HolderAccumulator::merge(const HolderAccumulator& other) {
    if (other.n_steps_ < 0) return;
    if (n_steps_ < 0) {
        *this = other;
        return;
    }
    if (other.lag_steps_ != lag_steps_) throw Error(ErrorKind::shape, "accumulators use different lags");
    for (std::size_t l = 0; l < lag_steps_.size(); ++l) {
        sum_sq_[l] += other.sum_sq_[l];
        counts_[l] += other.counts_[l];
    }
}

std::vector<double> HolderAccumulator::rms_increments() const {
    std::vector<double> out(lag_steps_.size());
    for (std::size_t l = 0; l < out.size(); ++l) out[l] = std::sqrt(sum_sq_[l] / counts_[l]);
    return out;
}

double HolderAccumulator::estimate() const {
    if (n_steps_ < 0) throw Error(ErrorKind::configuration, "no trajectories supplied");
    const auto rms = rms_increments();
    for (double r : rms)
        if (!(r > 0.0)) throw Error(ErrorKind::degenerate_data, "trajectory increments vanish");
    // Lags increase, so fit on reversed order to reuse the decreasing-step fitter.
    std::vector<double> e(rms.rbegin(), rms.rend());
    std::vector<double> s(lags_.rbegin(), lags_.rend());
    return estimate_rates(e, s).slope;
}

double holder_estimate(const std::vector<Trajectory>& samples, const SymTridiagonal& mass, Component component,
                       HolderWindow window) {
    HolderAccumulator acc(mass, component, window);
    for (const auto& t : samples) acc.add(t);
    return acc.estimate();
}

RegularityReport run_regularity(const StochasticSetup& setup, int cells, double k, HolderWindow window) {
    if (setup.samples < 1) throw Error(ErrorKind::configuration, "need at least one sample");
    const int steps = steps_for(setup.final_time, k);
    const Mesh1D mesh(cells);
    const SchemeConfig cfg(mesh, setup.alpha, k, setup.final_time, setup.nonlinearity);
    const int modes = setup.noise ? setup.noise->n_modes : 1;
    const SineLoadTable table = build_sine_load_table(mesh, modes);
    const FemState start = initial_state(setup.initial, mesh);

    // One accumulator pair per sample keeps the reduction order fixed.
    std::vector<HolderAccumulator> acc_u(setup.samples, HolderAccumulator(cfg.mass(), Component::u, window));
    std::vector<HolderAccumulator> acc_v(setup.samples, HolderAccumulator(cfg.mass(), Component::v, window));
    parallel_for(setup.samples, setup.threads, [&](int s) {
        const Trajectory traj = run_stochastic(start, sample_path(setup, s, steps, k), table, cfg);
        acc_u[s].add(traj);
        acc_v[s].add(traj);
    });
    HolderAccumulator total_u(cfg.mass(), Component::u, window);
    HolderAccumulator total_v(cfg.mass(), Component::v, window);
    for (int s = 0; s < setup.samples; ++s) {
        total_u.merge(acc_u[s]);
        total_v.merge(acc_v[s]);
    }
    RegularityReport report;
    report.exponent_u = total_u.estimate();
    report.exponent_v = total_v.estimate();
    report.lags = total_u.lags();
    report.rms_u = total_u.rms_increments();
    report.rms_v = total_v.rms_increments();
    return report;
}

EnergyReport run_energy_audit(double alpha, double final_time, int cells, double k, int samples,
                              std::uint64_t seed, double rel_tol) {
    if (samples < 1) throw Error(ErrorKind::configuration, "need at least one sample");
    const Mesh1D mesh(cells);
    const SchemeConfig cfg(mesh, alpha, k, final_time, Nonlinearity::zero);
    const SpectralDecomp decomp = gen_sym_eig(cfg.stiffness(), cfg.mass());
    EnergyReport report;
    report.samples = samples;
    report.steps = cfg.n_steps();
    report.ok = true;
    report.min_relative_slack = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
        const std::uint64_t key = sample_seed(seed, s);
        FemState w0 = FemState::zero(mesh);
        for (int i = 0; i < mesh.n_interior(); ++i) {
            w0.u[i] = keyed_standard_normal(key, 0, static_cast<std::uint64_t>(i));
            w0.v[i] = keyed_standard_normal(key, 1, static_cast<std::uint64_t>(i));
        }
        auto ledger = energy_audit(run_deterministic(w0, cfg), cfg.mass(), decomp, alpha);
        const double e0 = ledger.front().energy;
        for (std::size_t n = 1; n < ledger.size(); ++n)
            report.min_relative_slack = std::min(report.min_relative_slack, ledger[n].slack / e0);
        report.ok = report.ok && energy_ledger_ok(ledger, rel_tol);
        report.ledgers.push_back(std::move(ledger));
    }
    return report;
}

} // namespace sdwave
