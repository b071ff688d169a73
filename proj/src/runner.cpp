#include "sdwave/runner.hpp"

#include "sdwave/error.hpp"
#include "sdwave/format.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

namespace sdwave {

namespace {

int cells_for(double h) { return static_cast<int>(std::lround(1.0 / h)); }

std::ofstream open_output(const std::filesystem::path& path, bool binary = false) {
    std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
    if (!os) throw Error(ErrorKind::io, "cannot open " + path.string() + " for writing");
    return os;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw Error(ErrorKind::io, "failed writing " + path.string());
}

void write_meta(const RunConfig& cfg, const RunOptions& opts) {
    const auto path = opts.out_dir / "meta.txt";
    auto os = open_output(path);
    os << "sdwave " << kVersion << '\n';
    os << "eigen " << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION << '\n';
    os << "seed " << cfg.seed << '\n';
    os << "n_modes " << cfg.n_modes << '\n';
    os << "mc_samples " << cfg.mc_samples << '\n';
    os << "# configuration\n" << config_echo(cfg);
    finish(os, path);
}

ModalState single_mode(int mode) {
    ModalState m{Vector::Zero(mode), Vector::Zero(mode)};
    if (mode >= 1) m.a[mode - 1] = 1.0;
    return m;
}

void write_report(const ConvergenceReport& report, const RunOptions& opts) {
    {
        const auto path = opts.out_dir / "errors.csv";
        auto os = open_output(path);
        write_errors_csv(os, report);
        finish(os, path);
    }
    {
        const auto path = opts.out_dir / "rates.csv";
        auto os = open_output(path);
        write_rates_csv(os, report);
        finish(os, path);
    }
}

int report_status(const ConvergenceReport& report, std::ostream& log) {
    const auto& steps = report.axis == SweepAxis::space ? report.levels.h : report.levels.k;
    const char* label = report.axis == SweepAxis::space ? "h" : "k";
    for (std::size_t i = 0; i < steps.size(); ++i)
        log << label << " = " << format_shortest(steps[i]) << "  err_u = " << format_double(report.levels.errors_u[i])
            << "  err_v = " << format_double(report.levels.errors_v[i]) << '\n';
    if (!report.has_rates()) {
        log << "rate fit failed: " << report.degenerate_reason << '\n';
        return 1;
    }
    log << "global slope u = " << format_double(report.rate_u->slope)
        << "  v = " << format_double(report.rate_v->slope) << '\n';
    return 0;
}

void write_sample_artifacts(const RunConfig& cfg, const StochasticSetup& setup, int cells, double k,
                            const RunOptions& opts) {
    if (!cfg.dump_increments && !cfg.trajectory_csv) return;
    const int steps = static_cast<int>(std::lround(cfg.final_time / k));
    const ModeIncrements inc = sample_path(setup, 0, steps, k);
    if (cfg.dump_increments) {
        const auto path = opts.out_dir / "increments.bin";
        auto os = open_output(path, true);
        write_increments(os, inc);
        finish(os, path);
    }
    if (cfg.trajectory_csv) {
        const Mesh1D mesh(cells);
        const SchemeConfig scheme(mesh, setup.alpha, k, setup.final_time, setup.nonlinearity);
        const FemState start = setup.initial.a.size() ? project_modal_state(setup.initial, mesh) : FemState::zero(mesh);
        const Trajectory traj = run_stochastic(start, inc, build_sine_load_table(mesh, inc.n_modes()), scheme);
        const auto path = opts.out_dir / "trajectory.csv";
        auto os = open_output(path);
        write_trajectory_csv(os, traj);
        finish(os, path);
    }
}

int run_hs_check(const RunConfig& cfg, const RunOptions& opts, std::ostream& log) {
    std::vector<int> counts;
    for (long long j = 10; j < cfg.n_modes; j *= 10) counts.push_back(static_cast<int>(j));
    counts.push_back(cfg.n_modes);
    const auto path = opts.out_dir / "hs.csv";
    auto os = open_output(path);
    os << "n_modes,hs_norm\n";
    for (int j : counts) {
        const double value = hs_norm_partial(build_q_spec(cfg.noise, cfg.noise_r, j), cfg.gamma_label);
        os << j << ',' << format_double(value) << '\n';
        log << "J = " << j << "  ||A^((gamma-1)/2) Q^(1/2)||_HS partial = " << format_double(value) << '\n';
    }
    finish(os, path);
    return 0;
}

int run_energy(const RunConfig& cfg, const RunOptions& opts, std::ostream& log) {
    const EnergyReport report = run_energy_audit(cfg.alpha, cfg.final_time, cells_for(cfg.h_ref), cfg.k_ref,
                                                 cfg.mc_samples, cfg.seed);
    const auto path = opts.out_dir / "energy.csv";
    auto os = open_output(path);
    os << "sample,step,energy,dissipation,slack\n";
    for (std::size_t s = 0; s < report.ledgers.size(); ++s)
        for (std::size_t n = 0; n < report.ledgers[s].size(); ++n) {
            const auto& e = report.ledgers[s][n];
            os << s << ',' << n << ',' << format_double(e.energy) << ',' << format_double(e.dissipation) << ','
               << format_double(e.slack) << '\n';
        }
    finish(os, path);
    log << "energy audit: " << report.samples << " samples x " << report.steps
        << " steps, min slack / E0 = " << format_double(report.min_relative_slack) << '\n';
    log << (report.ok ? "energy inequality holds\n" : "energy inequality VIOLATED\n");
    return report.ok ? 0 : 1;
}

int run_regularity_command(const RunConfig& cfg, const RunOptions& opts, std::ostream& log) {
    const StochasticSetup setup = make_setup(cfg, opts.threads);
    const HolderWindow window{cfg.holder_min_lag_steps, cfg.holder_max_lag};
    const RegularityReport report = run_regularity(setup, cells_for(cfg.h_ref), cfg.k_ref, window);
    {
        const auto path = opts.out_dir / "holder.csv";
        auto os = open_output(path);
        os << "lag,rms_u,rms_v\n";
        for (std::size_t i = 0; i < report.lags.size(); ++i)
            os << format_double(report.lags[i]) << ',' << format_double(report.rms_u[i]) << ','
               << format_double(report.rms_v[i]) << '\n';
        finish(os, path);
    }
    {
        const auto path = opts.out_dir / "exponents.csv";
        auto os = open_output(path);
        os << "component,exponent,predicted\n";
        os << "u," << format_double(report.exponent_u) << ',' << format_double((cfg.gamma_label + 1.0) / 2.0) << '\n';
        os << "v," << format_double(report.exponent_v) << ',' << format_double(cfg.gamma_label / 2.0) << '\n';
        finish(os, path);
    }
    write_sample_artifacts(cfg, setup, cells_for(cfg.h_ref), cfg.k_ref, opts);
    log << "Hoelder exponent u = " << format_double(report.exponent_u) << "  v = " << format_double(report.exponent_v)
        << '\n';
    return 0;
}

} // namespace

StochasticSetup make_setup(const RunConfig& cfg, int threads) {
    StochasticSetup setup;
    setup.alpha = cfg.alpha;
    setup.final_time = cfg.final_time;
    setup.noise = build_q_spec(cfg.noise, cfg.noise_r, cfg.n_modes);
    setup.nonlinearity = cfg.nonlinearity;
    if (cfg.initial_mode >= 1) setup.initial = single_mode(cfg.initial_mode);
    setup.samples = cfg.mc_samples;
    setup.seed = cfg.seed;
    setup.threads = threads;
    setup.comparison = cfg.comparison;
    return setup;
}

void write_errors_csv(std::ostream& os, const ConvergenceReport& report) {
    const auto& l = report.levels;
    os << "level_index,h,k,err_u,err_v,se_u,se_v\n";
    for (std::size_t i = 0; i < l.h.size(); ++i)
        os << i << ',' << format_double(l.h[i]) << ',' << format_double(l.k[i]) << ',' << format_double(l.errors_u[i])
           << ',' << format_double(l.errors_v[i]) << ',' << format_double(l.se_u[i]) << ','
           << format_double(l.se_v[i]) << '\n';
}

void write_rates_csv(std::ostream& os, const ConvergenceReport& report) {
    os << "kind,from_level,to_level,slope_u,slope_v\n";
    if (!report.has_rates()) return;
    const auto& pu = report.rate_u->pairwise;
    const auto& pv = report.rate_v->pairwise;
    for (std::size_t i = 0; i < pu.size(); ++i)
        os << "pairwise," << i << ',' << i + 1 << ',' << format_double(pu[i]) << ',' << format_double(pv[i]) << '\n';
    os << "global,0," << pu.size() << ',' << format_double(report.rate_u->slope) << ','
       << format_double(report.rate_v->slope) << '\n';
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    os << "t,node_index,u,v\n";
    for (const auto& s : traj)
        for (Eigen::Index i = 0; i < s.u.size(); ++i)
            os << format_double(s.t) << ',' << i + 1 << ',' << format_double(s.u[i]) << ',' << format_double(s.v[i])
               << '\n';
}

int run_command(const RunConfig& cfg, const RunOptions& opts, std::ostream& log) {
    try {
        validate_config(cfg);
        std::filesystem::create_directories(opts.out_dir);
        write_meta(cfg, opts);
        switch (cfg.command) {
        case Command::hs_check: return run_hs_check(cfg, opts, log);
        case Command::energy: return run_energy(cfg, opts, log);
        case Command::regularity: return run_regularity_command(cfg, opts, log);
        case Command::spatial: {
            const StochasticSetup setup = make_setup(cfg, opts.threads);
            std::vector<int> cells;
            for (double h : cfg.h_levels) cells.push_back(cells_for(h));
            ConvergenceReport report = run_spatial_convergence(setup, cells, cells_for(cfg.h_ref), cfg.k_ref);
            report.config_echo = config_echo(cfg);
            write_report(report, opts);
            write_sample_artifacts(cfg, setup, cells_for(cfg.h_ref), cfg.k_ref, opts);
            return report_status(report, log);
        }
        case Command::temporal: {
            const StochasticSetup setup = make_setup(cfg, opts.threads);
            ConvergenceReport report =
                run_temporal_convergence(setup, cells_for(cfg.h_ref), cfg.k_levels, cfg.k_ref);
            report.config_echo = config_echo(cfg);
            write_report(report, opts);
            write_sample_artifacts(cfg, setup, cells_for(cfg.h_ref), cfg.k_ref, opts);
            return report_status(report, log);
        }
        case Command::deterministic: {
            const ModalState initial = single_mode(cfg.initial_mode);
            ConvergenceReport report;
            if (cfg.sweep == SweepAxis::space) {
                std::vector<int> cells;
                for (double h : cfg.h_levels) cells.push_back(cells_for(h));
                report = deterministic_spatial_convergence(cfg.alpha, cfg.final_time, initial, cells, cfg.k_ref);
            } else {
                report = deterministic_temporal_convergence(cfg.alpha, cfg.final_time, initial,
                                                            cells_for(cfg.h_ref), cfg.k_levels);
            }
            report.config_echo = config_echo(cfg);
            write_report(report, opts);
            if (cfg.trajectory_csv) {
                const Mesh1D mesh(cells_for(cfg.sweep == SweepAxis::space ? cfg.h_levels.back() : cfg.h_ref));
                const double k = cfg.sweep == SweepAxis::space ? cfg.k_ref : cfg.k_levels.back();
                const SchemeConfig scheme(mesh, cfg.alpha, k, cfg.final_time, Nonlinearity::zero);
                const auto path = opts.out_dir / "trajectory.csv";
                auto os = open_output(path);
                write_trajectory_csv(os, run_deterministic(project_modal_state(initial, mesh), scheme));
                finish(os, path);
            }
            return report_status(report, log);
        }
        }
        return 2;
    } catch (const Error& e) {
        log << "error: " << e.what() << '\n';
        return e.kind() == ErrorKind::degenerate_data ? 1 : 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return 2;
    }
}

} // namespace sdwave
