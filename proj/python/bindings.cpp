#include "sdwave/config.hpp"
#include "sdwave/error.hpp"
#include "sdwave/experiments.hpp"
#include "sdwave/runner.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace sdwave;

namespace {

py::dict report_dict(const ConvergenceReport& r) {
    py::dict d;
    d["h"] = r.levels.h;
    d["k"] = r.levels.k;
    d["err_u"] = r.levels.errors_u;
    d["err_v"] = r.levels.errors_v;
    d["se_u"] = r.levels.se_u;
    d["se_v"] = r.levels.se_v;
    d["samples"] = r.levels.n_samples;
    if (r.has_rates()) {
        d["slope_u"] = r.rate_u->slope;
        d["slope_v"] = r.rate_v->slope;
        d["pairwise_u"] = r.rate_u->pairwise;
        d["pairwise_v"] = r.rate_v->pairwise;
    } else {
        d["slope_u"] = py::none();
        d["slope_v"] = py::none();
        d["degenerate_reason"] = r.degenerate_reason;
    }
    return d;
}

ModalState single_mode(int mode) {
    ModalState m{Vector::Zero(mode), Vector::Zero(mode)};
    m.a[mode - 1] = 1.0;
    return m;
}

int cells_for(double h) { return static_cast<int>(std::lround(1.0 / h)); }

} // namespace

PYBIND11_MODULE(_sdwave, m) {
    m.doc() = "Finite elements and linear implicit Euler for the stochastic strongly damped wave equation";
    m.attr("__version__") = kVersion;

    static const py::handle error_type = py::exception<Error>(m, "SdwaveError", PyExc_RuntimeError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object exc = error_type(e.what());
            exc.attr("kind") = to_string(e.kind());
            PyErr_SetObject(error_type.ptr(), exc.ptr());
        }
    });

    py::enum_<NoiseKind>(m, "NoiseKind").value("white", NoiseKind::white).value("fractional", NoiseKind::fractional);
    py::enum_<Nonlinearity>(m, "Nonlinearity").value("zero", Nonlinearity::zero).value("sine", Nonlinearity::sine);

    m.def("stiffness_matrix", [](int n_cells) { return assemble_stiffness(Mesh1D(n_cells)).to_dense(); },
          py::arg("n_cells"), "Dense P1 stiffness matrix over the interior nodes.");
    m.def("mass_matrix", [](int n_cells) { return assemble_mass(Mesh1D(n_cells)).to_dense(); }, py::arg("n_cells"));
    m.def("interior_nodes", [](int n_cells) { return Mesh1D(n_cells).interior_nodes(); }, py::arg("n_cells"));
    m.def(
        "l2_project", [](const ScalarFunction& f, int n_cells) { return l2_project(f, Mesh1D(n_cells)); },
        py::arg("f"), py::arg("n_cells"));
    m.def(
        "ritz_project",
        [](const ScalarFunction& f, const ScalarFunction& df, int n_cells) {
            return ritz_project(SmoothFunction{f, df}, Mesh1D(n_cells));
        },
        py::arg("f"), py::arg("df"), py::arg("n_cells"));
    m.def("solve_tridiagonal", [](const Vector& diag, const Vector& off, const Vector& b) {
        return solve_sym_tridiag(SymTridiagonal(diag, off), b);
    });

    m.def(
        "hs_norm_partial",
        [](NoiseKind kind, double r, int n_modes, double gamma) {
            return hs_norm_partial(build_q_spec(kind, r, n_modes), gamma);
        },
        py::arg("kind"), py::arg("r"), py::arg("n_modes"), py::arg("gamma"));
    m.def(
        "mode_increments",
        [](NoiseKind kind, double r, int n_modes, int n_steps, double k, std::uint64_t seed) {
            return sample_mode_increments(build_q_spec(kind, r, n_modes), n_steps, k, seed).increments;
        },
        py::arg("kind"), py::arg("r"), py::arg("n_modes"), py::arg("n_steps"), py::arg("k"), py::arg("seed"),
        "Per-step, per-mode Wiener increments as an (n_steps, n_modes) array.");
    m.def(
        "coarsen",
        [](const RowMatrix& fine, int factor) {
            ModeIncrements inc;
            inc.n_steps = static_cast<int>(fine.rows());
            inc.k = 1.0;
            inc.increments = fine;
            return coarsen_increments(inc, factor).increments;
        },
        py::arg("increments"), py::arg("factor"));

    m.def("modal_propagator", &modal_propagator, py::arg("lam"), py::arg("alpha"), py::arg("t"));
    m.def(
        "modal_covariance",
        [](NoiseKind kind, double r, int n_modes, double t, double alpha) {
            return modal_exact_covariance(build_q_spec(kind, r, n_modes), t, alpha);
        },
        py::arg("kind"), py::arg("r"), py::arg("n_modes"), py::arg("t"), py::arg("alpha"));

    m.def(
        "simulate",
        [](int n_cells, double k, double final_time, double alpha, Nonlinearity nonlinearity, const Vector& u0,
           const Vector& v0, const std::optional<RowMatrix>& increments) {
            const Mesh1D mesh(n_cells);
            const SchemeConfig cfg(mesh, alpha, k, final_time, nonlinearity);
            const FemState w0{u0, v0, 0.0};
            Trajectory traj;
            if (increments) {
                ModeIncrements inc;
                inc.n_steps = static_cast<int>(increments->rows());
                inc.k = k;
                inc.increments = *increments;
                traj = run_stochastic(w0, inc, build_sine_load_table(mesh, inc.n_modes()), cfg);
            } else {
                if (nonlinearity != Nonlinearity::zero)
                    throw Error(ErrorKind::unsupported_input, "deterministic runs take the zero nonlinearity");
                traj = run_deterministic(w0, cfg);
            }
            Matrix u(traj.size(), mesh.n_interior());
            Matrix v(traj.size(), mesh.n_interior());
            for (std::size_t n = 0; n < traj.size(); ++n) {
                u.row(n) = traj[n].u.transpose();
                v.row(n) = traj[n].v.transpose();
            }
            return py::make_tuple(u, v);
        },
        py::arg("n_cells"), py::arg("k"), py::arg("final_time"), py::arg("alpha"), py::arg("nonlinearity"),
        py::arg("u0"), py::arg("v0"), py::arg("increments") = py::none(),
        "Runs the scheme and returns (U, V) with one row per time level.");

    m.def(
        "deterministic_spatial",
        [](const std::vector<int>& cells, double k, double alpha, double final_time, int mode) {
            return report_dict(deterministic_spatial_convergence(alpha, final_time, single_mode(mode), cells, k));
        },
        py::arg("cells"), py::arg("k"), py::arg("alpha") = 1.0, py::arg("final_time") = 1.0, py::arg("mode") = 1);
    m.def(
        "deterministic_temporal",
        [](int cells, const std::vector<double>& ks, double alpha, double final_time, int mode) {
            return report_dict(deterministic_temporal_convergence(alpha, final_time, single_mode(mode), cells, ks));
        },
        py::arg("cells"), py::arg("ks"), py::arg("alpha") = 1.0, py::arg("final_time") = 1.0, py::arg("mode") = 1);

    m.def(
        "convergence",
        [](const std::string& config_text, int threads) {
            const RunConfig cfg = parse_config(config_text);
            const StochasticSetup setup = make_setup(cfg, threads);
            std::vector<int> cells;
            for (double h : cfg.h_levels) cells.push_back(cells_for(h));
            py::gil_scoped_release release;
            ConvergenceReport r;
            if (cfg.command == Command::spatial)
                r = run_spatial_convergence(setup, cells, cells_for(cfg.h_ref), cfg.k_ref);
            else if (cfg.command == Command::temporal)
                r = run_temporal_convergence(setup, cells_for(cfg.h_ref), cfg.k_levels, cfg.k_ref);
            else
                throw Error(ErrorKind::configuration, "convergence needs command = spatial or temporal");
            py::gil_scoped_acquire acquire;
            return report_dict(r);
        },
        py::arg("config_text"), py::arg("threads") = 0,
        "Monte-Carlo convergence study described by a configuration text.");

    m.def(
        "energy_audit",
        [](int n_cells, double k, double final_time, double alpha, int samples, std::uint64_t seed) {
            const EnergyReport r = run_energy_audit(alpha, final_time, n_cells, k, samples, seed);
            py::dict d;
            d["ok"] = r.ok;
            d["samples"] = r.samples;
            d["steps"] = r.steps;
            d["min_relative_slack"] = r.min_relative_slack;
            return d;
        },
        py::arg("n_cells"), py::arg("k"), py::arg("final_time"), py::arg("alpha") = 1.0, py::arg("samples") = 100,
        py::arg("seed") = 20160722);

    m.def(
        "holder_exponents",
        [](const std::string& config_text, int threads) {
            const RunConfig cfg = parse_config(config_text);
            const StochasticSetup setup = make_setup(cfg, threads);
            const RegularityReport r = run_regularity(setup, cells_for(cfg.h_ref), cfg.k_ref,
                                                      HolderWindow{cfg.holder_min_lag_steps, cfg.holder_max_lag});
            py::dict d;
            d["u"] = r.exponent_u;
            d["v"] = r.exponent_v;
            d["lags"] = r.lags;
            d["rms_u"] = r.rms_u;
            d["rms_v"] = r.rms_v;
            return d;
        },
        py::arg("config_text"), py::arg("threads") = 0);

    m.def("config_echo", [](const std::string& text) { return config_echo(parse_config(text)); });
    m.def(
        "run",
        [](const std::string& config_text, const std::filesystem::path& out_dir, int threads) {
            std::ostringstream log;
            const int status = run_command(parse_config(config_text), RunOptions{out_dir, threads}, log);
            return py::make_tuple(status, log.str());
        },
        py::arg("config_text"), py::arg("out_dir"), py::arg("threads") = 0,
        "Runs one configured command like the CLI; returns (exit status, log text).");
}
