#include "sdwave/schemes.hpp"

#include "sdwave/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace sdwave {

namespace {

int integral_steps(double final_time, double k) {
    const double ratio = final_time / k;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
        throw Error(ErrorKind::configuration, "T / k = " + std::to_string(ratio) + " is not an integer");
    return static_cast<int>(rounded);
}

void require_state(const FemState& s, const Mesh1D& mesh) {
    if (s.u.size() != mesh.n_interior() || s.v.size() != mesh.n_interior())
        throw Error(ErrorKind::shape, "state does not match the mesh");
}

// (M + alpha k S + k^2 S) V^n = M V^{n-1} - k S U^{n-1} + extra; U^n = U^{n-1} + k V^n.
FemState implicit_step(const FemState& state, const Vector* extra, const SchemeConfig& cfg) {
    const double k = cfg.k();
    Vector rhs = cfg.mass().apply(state.v) - k * cfg.stiffness().apply(state.u);
    if (extra) rhs += *extra;
    cfg.system().solve_in_place(rhs);
    FemState next;
    next.u = state.u + k * rhs;
    next.v = std::move(rhs);
    next.t = state.t + k;
    return next;
}

} // namespace

SchemeConfig::SchemeConfig(const Mesh1D& mesh, double alpha, double k, double final_time,
                           Nonlinearity nonlinearity)
    : mesh_(mesh), alpha_(alpha), k_(k), final_time_(final_time), nonlinearity_(nonlinearity),
      mass_(assemble_mass(mesh)), stiffness_(assemble_stiffness(mesh)) {
    if (!(alpha > 0.0)) throw Error(ErrorKind::configuration, "damping alpha must be positive");
    if (!(k > 0.0)) throw Error(ErrorKind::configuration, "time step must be positive");
    if (!(final_time > 0.0)) throw Error(ErrorKind::configuration, "final time must be positive");
    if (k > final_time * (1.0 + 1e-12)) throw Error(ErrorKind::configuration, "time step exceeds T");
    system_ = std::make_shared<const TridiagonalFactor>(combine(mass_, 1.0, stiffness_, alpha * k + k * k));
}

int SchemeConfig::n_steps() const { return integral_steps(final_time_, k_); }

FemState deterministic_step(const FemState& state, const SchemeConfig& cfg) {
    if (cfg.nonlinearity() != Nonlinearity::zero)
        throw Error(ErrorKind::configuration, "deterministic step requires the zero nonlinearity");
    require_state(state, cfg.mesh());
    return implicit_step(state, nullptr, cfg);
}

FemState stochastic_step(const FemState& state, const Vector& noise_load, const SchemeConfig& cfg) {
    require_state(state, cfg.mesh());
    if (noise_load.size() != cfg.mesh().n_interior())
        throw Error(ErrorKind::shape, "noise load does not match the mesh");
    if (cfg.nonlinearity() == Nonlinearity::sine) {
        Vector extra = cfg.k() * sine_nonlinearity_load(state.u, cfg.mesh()) + noise_load;
        return implicit_step(state, &extra, cfg);
    }
    return implicit_step(state, &noise_load, cfg);
}

Vector sine_nonlinearity_load(const CoefVec& u, const Mesh1D& mesh) {
    const int n = mesh.n_interior();
    if (u.size() != n) throw Error(ErrorKind::shape, "coefficient vector does not match the mesh");
    const double h = mesh.h();
    Vector b = Vector::Zero(n);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double left = c >= 1 ? u[c - 1] : 0.0;
        const double right = c + 1 <= n ? u[c] : 0.0;
        double to_left = 0.0;
        double to_right = 0.0;
        for (int q = 0; q < 3; ++q) {
            const double xi = GaussRule3::nodes[q];
            const double w = -GaussRule3::weights[q] * h * std::sin((1.0 - xi) * left + xi * right);
            to_left += w * (1.0 - xi);
            to_right += w * xi;
        }
        if (c >= 1) b[c - 1] += to_left;
        if (c + 1 <= n) b[c] += to_right;
    }
    return b;
}

Trajectory run_deterministic(const FemState& w0, const SchemeConfig& cfg) {
    require_state(w0, cfg.mesh());
    const int steps = cfg.n_steps();
    Trajectory traj;
    traj.reserve(steps + 1);
    traj.push_back(w0);
    for (int n = 0; n < steps; ++n) traj.push_back(deterministic_step(traj.back(), cfg));
    return traj;
}

FemState simulate_stochastic(const FemState& w0, const ModeIncrements& inc, const SineLoadTable& table,
                             const SchemeConfig& cfg, const StepObserver& observer) {
    require_state(w0, cfg.mesh());
    const int steps = cfg.n_steps();
    if (inc.n_steps != steps || std::abs(inc.k - cfg.k()) > 1e-9 * cfg.k() ||
        std::abs(inc.n_steps * inc.k - cfg.final_time()) > 1e-9)
        throw Error(ErrorKind::configuration,
                    "increments cover " + std::to_string(inc.n_steps) + " steps of " + std::to_string(inc.k) +
                        ", scheme needs " + std::to_string(steps) + " steps of " + std::to_string(cfg.k()));
    if (table.n_interior() != cfg.mesh().n_interior() || table.n_modes() != inc.n_modes())
        throw Error(ErrorKind::shape, "load table does not match mesh or mode count");

    FemState state = w0;
    if (observer) observer(state);
    Vector load(cfg.mesh().n_interior());
    for (int n = 0; n < steps; ++n) {
        increments_to_load(inc.increments.row(n).transpose(), table, load);
        state = stochastic_step(state, load, cfg);
        if (observer) observer(state);
    }
    return state;
}

Trajectory run_stochastic(const FemState& w0, const ModeIncrements& inc, const SineLoadTable& table,
                          const SchemeConfig& cfg) {
    Trajectory traj;
    simulate_stochastic(w0, inc, table, cfg, [&traj](const FemState& s) { traj.push_back(s); });
    return traj;
}

Eigen::Matrix2d modal_propagator(double lambda, double alpha, double t) {
    // exp(At) = e^{mu t} [c(t) I + s(t) (A - mu I)], mu = -alpha lambda / 2,
    // delta^2 = mu^2 - lambda.
    Eigen::Matrix2d shifted;
    shifted << 0.5 * alpha * lambda, 1.0, -lambda, -0.5 * alpha * lambda;
    const double mu = -0.5 * alpha * lambda;
    const double disc = alpha * alpha * lambda * lambda - 4.0 * lambda;
    double ec = 0.0; // e^{mu t} c(t)
    double es = 0.0; // e^{mu t} s(t)
    if (t == 0.0) {
        ec = 1.0;
    } else if (std::abs(disc) < 1e-8 * alpha * alpha * lambda * lambda) {
        ec = std::exp(mu * t);
        es = t * ec;
    } else if (disc > 0.0) {
        const double delta = 0.5 * std::sqrt(disc);
        if (delta * t < 1.0) {
            const double e = std::exp(mu * t);
            ec = e * std::cosh(delta * t);
            es = e * std::sinh(delta * t) / delta;
        } else {
            const double r_minus = mu - delta;
            const double r_plus = lambda / r_minus; // product of the roots is lambda
            const double ep = std::exp(r_plus * t);
            const double em = std::exp(r_minus * t);
            ec = 0.5 * (ep + em);
            es = (ep - em) / (r_plus - r_minus);
        }
    } else {
        const double omega = 0.5 * std::sqrt(-disc);
        const double e = std::exp(mu * t);
        ec = e * std::cos(omega * t);
        es = e * std::sin(omega * t) / omega;
    }
    return ec * Eigen::Matrix2d::Identity() + es * shifted;
}

ModalState spectral_exact_linear(const ModalState& m0, double t, double alpha) {
    if (m0.a.size() != m0.b.size()) throw Error(ErrorKind::shape, "modal state components differ in length");
    if (!(t >= 0.0)) throw Error(ErrorKind::domain, "time must be nonnegative");
    ModalState out{Vector(m0.a.size()), Vector(m0.b.size())};
    for (Eigen::Index j = 0; j < m0.a.size(); ++j) {
        const double root = (j + 1) * std::numbers::pi;
        const Eigen::Matrix2d p = modal_propagator(root * root, alpha, t);
        out.a[j] = p(0, 0) * m0.a[j] + p(0, 1) * m0.b[j];
        out.b[j] = p(1, 0) * m0.a[j] + p(1, 1) * m0.b[j];
    }
    return out;
}

std::vector<Eigen::Matrix2d> modal_exact_covariance(const QSpec& q, double t, double alpha) {
    if (!(t >= 0.0)) throw Error(ErrorKind::domain, "time must be nonnegative");
    std::vector<Eigen::Matrix2d> out(q.n_modes, Eigen::Matrix2d::Zero());
    if (t == 0.0) return out;
    for (int j = 0; j < q.n_modes; ++j) {
        const double lambda = q.mode_eigvals[j];
        // Sigma(t) = Sigma_inf - e^{At} Sigma_inf e^{A't}, with the stationary
        // Lyapunov solution Sigma_inf = diag(q / (2 alpha lambda^2), q / (2 alpha lambda)).
        const Eigen::Matrix2d stationary =
            Eigen::Vector2d(1.0 / (2.0 * alpha * lambda * lambda), 1.0 / (2.0 * alpha * lambda)).asDiagonal();
        const Eigen::Matrix2d p = modal_propagator(lambda, alpha, t);
        Eigen::Matrix2d cov = stationary - p * stationary * p.transpose();
        cov(1, 0) = cov(0, 1);
        out[j] = q.mode_weights[j] * cov;
    }
    return out;
}

FemState project_modal_state(const ModalState& m, const Mesh1D& mesh) {
    Vector load_u = Vector::Zero(mesh.n_interior());
    Vector load_v = Vector::Zero(mesh.n_interior());
    for (Eigen::Index j = 0; j < m.a.size(); ++j) {
        if (m.a[j] != 0.0) load_u += sine_mode_load(static_cast<int>(j + 1), mesh, m.a[j]);
        if (m.b[j] != 0.0) load_v += sine_mode_load(static_cast<int>(j + 1), mesh, m.b[j]);
    }
    const TridiagonalFactor mass(assemble_mass(mesh));
    return {mass.solve(load_u), mass.solve(load_v), 0.0};
}

FemState interpolate_modal_state(const ModalState& m, const Mesh1D& mesh) {
    FemState s = FemState::zero(mesh);
    for (int i = 0; i < mesh.n_interior(); ++i) {
        const double x = mesh.node(i);
        for (Eigen::Index j = 0; j < m.a.size(); ++j) {
            const double e = std::numbers::sqrt2 * std::sin((j + 1) * std::numbers::pi * x);
            s.u[i] += m.a[j] * e;
            s.v[i] += m.b[j] * e;
        }
    }
    return s;
}

} // namespace sdwave
