#pragma once

#include "sdwave/fem.hpp"
#include "sdwave/noise.hpp"

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <vector>

namespace sdwave {

enum class Nonlinearity { zero, sine };

/// Displacement and velocity coefficients at one time level.
struct FemState {
    CoefVec u;
    CoefVec v;
    double t = 0.0;

    static FemState zero(const Mesh1D& mesh) {
        return {CoefVec::Zero(mesh.n_interior()), CoefVec::Zero(mesh.n_interior()), 0.0};
    }
};

using Trajectory = std::vector<FemState>;

/// Discretization parameters plus the assembled matrices. The factorization of
/// M + (alpha k + k^2) S is built once and shared read-only.
class SchemeConfig {
public:
    SchemeConfig(const Mesh1D& mesh, double alpha, double k, double final_time,
                 Nonlinearity nonlinearity = Nonlinearity::zero);

    const Mesh1D& mesh() const { return mesh_; }
    double alpha() const { return alpha_; }
    double k() const { return k_; }
    double final_time() const { return final_time_; }
    Nonlinearity nonlinearity() const { return nonlinearity_; }
    const SymTridiagonal& mass() const { return mass_; }
    const SymTridiagonal& stiffness() const { return stiffness_; }
    const TridiagonalFactor& system() const { return *system_; }

    /// T / k, required to be an integer within 1e-9.
    int n_steps() const;

private:
    Mesh1D mesh_;
    double alpha_;
    double k_;
    double final_time_;
    Nonlinearity nonlinearity_;
    SymTridiagonal mass_;
    SymTridiagonal stiffness_;
    std::shared_ptr<const TridiagonalFactor> system_;
};

/// One linear implicit Euler step with F = 0 and no noise.
FemState deterministic_step(const FemState& state, const SchemeConfig& cfg);

/// One step of the full scheme. `noise_load` is the raw hat-integral load of
/// the Wiener increment; the nonlinearity is evaluated at the previous level.
FemState stochastic_step(const FemState& state, const Vector& noise_load, const SchemeConfig& cfg);

/// Raw load b_i = \int -sin(u_h) phi_i by 3-point Gauss per cell.
Vector sine_nonlinearity_load(const CoefVec& u, const Mesh1D& mesh);

Trajectory run_deterministic(const FemState& w0, const SchemeConfig& cfg);

using StepObserver = std::function<void(const FemState&)>;

/// Runs the stochastic scheme, invoking `observer` (if set) on every level
/// including the initial one, and returns the terminal state.
FemState simulate_stochastic(const FemState& w0, const ModeIncrements& inc, const SineLoadTable& table,
                             const SchemeConfig& cfg, const StepObserver& observer = {});

Trajectory run_stochastic(const FemState& w0, const ModeIncrements& inc, const SineLoadTable& table,
                          const SchemeConfig& cfg);

/// u = sum_j a_j e_j, u_t = sum_j b_j e_j with e_j = sqrt(2) sin(j pi x);
/// entry j - 1 belongs to lambda_j = (j pi)^2.
struct ModalState {
    Vector a;
    Vector b;
};

/// exp(t [[0, 1], [-lambda, -alpha lambda]]).
Eigen::Matrix2d modal_propagator(double lambda, double alpha, double t);

ModalState spectral_exact_linear(const ModalState& m0, double t, double alpha);

/// Per-mode covariance of (u_j(t), u_t,j(t)) for the stochastic convolution.
std::vector<Eigen::Matrix2d> modal_exact_covariance(const QSpec& q, double t, double alpha);

/// P_h of both components, using exact sine loads.
FemState project_modal_state(const ModalState& m, const Mesh1D& mesh);
/// Nodal values of both components.
FemState interpolate_modal_state(const ModalState& m, const Mesh1D& mesh);

} // namespace sdwave
