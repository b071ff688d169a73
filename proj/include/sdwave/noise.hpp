#pragma once

#include "sdwave/fem.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace sdwave {

enum class NoiseKind { white, fractional };

/// Truncated spectral description of the covariance Q over the Dirichlet
/// Laplacian eigenpairs e_j = sqrt(2) sin(j pi x), lambda_j = (j pi)^2.
struct QSpec {
    NoiseKind kind = NoiseKind::white;
    double r = 0.0;
    int n_modes = 0;
    Vector mode_weights; // q_j
    Vector mode_eigvals; // lambda_j
};

/// white: q_j = 1; fractional: q_j = lambda_j^{-r}.
QSpec build_q_spec(NoiseKind kind, double r, int n_modes);

/// (sum_{j <= J} lambda_j^{gamma - 1} q_j)^{1/2}.
double hs_norm_partial(const QSpec& q, double gamma);

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-step, per-mode Wiener increments sqrt(q_j) * (beta_j(t_n) - beta_j(t_{n-1})).
struct ModeIncrements {
    int n_steps = 0;
    double k = 0.0;
    std::uint64_t seed = 0;
    RowMatrix increments; // n_steps x J

    int n_modes() const { return static_cast<int>(increments.cols()); }
};

/// Entry (n, j) depends only on (seed, j, n).
ModeIncrements sample_mode_increments(const QSpec& q, int n_steps, double k, std::uint64_t seed);

/// Sums consecutive blocks of `factor` fine steps.
ModeIncrements coarsen_increments(const ModeIncrements& fine, int factor);

/// G(i, j) = \int sqrt(2) sin(j pi x) phi_i(x) dx, closed form.
struct SineLoadTable {
    RowMatrix G; // n_interior x J

    int n_interior() const { return static_cast<int>(G.rows()); }
    int n_modes() const { return static_cast<int>(G.cols()); }
};

SineLoadTable build_sine_load_table(const Mesh1D& mesh, int n_modes);

/// Raw load b = G * row (the hat-integrals of the noise increment); M^{-1} is
/// not applied.
Vector increments_to_load(const Eigen::Ref<const Vector>& inc_row, const SineLoadTable& table);
void increments_to_load(const Eigen::Ref<const Vector>& inc_row, const SineLoadTable& table, Vector& out);

/// Binary dump: magic "SDWINC\0\0", u32 version, u32 J, u64 n_steps, f64 k,
/// u64 seed, then n_steps * J row-major f64. All little-endian.
void write_increments(std::ostream& os, const ModeIncrements& inc);
ModeIncrements read_increments(std::istream& is);

} // namespace sdwave
