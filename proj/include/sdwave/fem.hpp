#pragma once

#include "sdwave/linalg.hpp"

#include <functional>
#include <vector>

namespace sdwave {

/// Coefficients of a piecewise-linear function in the interior hat basis.
using CoefVec = Vector;

/// Uniform partition of (0,1). Only interior nodes carry unknowns; the
/// boundary values are identically zero.
class Mesh1D {
public:
    explicit Mesh1D(int n_cells);

    int n_cells() const { return n_cells_; }
    int n_interior() const { return n_cells_ - 1; }
    double h() const { return h_; }
    /// Interior node i (0-based), located at (i + 1) h.
    double node(int i) const { return (i + 1) * h_; }
    std::vector<double> interior_nodes() const;

    friend bool operator==(const Mesh1D& a, const Mesh1D& b) { return a.n_cells_ == b.n_cells_; }

private:
    int n_cells_;
    double h_;
};

Mesh1D build_mesh(int n_cells);

SymTridiagonal assemble_stiffness(const Mesh1D& mesh);
SymTridiagonal assemble_mass(const Mesh1D& mesh);

using ScalarFunction = std::function<double(double)>;

/// A function on (0,1) given pointwise, optionally with its derivative.
struct SmoothFunction {
    ScalarFunction value;
    ScalarFunction derivative; // may be empty
};

/// b_i = \int f phi_i by composite 3-point Gauss-Legendre per cell.
Vector load_vector(const ScalarFunction& f, const Mesh1D& mesh);

/// b_i = \int amplitude * sqrt(2) sin(j pi x) phi_i dx in closed form.
Vector sine_mode_load(int mode, const Mesh1D& mesh, double amplitude = 1.0);

/// L2 projection P_h f: solves M c = b.
CoefVec l2_project(const ScalarFunction& f, const Mesh1D& mesh);
/// P_h of amplitude * sqrt(2) sin(j pi x), with exact loads.
CoefVec l2_project_sine(int mode, const Mesh1D& mesh, double amplitude = 1.0);

/// Ritz projection R_h f: solves S c = b with b_i = \int f' phi_i'.
CoefVec ritz_project(const SmoothFunction& f, const Mesh1D& mesh);
/// Ritz projection of a piecewise-linear function living on a nested finer mesh.
CoefVec ritz_project(const CoefVec& fine, const Mesh1D& fine_mesh, const Mesh1D& mesh);

double discrete_l2_norm(const CoefVec& v, const SymTridiagonal& mass);

/// ||A_h^{s/2} v|| for s in [-2, 2], through the pencil's eigenbasis.
double discrete_fractional_norm(const CoefVec& v, double s, const SpectralDecomp& decomp,
                                const SymTridiagonal& mass);

double eval_fem_function(const CoefVec& v, const Mesh1D& mesh, double x);

/// Nodal restriction onto a nested coarser mesh: picks the fine values at the
/// coarse nodes.
CoefVec restrict_to_coarse(const CoefVec& fine, const Mesh1D& fine_mesh, const Mesh1D& coarse_mesh);
/// Exact embedding of a coarse P1 function into a nested finer mesh (linear interpolation).
CoefVec prolong_to_fine(const CoefVec& coarse, const Mesh1D& coarse_mesh, const Mesh1D& fine_mesh);

/// Three-point Gauss-Legendre rule on [0,1].
struct GaussRule3 {
    static constexpr double nodes[3] = {0.11270166537925831148, 0.5, 0.88729833462074168852};
    static constexpr double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
};

} // namespace sdwave
