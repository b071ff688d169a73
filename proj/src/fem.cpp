#include "sdwave/fem.hpp"

#include "sdwave/error.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace sdwave {

namespace {

void require_length(const CoefVec& v, const Mesh1D& mesh, const char* what) {
    if (v.size() != mesh.n_interior())
        throw Error(ErrorKind::shape, std::string(what) + ": coefficient vector has length " +
                                          std::to_string(v.size()) + ", mesh has " +
                                          std::to_string(mesh.n_interior()) + " interior nodes");
}

// Value at global node index g in 0..n_cells (boundary nodes are zero).
double nodal(const CoefVec& v, int g, int n_cells) {
    return (g <= 0 || g >= n_cells) ? 0.0 : v[g - 1];
}

double checked(double value, double x, const char* what) {
    if (!std::isfinite(value))
        throw Error(ErrorKind::evaluation, std::string("non-finite ") + what + " at x = " + std::to_string(x));
    return value;
}

using ProjectionRule = boost::math::quadrature::gauss<double, 10>;

// Loads \int g phi_i with a 10-point Gauss rule on each cell, for the projections.
Vector accurate_load(const ScalarFunction& g, const Mesh1D& mesh, const char* what) {
    const int n = mesh.n_interior();
    const double h = mesh.h();
    Vector b = Vector::Zero(n);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double x0 = c * h;
        auto value = [&](double xi) { return checked(g(x0 + xi * h), x0 + xi * h, what); };
        if (c >= 1) b[c - 1] += h * ProjectionRule::integrate([&](double xi) { return value(xi) * (1.0 - xi); }, 0.0, 1.0);
        if (c + 1 <= n) b[c] += h * ProjectionRule::integrate([&](double xi) { return value(xi) * xi; }, 0.0, 1.0);
    }
    return b;
}

} // namespace

Mesh1D::Mesh1D(int n_cells) : n_cells_(n_cells), h_(0.0) {
    if (n_cells < 2)
        throw Error(ErrorKind::invalid_mesh,
                    "need at least 2 cells for an interior node, got " + std::to_string(n_cells));
    h_ = 1.0 / n_cells;
}

std::vector<double> Mesh1D::interior_nodes() const {
    std::vector<double> x(n_interior());
    for (int i = 0; i < n_interior(); ++i) x[i] = node(i);
    return x;
}

Mesh1D build_mesh(int n_cells) { return Mesh1D(n_cells); }

SymTridiagonal assemble_stiffness(const Mesh1D& mesh) {
    const int n = mesh.n_interior();
    const double h = mesh.h();
    return SymTridiagonal(Vector::Constant(n, 2.0 / h), Vector::Constant(n - 1, -1.0 / h));
}

SymTridiagonal assemble_mass(const Mesh1D& mesh) {
    const int n = mesh.n_interior();
    const double h = mesh.h();
    return SymTridiagonal(Vector::Constant(n, 2.0 * h / 3.0), Vector::Constant(n - 1, h / 6.0));
}

Vector load_vector(const ScalarFunction& f, const Mesh1D& mesh) {
    const int n = mesh.n_interior();
    const double h = mesh.h();
    Vector b = Vector::Zero(n);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double x0 = c * h;
        for (int q = 0; q < 3; ++q) {
            const double xi = GaussRule3::nodes[q];
            const double fx = f(x0 + xi * h);
            if (!std::isfinite(fx))
                throw Error(ErrorKind::evaluation,
                            "non-finite integrand value at x = " + std::to_string(x0 + xi * h));
            const double w = GaussRule3::weights[q] * h * fx;
            // cell c spans global nodes c (left) and c + 1 (right)
            if (c >= 1) b[c - 1] += w * (1.0 - xi);
            if (c + 1 <= n) b[c] += w * xi;
        }
    }
    return b;
}

Vector sine_mode_load(int mode, const Mesh1D& mesh, double amplitude) {
    // \int sin(w x) phi_i dx = sin(w x_i) * h * sinc^2(w h / 2)
    const double w = mode * std::numbers::pi;
    const double h = mesh.h();
    const double half = 0.5 * w * h;
    const double sinc = std::sin(half) / half;
    const double factor = amplitude * std::numbers::sqrt2 * h * sinc * sinc;
    Vector b(mesh.n_interior());
    for (int i = 0; i < mesh.n_interior(); ++i) b[i] = factor * std::sin(w * mesh.node(i));
    return b;
}

CoefVec l2_project(const ScalarFunction& f, const Mesh1D& mesh) {
    return solve_sym_tridiag(assemble_mass(mesh), accurate_load(f, mesh, "integrand value"));
}

CoefVec l2_project_sine(int mode, const Mesh1D& mesh, double amplitude) {
    return solve_sym_tridiag(assemble_mass(mesh), sine_mode_load(mode, mesh, amplitude));
}

CoefVec ritz_project(const SmoothFunction& f, const Mesh1D& mesh) {
    if (!f.derivative)
        throw Error(ErrorKind::unsupported_input, "Ritz projection needs the derivative of f");
    const int n = mesh.n_interior();
    const double h = mesh.h();
    Vector b = Vector::Zero(n);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const double x0 = c * h;
        const double integral =
            h * ProjectionRule::integrate(
                    [&](double xi) { return checked(f.derivative(x0 + xi * h), x0 + xi * h, "derivative value"); },
                    0.0, 1.0);
        // phi' is +1/h on the cell for the right node's hat, -1/h for the left's
        if (c >= 1) b[c - 1] -= integral / h;
        if (c + 1 <= n) b[c] += integral / h;
    }
    return solve_sym_tridiag(assemble_stiffness(mesh), b);
}

CoefVec ritz_project(const CoefVec& fine, const Mesh1D& fine_mesh, const Mesh1D& mesh) {
    require_length(fine, fine_mesh, "ritz_project");
    if (fine_mesh.n_cells() % mesh.n_cells() != 0)
        throw Error(ErrorKind::invalid_mesh, "fine mesh is not nested in the target mesh");
    const int ratio = fine_mesh.n_cells() / mesh.n_cells();
    const int n = mesh.n_interior();
    const double h = mesh.h();
    Vector b = Vector::Zero(n);
    for (int c = 0; c < mesh.n_cells(); ++c) {
        // \int_cell f' = f(right) - f(left), exact for the piecewise-linear f.
        const double integral = nodal(fine, (c + 1) * ratio, fine_mesh.n_cells()) -
                                nodal(fine, c * ratio, fine_mesh.n_cells());
        if (c >= 1) b[c - 1] -= integral / h;
        if (c + 1 <= n) b[c] += integral / h;
    }
    return solve_sym_tridiag(assemble_stiffness(mesh), b);
}

double discrete_l2_norm(const CoefVec& v, const SymTridiagonal& mass) {
    return std::sqrt(std::max(mass.quadratic(v, v), 0.0));
}

double discrete_fractional_norm(const CoefVec& v, double s, const SpectralDecomp& decomp,
                                const SymTridiagonal& mass) {
    if (!(s >= -2.0 && s <= 2.0))
        throw Error(ErrorKind::domain, "fractional exponent must lie in [-2, 2]");
    if (decomp.dim() != mass.dim() || v.size() != mass.dim())
        throw Error(ErrorKind::shape, "decomposition, mass matrix and vector dimensions differ");
    const Vector c = decomp.coordinates(v, mass);
    double acc = 0.0;
    for (int j = 0; j < decomp.dim(); ++j) acc += std::pow(decomp.eigvals[j], s) * c[j] * c[j];
    return std::sqrt(acc);
}

double eval_fem_function(const CoefVec& v, const Mesh1D& mesh, double x) {
    require_length(v, mesh, "eval_fem_function");
    if (!(x >= 0.0 && x <= 1.0))
        throw Error(ErrorKind::domain, "evaluation point outside [0, 1]");
    const int n = mesh.n_cells();
    const double s = x * n;
    int c = static_cast<int>(std::floor(s));
    if (c >= n) c = n - 1;
    const double xi = s - c;
    return (1.0 - xi) * nodal(v, c, n) + xi * nodal(v, c + 1, n);
}

CoefVec restrict_to_coarse(const CoefVec& fine, const Mesh1D& fine_mesh, const Mesh1D& coarse_mesh) {
    require_length(fine, fine_mesh, "restrict_to_coarse");
    if (fine_mesh.n_cells() % coarse_mesh.n_cells() != 0)
        throw Error(ErrorKind::invalid_mesh, "meshes are not nested");
    const int ratio = fine_mesh.n_cells() / coarse_mesh.n_cells();
    CoefVec out(coarse_mesh.n_interior());
    for (int i = 0; i < coarse_mesh.n_interior(); ++i) out[i] = fine[(i + 1) * ratio - 1];
    return out;
}

CoefVec prolong_to_fine(const CoefVec& coarse, const Mesh1D& coarse_mesh, const Mesh1D& fine_mesh) {
    require_length(coarse, coarse_mesh, "prolong_to_fine");
    if (fine_mesh.n_cells() % coarse_mesh.n_cells() != 0)
        throw Error(ErrorKind::invalid_mesh, "meshes are not nested");
    const int ratio = fine_mesh.n_cells() / coarse_mesh.n_cells();
    const int nc = coarse_mesh.n_interior();
    CoefVec out(fine_mesh.n_interior());
    for (int i = 0; i < fine_mesh.n_interior(); ++i) {
        // fine node i + 1 sits in coarse cell c at fraction t
        const int c = (i + 1) / ratio;
        const double t = static_cast<double>((i + 1) % ratio) / ratio;
        const double left = c >= 1 ? coarse[c - 1] : 0.0;
        const double right = c < nc ? coarse[c] : 0.0;
        out[i] = (1.0 - t) * left + t * right;
    }
    return out;
}

} // namespace sdwave
