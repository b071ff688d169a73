#include "sdwave/linalg.hpp"

#include "sdwave/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <string>
#include <utility>

namespace sdwave {

namespace {

void require_dims(int expected, Eigen::Index got, const char* what) {
    if (got != expected)
        throw Error(ErrorKind::shape, std::string(what) + ": expected length " +
                                          std::to_string(expected) + ", got " + std::to_string(got));
}

} // namespace

SymTridiagonal::SymTridiagonal(Vector d, Vector o) : diag(std::move(d)), off(std::move(o)) {
    if (diag.size() < 1)
        throw Error(ErrorKind::shape, "tridiagonal matrix needs dim >= 1");
    require_dims(dim() - 1, off.size(), "off-diagonal");
}

Vector SymTridiagonal::apply(const Vector& x) const {
    require_dims(dim(), x.size(), "tridiagonal apply");
    const int n = dim();
    Vector y(n);
    for (int i = 0; i < n; ++i) {
        double acc = diag[i] * x[i];
        if (i > 0) acc += off[i - 1] * x[i - 1];
        if (i + 1 < n) acc += off[i] * x[i + 1];
        y[i] = acc;
    }
    return y;
}

double SymTridiagonal::quadratic(const Vector& x, const Vector& y) const {
    require_dims(dim(), x.size(), "quadratic form");
    require_dims(dim(), y.size(), "quadratic form");
    const int n = dim();
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
        acc += diag[i] * x[i] * y[i];
        if (i + 1 < n) acc += off[i] * (x[i] * y[i + 1] + x[i + 1] * y[i]);
    }
    return acc;
}

double SymTridiagonal::norm_inf() const {
    const int n = dim();
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
        double row = std::abs(diag[i]);
        if (i > 0) row += std::abs(off[i - 1]);
        if (i + 1 < n) row += std::abs(off[i]);
        best = std::max(best, row);
    }
    return best;
}

Matrix SymTridiagonal::to_dense() const {
    const int n = dim();
    Matrix a = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        a(i, i) = diag[i];
        if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = off[i];
    }
    return a;
}

SymTridiagonal combine(const SymTridiagonal& a, double sa, const SymTridiagonal& b, double sb) {
    require_dims(a.dim(), b.dim(), "combine");
    return SymTridiagonal(sa * a.diag + sb * b.diag, sa * a.off + sb * b.off);
}

TridiagonalFactor::TridiagonalFactor(const SymTridiagonal& a) {
    const int n = a.dim();
    pivots_.resize(n);
    lower_.resize(std::max(n - 1, 0));
    pivots_[0] = a.diag[0];
    for (int i = 0; i < n; ++i) {
        if (i > 0) {
            lower_[i - 1] = a.off[i - 1] / pivots_[i - 1];
            pivots_[i] = a.diag[i] - lower_[i - 1] * a.off[i - 1];
        }
        if (!(pivots_[i] > 0.0))
            throw Error(ErrorKind::not_positive_definite,
                        "nonpositive pivot at row " + std::to_string(i));
    }
}

void TridiagonalFactor::solve_in_place(Vector& x) const {
    require_dims(dim(), x.size(), "tridiagonal solve");
    const int n = dim();
    for (int i = 1; i < n; ++i) x[i] -= lower_[i - 1] * x[i - 1];
    for (int i = 0; i < n; ++i) x[i] /= pivots_[i];
    for (int i = n - 2; i >= 0; --i) x[i] -= lower_[i] * x[i + 1];
}

Vector TridiagonalFactor::solve(const Vector& b) const {
    Vector x = b;
    solve_in_place(x);
    return x;
}

Vector solve_sym_tridiag(const SymTridiagonal& a, const Vector& b) {
    require_dims(a.dim(), b.size(), "tridiagonal solve");
    return TridiagonalFactor(a).solve(b);
}

DenseSym::DenseSym(Matrix m) : entries(std::move(m)) {
    if (entries.rows() != entries.cols() || entries.rows() < 1)
        throw Error(ErrorKind::shape, "dense symmetric matrix must be square and nonempty");
    const double scale = std::max(entries.cwiseAbs().maxCoeff(), 1e-300);
    if ((entries - entries.transpose()).cwiseAbs().maxCoeff() > 1e-14 * scale)
        throw Error(ErrorKind::shape, "matrix is not symmetric");
}

Vector solve_dense(const DenseSym& a, const Vector& b) {
    const int n = a.dim();
    require_dims(n, b.size(), "dense solve");
    Matrix lu = a.entries;
    Vector x = b;
    const double tiny = lu.cwiseAbs().maxCoeff() * n * 1e-15;
    for (int col = 0; col < n; ++col) {
        Eigen::Index piv = col;
        lu.col(col).tail(n - col).cwiseAbs().maxCoeff(&piv);
        piv += col;
        if (std::abs(lu(piv, col)) <= tiny)
            throw Error(ErrorKind::singular_matrix,
                        "pivot below working precision in column " + std::to_string(col));
        if (piv != col) {
            lu.row(piv).swap(lu.row(col));
            std::swap(x[piv], x[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            const double f = lu(r, col) / lu(col, col);
            if (f == 0.0) continue;
            lu.row(r).tail(n - col) -= f * lu.row(col).tail(n - col);
            x[r] -= f * x[col];
        }
    }
    for (int r = n - 1; r >= 0; --r) {
        double acc = x[r];
        for (int c = r + 1; c < n; ++c) acc -= lu(r, c) * x[c];
        x[r] = acc / lu(r, r);
    }
    return x;
}

Vector SpectralDecomp::coordinates(const Vector& x, const SymTridiagonal& mass) const {
    require_dims(dim(), x.size(), "spectral coordinates");
    require_dims(dim(), mass.dim(), "spectral coordinates (mass)");
    return eigvecs.transpose() * mass.apply(x);
}

SpectralDecomp gen_sym_eig(const SymTridiagonal& stiffness, const SymTridiagonal& mass) {
    require_dims(stiffness.dim(), mass.dim(), "generalized eigenproblem");
    // Validates M > 0 before handing the pencil to the Cholesky-reduced solver.
    TridiagonalFactor check(mass);
    (void)check;

    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(
        stiffness.to_dense(), mass.to_dense(), Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
    if (solver.info() != Eigen::Success)
        throw Error(ErrorKind::not_positive_definite, "generalized eigensolver failed");
    return SpectralDecomp{solver.eigenvalues(), solver.eigenvectors()};
}

} // namespace sdwave
