#pragma once

#include <Eigen/Dense>

#include <vector>

namespace sdwave {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Symmetric tridiagonal matrix stored as its diagonal and one off-diagonal.
struct SymTridiagonal {
    Vector diag;
    Vector off; // length dim - 1

    SymTridiagonal() = default;
    SymTridiagonal(Vector d, Vector o);

    int dim() const { return static_cast<int>(diag.size()); }

    Vector apply(const Vector& x) const;
    /// x^T A y without forming the dense matrix.
    double quadratic(const Vector& x, const Vector& y) const;
    double norm_inf() const;
    Matrix to_dense() const;
};

/// sa * a + sb * b, entrywise on the stored bands.
SymTridiagonal combine(const SymTridiagonal& a, double sa, const SymTridiagonal& b, double sb);

/// LDL^T factorization of an SPD tridiagonal matrix, reusable across solves.
class TridiagonalFactor {
public:
    explicit TridiagonalFactor(const SymTridiagonal& a);

    int dim() const { return static_cast<int>(pivots_.size()); }
    Vector solve(const Vector& b) const;
    /// In-place variant for hot loops.
    void solve_in_place(Vector& x) const;

private:
    Vector pivots_;
    Vector lower_; // unit lower bidiagonal multipliers
};

Vector solve_sym_tridiag(const SymTridiagonal& a, const Vector& b);

/// Dense symmetric matrix; used as an oracle representation in tests.
struct DenseSym {
    Matrix entries;

    explicit DenseSym(Matrix m);
    int dim() const { return static_cast<int>(entries.rows()); }
};

/// Gaussian elimination with partial pivoting.
Vector solve_dense(const DenseSym& a, const Vector& b);

/// Generalized eigenpairs of the pencil (S, M): S v = lambda M v with the
/// columns of eigvecs M-orthonormal and eigvals ascending.
struct SpectralDecomp {
    Vector eigvals;
    Matrix eigvecs;

    int dim() const { return static_cast<int>(eigvals.size()); }
    /// Coordinates c_j = v_j^T M x.
    Vector coordinates(const Vector& x, const SymTridiagonal& mass) const;
};

SpectralDecomp gen_sym_eig(const SymTridiagonal& stiffness, const SymTridiagonal& mass);

} // namespace sdwave
