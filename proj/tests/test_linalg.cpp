#include <doctest.h>

#include "sdwave/error.hpp"
#include "sdwave/fem.hpp"
#include "sdwave/linalg.hpp"
#include "test_support.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace sdwave;
using sdwave::test::kind_of;
using sdwave::test::random_vector;

namespace {

SymTridiagonal random_spd_tridiag(int n, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> off_dist(-1.0, 1.0);
    std::uniform_real_distribution<double> margin(0.1, 1.0);
    Vector off(n - 1);
    for (int i = 0; i < n - 1; ++i) off[i] = off_dist(rng);
    Vector diag(n);
    for (int i = 0; i < n; ++i)
        diag[i] = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0) + margin(rng);
    return SymTridiagonal(diag, off);
}

} // namespace

TEST_SUITE("linalg") {

TEST_CASE("identity tridiagonal solve returns the right-hand side") {
    const SymTridiagonal id(Vector::Ones(5), Vector::Zero(4));
    Vector b(5);
    b << 1.5, -2.0, 3.25, 0.0, 7.0;
    CHECK((solve_sym_tridiag(id, b) - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("2x2 tridiagonal solve matches hand elimination") {
    Vector diag(2), off(1), b(2);
    diag << 4, 4;
    off << -1;
    b << 1, 0;
    const Vector x = solve_sym_tridiag(SymTridiagonal(diag, off), b);
    CHECK(x[0] == doctest::Approx(4.0 / 15.0).epsilon(1e-14));
    CHECK(x[1] == doctest::Approx(1.0 / 15.0).epsilon(1e-14));
}

TEST_CASE("tridiagonal solver meets the residual contract and agrees with the dense oracle") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> dims(1, 200);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = trial == 0 ? 50 : dims(rng);
        const SymTridiagonal a = random_spd_tridiag(n, rng);
        const Vector b = random_vector(n, rng);
        const Vector x = solve_sym_tridiag(a, b);
        const double residual = (a.apply(x) - b).cwiseAbs().maxCoeff();
        CHECK(residual <= 1e-10 * (a.norm_inf() * x.cwiseAbs().maxCoeff() + b.cwiseAbs().maxCoeff()));
        const Vector oracle = solve_dense(DenseSym(a.to_dense()), b);
        CHECK((x - oracle).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("factor can be reused across right-hand sides") {
    std::mt19937_64 rng(11);
    const SymTridiagonal a = random_spd_tridiag(30, rng);
    const TridiagonalFactor f(a);
    for (int i = 0; i < 3; ++i) {
        const Vector b = random_vector(30, rng);
        CHECK((f.solve(b) - solve_sym_tridiag(a, b)).norm() == 0.0);
    }
}

TEST_CASE("tridiagonal solve errors") {
    Vector diag(2), off(1);
    diag << 1, 1;
    off << 2; // indefinite
    CHECK(kind_of([&] { solve_sym_tridiag(SymTridiagonal(diag, off), Vector::Ones(2)); }) ==
          ErrorKind::not_positive_definite);
    CHECK(kind_of([&] { solve_sym_tridiag(SymTridiagonal(Vector::Ones(3), Vector::Zero(2)), Vector::Ones(2)); }) ==
          ErrorKind::shape);
    CHECK(kind_of([&] { SymTridiagonal(Vector::Ones(3), Vector::Zero(1)); }) == ErrorKind::shape);
}

TEST_CASE("dense solver") {
    SUBCASE("identity") {
        const Vector b = Vector::LinSpaced(4, 1.0, 4.0);
        CHECK((solve_dense(DenseSym(Matrix::Identity(4, 4)), b) - b).norm() == 0.0);
    }
    SUBCASE("symmetric forced solution") {
        Matrix a(2, 2);
        a << 2, 1, 1, 2;
        const Vector x = solve_dense(DenseSym(a), Vector::Constant(2, 3.0));
        CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-15));
    }
    SUBCASE("random SPD 20x20 residual") {
        std::mt19937_64 rng(3);
        Matrix g(20, 20);
        for (int i = 0; i < 20; ++i)
            for (int j = 0; j < 20; ++j) g(i, j) = std::normal_distribution<double>()(rng);
        const Matrix a = g * g.transpose() + 20.0 * Matrix::Identity(20, 20);
        const Vector b = random_vector(20, rng);
        const Vector x = solve_dense(DenseSym(a), b);
        CHECK((a * x - b).norm() <= 1e-10 * (a.norm() * x.norm() + b.norm()));
    }
    SUBCASE("singular matrix") {
        Matrix a(2, 2);
        a << 1, 1, 1, 1;
        CHECK(kind_of([&] { solve_dense(DenseSym(a), Vector::Ones(2)); }) == ErrorKind::singular_matrix);
    }
    SUBCASE("asymmetric input is rejected") {
        Matrix a(2, 2);
        a << 1, 2, 0, 1;
        CHECK(kind_of([&] { DenseSym{a}; }) == ErrorKind::shape);
    }
}

TEST_CASE("generalized eigenproblem: identity pencil") {
    const Mesh1D mesh(6);
    const SymTridiagonal m = assemble_mass(mesh);
    const SpectralDecomp d = gen_sym_eig(m, m);
    for (int j = 0; j < d.dim(); ++j) CHECK(d.eigvals[j] == doctest::Approx(1.0).epsilon(1e-12));
    const Matrix gram = d.eigvecs.transpose() * m.to_dense() * d.eigvecs;
    CHECK((gram - Matrix::Identity(d.dim(), d.dim())).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("generalized eigenproblem: scalar ratio") {
    Vector s(1), mm(1);
    s << 4.0;
    mm << 1.0 / 3.0;
    const SpectralDecomp d = gen_sym_eig(SymTridiagonal(s, Vector()), SymTridiagonal(mm, Vector()));
    CHECK(d.eigvals[0] == doctest::Approx(12.0).epsilon(1e-14));
}

TEST_CASE("generalized eigenproblem: P1 Dirichlet eigenvalues in closed form") {
    // lambda_j = (6 / h^2) (1 - cos(j pi h)) / (2 + cos(j pi h))
    const Mesh1D mesh(8);
    const SymTridiagonal s = assemble_stiffness(mesh);
    const SymTridiagonal m = assemble_mass(mesh);
    const SpectralDecomp d = gen_sym_eig(s, m);
    const double h = mesh.h();
    for (int j = 1; j <= d.dim(); ++j) {
        const double c = std::cos(j * std::numbers::pi * h);
        const double expected = 6.0 / (h * h) * (1.0 - c) / (2.0 + c);
        CHECK(d.eigvals[j - 1] == doctest::Approx(expected).epsilon(1e-12));
    }
    // residual and M-orthonormality invariants
    const Matrix sd = s.to_dense();
    const Matrix md = m.to_dense();
    for (int j = 0; j < d.dim(); ++j) {
        const Vector r = sd * d.eigvecs.col(j) - d.eigvals[j] * md * d.eigvecs.col(j);
        CHECK(r.norm() <= 1e-10 * d.eigvals[j] * (md * d.eigvecs.col(j)).norm());
    }
    CHECK((d.eigvecs.transpose() * md * d.eigvecs - Matrix::Identity(d.dim(), d.dim())).cwiseAbs().maxCoeff() <=
          1e-10);
    for (int j = 1; j < d.dim(); ++j) CHECK(d.eigvals[j] > d.eigvals[j - 1]);
}

TEST_CASE("generalized eigenproblem reconstruction") {
    std::mt19937_64 rng(5);
    for (int n : {3, 17, 64}) {
        const SymTridiagonal s = random_spd_tridiag(n, rng);
        const SymTridiagonal m = random_spd_tridiag(n, rng);
        const SpectralDecomp d = gen_sym_eig(s, m);
        const Matrix md = m.to_dense();
        const Matrix rebuilt = md * d.eigvecs * d.eigvals.asDiagonal() * d.eigvecs.transpose() * md;
        CHECK((s.to_dense() - rebuilt).norm() <= 1e-9 * s.to_dense().norm());
    }
}

TEST_CASE("generalized eigenproblem rejects an indefinite mass matrix") {
    Vector d(2), o(1);
    d << 1, 1;
    o << 3;
    CHECK(kind_of([&] { gen_sym_eig(SymTridiagonal(Vector::Ones(2), Vector::Zero(1)), SymTridiagonal(d, o)); }) ==
          ErrorKind::not_positive_definite);
}

} // TEST_SUITE
