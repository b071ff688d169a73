#include <doctest.h>

#include "sdwave/fem.hpp"
#include "test_support.hpp"

#include <cmath>
#include <limits>
#include <numbers>

using namespace sdwave;
using sdwave::test::kind_of;
using sdwave::test::quadrature_load;
using sdwave::test::random_vector;

namespace {

constexpr double pi = std::numbers::pi;

// \int sin(w x) phi_i dx = sin(w x_i) * 2 (1 - cos(w h)) / (w^2 h)
Vector analytic_sine_load(double w, const Mesh1D& mesh) {
    const double h = mesh.h();
    Vector b(mesh.n_interior());
    for (int i = 0; i < mesh.n_interior(); ++i)
        b[i] = std::sin(w * mesh.node(i)) * 2.0 * (1.0 - std::cos(w * h)) / (w * w * h);
    return b;
}

ScalarFunction hat_function(const CoefVec& c, const Mesh1D& mesh) {
    return [c, mesh](double x) { return eval_fem_function(c, mesh, x); };
}

} // namespace

TEST_SUITE("fem") {

TEST_CASE("mesh construction") {
    const Mesh1D two = build_mesh(2);
    CHECK(two.h() == 0.5);
    CHECK(two.interior_nodes() == std::vector<double>{0.5});
    const Mesh1D four = build_mesh(4);
    CHECK(four.h() == 0.25);
    CHECK(four.interior_nodes() == std::vector<double>{0.25, 0.5, 0.75});
    CHECK(kind_of([] { build_mesh(1); }) == ErrorKind::invalid_mesh);
    CHECK(kind_of([] { build_mesh(0); }) == ErrorKind::invalid_mesh);
}

TEST_CASE("stiffness matrix entries") {
    SUBCASE("two cells") {
        const SymTridiagonal s = assemble_stiffness(Mesh1D(2));
        CHECK(s.dim() == 1);
        CHECK(s.diag[0] == doctest::Approx(4.0));
        CHECK(s.off.size() == 0);
    }
    SUBCASE("three cells") {
        const SymTridiagonal s = assemble_stiffness(Mesh1D(3));
        CHECK(s.diag[0] == doctest::Approx(6.0));
        CHECK(s.diag[1] == doctest::Approx(6.0));
        CHECK(s.off[0] == doctest::Approx(-3.0));
    }
    SUBCASE("four cells") {
        const SymTridiagonal s = assemble_stiffness(Mesh1D(4));
        for (int i = 0; i < 3; ++i) CHECK(s.diag[i] == doctest::Approx(8.0));
        for (int i = 0; i < 2; ++i) CHECK(s.off[i] == doctest::Approx(-4.0));
    }
}

TEST_CASE("mass matrix entries") {
    const SymTridiagonal m2 = assemble_mass(Mesh1D(2));
    CHECK(m2.diag[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    const SymTridiagonal m3 = assemble_mass(Mesh1D(3));
    CHECK(m3.diag[0] == doctest::Approx(2.0 / 9.0).epsilon(1e-15));
    CHECK(m3.off[0] == doctest::Approx(1.0 / 18.0).epsilon(1e-15));
    const SymTridiagonal m4 = assemble_mass(Mesh1D(4));
    for (int i = 0; i < 3; ++i) CHECK(m4.diag[i] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    for (int i = 0; i < 2; ++i) CHECK(m4.off[i] == doctest::Approx(1.0 / 24.0).epsilon(1e-15));
}

TEST_CASE("stiffness and mass form a positive pencil whose first eigenvalue approaches pi^2") {
    for (int cells : {2, 5, 16, 64}) {
        const Mesh1D mesh(cells);
        const SpectralDecomp d = gen_sym_eig(assemble_stiffness(mesh), assemble_mass(mesh));
        CHECK(d.eigvals.minCoeff() > 0.0);
        if (cells == 64) CHECK(std::abs(d.eigvals[0] - pi * pi) / (pi * pi) <= 1e-3);
    }
}

TEST_CASE("load vectors") {
    const Mesh1D mesh(16);
    SUBCASE("closed-form sine loads agree with the high-order quadrature oracle") {
        for (int j : {1, 3, 16, 40}) {
            const Vector exact = sine_mode_load(j, mesh, 0.5);
            const Vector oracle =
                quadrature_load([j](double x) { return 0.5 * std::numbers::sqrt2 * std::sin(j * pi * x); }, mesh);
            CHECK((exact - oracle).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
    SUBCASE("Gauss loads are exact for piecewise quadratics") {
        auto f = [](double x) { return 3.0 * x * x - x + 2.0; };
        CHECK((load_vector(f, mesh) - quadrature_load(f, mesh)).cwiseAbs().maxCoeff() <= 1e-13);
    }
    SUBCASE("non-finite values are rejected") {
        auto bad = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
        CHECK(kind_of([&] { load_vector(bad, mesh); }) == ErrorKind::evaluation);
        auto inf = [](double x) { return 1.0 / (x - x); };
        CHECK(kind_of([&] { l2_project(inf, mesh); }) == ErrorKind::evaluation);
    }
}

TEST_CASE("L2 projection") {
    SUBCASE("sin(pi x) on four cells") {
        const Mesh1D mesh(4);
        const CoefVec c = l2_project([](double x) { return std::sin(pi * x); }, mesh);
        const Vector residual = assemble_mass(mesh).apply(c) - analytic_sine_load(pi, mesh);
        CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("zero function") {
        CHECK(l2_project([](double) { return 0.0; }, Mesh1D(7)).norm() == 0.0);
    }
    SUBCASE("idempotent on V_h") {
        std::mt19937_64 rng(17);
        for (int cells : {2, 9, 32}) {
            const Mesh1D mesh(cells);
            const CoefVec v = random_vector(mesh.n_interior(), rng);
            const CoefVec p = l2_project(hat_function(v, mesh), mesh);
            CHECK((p - v).norm() <= 1e-12 * v.norm());
        }
    }
    SUBCASE("exact-load sine projection matches the quadrature route") {
        const Mesh1D mesh(32);
        const CoefVec a = l2_project_sine(3, mesh, 2.0);
        const CoefVec b = l2_project([](double x) { return 2.0 * std::numbers::sqrt2 * std::sin(3 * pi * x); }, mesh);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("Ritz projection") {
    const SmoothFunction sine{[](double x) { return std::sin(pi * x); },
                              [](double x) { return pi * std::cos(pi * x); }};
    SUBCASE("stiffness loads of sin(pi x) on four cells") {
        const Mesh1D mesh(4);
        const CoefVec c = ritz_project(sine, mesh);
        // \int f' phi_i' = \int -f'' phi_i = pi^2 \int sin(pi x) phi_i
        const Vector loads = pi * pi * analytic_sine_load(pi, mesh);
        CHECK((assemble_stiffness(mesh).apply(c) - loads).cwiseAbs().maxCoeff() <= 1e-10);
    }
    SUBCASE("one-dimensional Ritz projection interpolates at the nodes") {
        const Mesh1D mesh(8);
        const CoefVec c = ritz_project(sine, mesh);
        for (int i = 0; i < mesh.n_interior(); ++i) CHECK(c[i] == doctest::Approx(std::sin(pi * mesh.node(i))).epsilon(1e-12));
    }
    SUBCASE("Galerkin orthogonality") {
        using boost::math::quadrature::gauss_kronrod;
        const Mesh1D mesh(16);
        const CoefVec c = ritz_project(sine, mesh);
        const Vector sc = assemble_stiffness(mesh).apply(c);
        const double h = mesh.h();
        for (int i = 0; i < mesh.n_interior(); ++i) {
            const double xi = mesh.node(i);
            const double exact = (gauss_kronrod<double, 61>::integrate(sine.derivative, xi - h, xi) -
                                  gauss_kronrod<double, 61>::integrate(sine.derivative, xi, xi + h)) /
                                 h;
            CHECK(std::abs(exact - sc[i]) <= 1e-9);
        }
    }
    SUBCASE("identity on V_h") {
        std::mt19937_64 rng(23);
        const Mesh1D mesh(12);
        const CoefVec v = random_vector(mesh.n_interior(), rng);
        const double h = mesh.h();
        const SmoothFunction f{hat_function(v, mesh), [v, mesh, h](double x) {
                                   const int cell = std::min(static_cast<int>(x / h), mesh.n_cells() - 1);
                                   const double left = cell >= 1 ? v[cell - 1] : 0.0;
                                   const double right = cell + 1 <= mesh.n_interior() ? v[cell] : 0.0;
                                   return (right - left) / h;
                               }};
        CHECK((ritz_project(f, mesh) - v).norm() <= 1e-12 * v.norm());
    }
    SUBCASE("zero function") {
        const SmoothFunction zero{[](double) { return 0.0; }, [](double) { return 0.0; }};
        CHECK(ritz_project(zero, Mesh1D(5)).norm() == 0.0);
    }
    SUBCASE("missing derivative") {
        const SmoothFunction no_derivative{[](double x) { return x; }, {}};
        CHECK(kind_of([&] { ritz_project(no_derivative, Mesh1D(4)); }) == ErrorKind::unsupported_input);
    }
    SUBCASE("nested meshes") {
        const Mesh1D fine(32);
        const Mesh1D coarse(8);
        const CoefVec fine_c = ritz_project(sine, fine);
        const CoefVec nested = ritz_project(fine_c, fine, coarse);
        CHECK((nested - restrict_to_coarse(fine_c, fine, coarse)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((nested - ritz_project(sine, coarse)).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(kind_of([&] { ritz_project(fine_c, fine, Mesh1D(6)); }) == ErrorKind::invalid_mesh);
    }
}

TEST_CASE("discrete L2 norm") {
    const Mesh1D two(2);
    CHECK(discrete_l2_norm(CoefVec::Zero(1), assemble_mass(two)) == 0.0);
    CHECK(discrete_l2_norm(CoefVec::Ones(1), assemble_mass(two)) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-15));
    std::mt19937_64 rng(29);
    const Mesh1D mesh(20);
    const SymTridiagonal m = assemble_mass(mesh);
    const Matrix md = m.to_dense();
    for (int trial = 0; trial < 10; ++trial) {
        const CoefVec v = random_vector(mesh.n_interior(), rng);
        CHECK(discrete_l2_norm(v, m) == doctest::Approx(std::sqrt(v.dot(md * v))).epsilon(1e-12));
    }
    CHECK(kind_of([&] { discrete_l2_norm(CoefVec::Ones(3), m); }) == ErrorKind::shape);
}

TEST_CASE("discrete fractional norms") {
    const Mesh1D mesh(16);
    const SymTridiagonal m = assemble_mass(mesh);
    const SpectralDecomp d = gen_sym_eig(assemble_stiffness(mesh), m);
    SUBCASE("s = 0 reproduces the L2 norm") {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 100; ++trial) {
            const CoefVec v = random_vector(mesh.n_interior(), rng);
            CHECK(discrete_fractional_norm(v, 0.0, d, m) == doctest::Approx(discrete_l2_norm(v, m)).epsilon(1e-12));
        }
    }
    SUBCASE("eigenvectors scale with lambda^{s/2}") {
        for (int j : {0, 4, 14}) {
            for (double s : {-2.0, -1.0, 0.5, 1.0, 2.0}) {
                const double expected = std::pow(d.eigvals[j], s / 2.0);
                CHECK(discrete_fractional_norm(d.eigvecs.col(j), s, d, m) == doctest::Approx(expected).epsilon(1e-10));
            }
        }
    }
    SUBCASE("H1 seminorm of the first mode approaches pi") {
        const Mesh1D fine(64);
        const SymTridiagonal mf = assemble_mass(fine);
        const SpectralDecomp df = gen_sym_eig(assemble_stiffness(fine), mf);
        const double norm = discrete_fractional_norm(l2_project_sine(1, fine), 1.0, df, mf);
        CHECK(std::abs(norm - pi) <= 0.01 * pi);
    }
    SUBCASE("s = 2 matches the stiffness energy through M^{-1}") {
        std::mt19937_64 rng(37);
        const CoefVec v = random_vector(mesh.n_interior(), rng);
        const Vector sv = assemble_stiffness(mesh).apply(v);
        const Vector minv_sv = TridiagonalFactor(m).solve(sv);
        CHECK(discrete_fractional_norm(v, 2.0, d, m) == doctest::Approx(std::sqrt(sv.dot(minv_sv))).epsilon(1e-10));
    }
    SUBCASE("errors") {
        CHECK(kind_of([&] { discrete_fractional_norm(CoefVec::Ones(15), 2.5, d, m); }) == ErrorKind::domain);
        CHECK(kind_of([&] { discrete_fractional_norm(CoefVec::Ones(7), 1.0, d, m); }) == ErrorKind::shape);
        const Mesh1D other(8);
        const SpectralDecomp wrong = gen_sym_eig(assemble_stiffness(other), assemble_mass(other));
        CHECK(kind_of([&] { discrete_fractional_norm(CoefVec::Ones(15), 1.0, wrong, m); }) == ErrorKind::shape);
    }
}

TEST_CASE("pointwise evaluation") {
    CHECK(eval_fem_function(CoefVec::Ones(1), Mesh1D(2), 0.0) == 0.0);
    CHECK(eval_fem_function(CoefVec::Ones(1), Mesh1D(2), 1.0) == 0.0);
    CHECK(eval_fem_function(CoefVec::Ones(1), Mesh1D(2), 0.25) == doctest::Approx(0.5));
    CoefVec v(3);
    v << 1, 2, 1;
    CHECK(eval_fem_function(v, Mesh1D(4), 0.5) == doctest::Approx(2.0));
    CHECK(eval_fem_function(v, Mesh1D(4), 0.375) == doctest::Approx(1.5));
    CHECK(kind_of([&] { eval_fem_function(v, Mesh1D(4), 1.5); }) == ErrorKind::domain);
    CHECK(kind_of([&] { eval_fem_function(v, Mesh1D(4), -0.1); }) == ErrorKind::domain);
}

TEST_CASE("nodal restriction to a nested mesh") {
    const Mesh1D fine(8);
    const Mesh1D coarse(4);
    CoefVec f(7);
    f << 1, 2, 3, 4, 5, 6, 7;
    CoefVec expected(3);
    expected << 2, 4, 6;
    CHECK(restrict_to_coarse(f, fine, coarse) == expected);
    CHECK(restrict_to_coarse(f, fine, fine) == f);
    CHECK(kind_of([&] { restrict_to_coarse(f, fine, Mesh1D(3)); }) == ErrorKind::invalid_mesh);
}

TEST_CASE("prolongation embeds a coarse function exactly") {
    const Mesh1D coarse(4);
    const Mesh1D fine(16);
    CoefVec c(3);
    c << 1.0, -2.0, 0.5;
    const CoefVec f = prolong_to_fine(c, coarse, fine);
    REQUIRE(f.size() == 15);
    CHECK(f[3] == c[0]);
    CHECK(f[1] == doctest::Approx(0.5));
    CHECK(f[5] == doctest::Approx(-0.5));
    for (int i = 0; i < fine.n_interior(); ++i)
        CHECK(f[i] == doctest::Approx(eval_fem_function(c, coarse, fine.node(i))).epsilon(1e-14));
    CHECK((restrict_to_coarse(f, fine, coarse) - c).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK(discrete_l2_norm(f, assemble_mass(fine)) ==
          doctest::Approx(discrete_l2_norm(c, assemble_mass(coarse))).epsilon(1e-13));
    CHECK(prolong_to_fine(c, coarse, coarse) == c);
    CHECK(kind_of([&] { prolong_to_fine(c, coarse, Mesh1D(6)); }) == ErrorKind::invalid_mesh);
    CHECK(kind_of([&] { prolong_to_fine(CoefVec::Zero(2), coarse, fine); }) == ErrorKind::shape);
}

} // TEST_SUITE
