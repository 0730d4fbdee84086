#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ritzhom/assembly.hpp"
#include "ritzhom/material.hpp"
#include "ritzhom/oracle.hpp"

using namespace ritzhom;

namespace {

constexpr double kPi = 3.14159265358979323846;

double l2_error_vs(const FieldGrid& u, double (*exact)(Vec2)) {
    double num = 0.0, den = 0.0;
    for (int j = 0; j < u.n; ++j)
        for (int i = 0; i < u.n; ++i) {
            const double e = exact(u.node(i, j));
            const double d = u(i, j) - e;
            num += d * d;
            den += e * e;
        }
    return std::sqrt(num / den);
}

double sin_product(Vec2 x) { return std::sin(kPi * x[0]) * std::sin(kPi * x[1]); }
double sin_source(Vec2 x) { return 2.0 * kPi * kPi * sin_product(x); }

}  // namespace

TEST_CASE("manufactured-solution convergence order of dns_solve") {
    const auto micro = Microstructure::homogeneous(1.0);
    MacroProblem macro;
    macro.cell_size = 1.0;  // homogeneous: the whole domain is one cell
    macro.source = 0.0;
    const FieldGrid u64 = dns_solve(micro, macro, 64, sin_source);
    const FieldGrid u128 = dns_solve(micro, macro, 128, sin_source);
    const double e64 = l2_error_vs(u64, sin_product);
    const double e128 = l2_error_vs(u128, sin_product);
    const double order = std::log2(e64 / e128);
    CHECK(order >= 1.9);
    CHECK(order <= 2.1);
}

TEST_CASE("manufactured-solution convergence order of fem_macro_solve") {
    const HomogenizedTensor a0{Mat2::identity()};
    const FieldGrid u64 = fem_macro_solve(a0, 0.0, 64, sin_source);
    const FieldGrid u128 = fem_macro_solve(a0, 0.0, 128, sin_source);
    const double order = std::log2(l2_error_vs(u64, sin_product) / l2_error_vs(u128, sin_product));
    CHECK(order >= 1.9);
    CHECK(order <= 2.1);
}

TEST_CASE("dns on a homogeneous medium equals the constant-coefficient macro solve") {
    const auto micro = Microstructure::homogeneous(1.0);
    MacroProblem macro;
    macro.cell_size = 1.0;
    macro.source = 10.0;
    const FieldGrid dns = dns_solve(micro, macro, 64);
    const FieldGrid mac = fem_macro_solve(HomogenizedTensor{Mat2::identity()}, 10.0, 64);
    double max_diff = 0.0;
    for (std::size_t k = 0; k < dns.values.size(); ++k)
        max_diff = std::max(max_diff, std::abs(dns.values[k] - mac.values[k]));
    CHECK(max_diff < 1e-10);
}

TEST_CASE("discrete maximum principle for nonnegative sources") {
    const auto micro = make_microstructure(CircleCase{0.3, 0.001});
    MacroProblem macro;
    macro.cell_size = 0.5;
    macro.source = 10.0;
    const FieldGrid u = dns_solve(micro, macro, 80);
    for (double v : u.values) REQUIRE(v >= 0.0);
}

TEST_CASE("dns rejects resolutions that do not resolve the cells") {
    const auto micro = make_microstructure(CircleCase{0.3, 0.1});
    MacroProblem macro;
    macro.cell_size = 0.1;
    CHECK_THROWS_AS(dns_solve(micro, macro, 130), std::invalid_argument);  // not a multiple
    CHECK_THROWS_AS(dns_solve(micro, macro, 200), std::invalid_argument);  // 20 cells per cell
    CHECK(dns_resolution(0.1) == 400);
    CHECK(dns_resolution(0.2) == 400);
    CHECK(dns_resolution(1.0 / 20.0) == 800);
    CHECK(dns_resolution(1.0 / 30.0) == 1200);
}

TEST_CASE("homogeneous cell problems have identically zero correctors") {
    const auto micro = Microstructure::homogeneous(1.3);
    const FieldGrid n1 = cell_solve_lower(micro, 1, 64);
    const FieldGrid n2 = cell_solve_lower(micro, 2, 64);
    CHECK(n1.max_abs() < 1e-12);
    CHECK(n2.max_abs() < 1e-12);
    const HomogenizedTensor a0 = homog_tensor_from_grids(micro, n1, n2);
    CHECK(a0.a(0, 0) == Catch::Approx(1.3).margin(1e-12));
    CHECK(a0.a(1, 1) == Catch::Approx(1.3).margin(1e-12));
    const FieldGrid n11 = cell_solve_higher(micro, 1, 1, n1, a0, 64);
    CHECK(n11.max_abs() < 1e-10);
}

TEST_CASE("laminate cell functions: along-layer corrector vanishes, tensor obeys bounds") {
    const auto micro = make_microstructure(LaminateCase{0.1});
    const int n = 128;
    const FieldGrid n1 = cell_solve_lower(micro, 1, n);
    const FieldGrid n2 = cell_solve_lower(micro, 2, n);
    // a depends on y1 only, so the alpha=2 problem has zero right-hand side
    CHECK(n2.max_abs() < 1e-12);
    const HomogenizedTensor a0 = homog_tensor_from_grids(micro, n1, n2);
    // along the layers the arithmetic mean is exact
    CHECK(a0.a(1, 1) == Catch::Approx(0.55).margin(1e-10));
    // across the layers: between the Reuss and Voigt bounds; the Dirichlet
    // boundary condition keeps it well above the periodic (harmonic) value
    const double harm = micro.harmonic_mean()[0];
    const double arith = micro.arithmetic_mean()[0];
    CHECK(a0.a(0, 0) > harm);
    CHECK(a0.a(0, 0) < arith);
}

TEST_CASE("homogenized tensors satisfy Reuss-Voigt bounds and circle symmetry") {
    for (const CaseSpec& spec : {CaseSpec{CircleCase{0.3, 0.1}}, CaseSpec{CircleCase{0.3, 0.001}},
                                 CaseSpec{SquareCase{0.5, 0.1}},
                                 CaseSpec{TwoCircleCase{0.01, 0.02}}}) {
        const auto micro = make_microstructure(spec);
        const int n = 128;
        const FieldGrid n1 = cell_solve_lower(micro, 1, n);
        const FieldGrid n2 = cell_solve_lower(micro, 2, n);
        const HomogenizedTensor a0 = homog_tensor_from_grids(micro, n1, n2);
        const Vec2 lo = micro.harmonic_mean();
        const Vec2 hi = micro.arithmetic_mean();
        // discretization tolerance on the bounds
        CHECK(a0.a(0, 0) > lo[0] * 0.98);
        CHECK(a0.a(0, 0) < hi[0] * 1.02);
        CHECK(a0.a(1, 1) > lo[1] * 0.98);
        CHECK(a0.a(1, 1) < hi[1] * 1.02);
    }
    // quarter symmetry of the centered circle
    const auto micro = make_microstructure(CircleCase{0.3, 0.1});
    const FieldGrid n1 = cell_solve_lower(micro, 1, 128);
    const FieldGrid n2 = cell_solve_lower(micro, 2, 128);
    const HomogenizedTensor a0 = homog_tensor_from_grids(micro, n1, n2);
    CHECK(std::abs(a0.a(0, 0) - a0.a(1, 1)) < 1e-3);
    CHECK(std::abs(a0.a(0, 1)) < 1e-6);
    CHECK(std::abs(a0.a(1, 0)) < 1e-6);
}

TEST_CASE("higher-order cell function symmetry for the centered circle") {
    const auto micro = make_microstructure(CircleCase{0.3, 0.1});
    const int n = 128;
    const FieldGrid n1 = cell_solve_lower(micro, 1, n);
    const FieldGrid n2 = cell_solve_lower(micro, 2, n);
    const HomogenizedTensor a0 = homog_tensor_from_grids(micro, n1, n2);
    const FieldGrid n11 = cell_solve_higher(micro, 1, 1, n1, a0, n);
    // N11 is even about y2 = 0.5
    double max_asym = 0.0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            max_asym = std::max(max_asym, std::abs(n11(i, j) - n11(i, n - 1 - j)));
    CHECK(max_asym < 1e-8);
}

TEST_CASE("macro solve handles zero source and anisotropic diagonal tensors") {
    const FieldGrid u = fem_macro_solve(HomogenizedTensor{Mat2::diag(2.0, 0.5)}, 0.0, 64);
    CHECK(u.max_abs() == 0.0);
}

TEST_CASE("classical multiscale reference on a homogeneous medium reduces to u0") {
    const auto micro = Microstructure::homogeneous(1.0);
    MacroProblem macro;
    macro.cell_size = 0.125;
    macro.source = 10.0;
    const HomsReference ref(micro, macro, 64, 64);
    const FieldGrid u0 = fem_macro_solve(HomogenizedTensor{Mat2::identity()}, 10.0, 64);
    // correctors vanish; vertex-average interpolation smooths at O(h^2 u'')
    double max_diff = 0.0;
    for (int j = 2; j < 62; ++j)
        for (int i = 2; i < 62; ++i)
            max_diff = std::max(max_diff, std::abs(ref.evaluate(u0.node(i, j)) - u0(i, j)));
    CHECK(max_diff < 2e-3);
}

TEST_CASE("relative l2 basics") {
    FieldGrid a(unit_square(), 8), b(unit_square(), 8);
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        b.values[k] = 1.0 + static_cast<double>(k % 5);
        a.values[k] = b.values[k];
    }
    CHECK(relative_l2(a, b) == 0.0);
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] = 1.1 * b.values[k];
    CHECK(relative_l2(a, b) == Catch::Approx(0.1).margin(1e-12));
    FieldGrid zero(unit_square(), 8);
    CHECK_THROWS_AS(relative_l2(a, zero), std::invalid_argument);
    FieldGrid other(unit_square(), 16);
    CHECK_THROWS_AS(relative_l2(a, other), std::invalid_argument);
}

TEST_CASE("grid self-convergence of smooth problems is tight") {
    // two oracle resolutions of the same smooth problem stay within 1%
    const FieldGrid u64 = fem_macro_solve(HomogenizedTensor{Mat2::diag(0.63, 0.63)}, 10.0, 64);
    const FieldGrid u128 = fem_macro_solve(HomogenizedTensor{Mat2::diag(0.63, 0.63)}, 10.0, 128);
    FieldGrid restricted(unit_square(), 64);
    for (int j = 0; j < 64; ++j)
        for (int i = 0; i < 64; ++i)
            restricted(i, j) = 0.25 * (u128(2 * i, 2 * j) + u128(2 * i + 1, 2 * j) +
                                       u128(2 * i, 2 * j + 1) + u128(2 * i + 1, 2 * j + 1));
    CHECK(relative_l2(u64, restricted) <= 0.01);
}

TEST_CASE("micro coordinate mapping") {
    const Vec2 y = micro_coord({0.25, 0.25}, 0.1);
    CHECK(y[0] == Catch::Approx(0.5).margin(1e-12));
    CHECK(y[1] == Catch::Approx(0.5).margin(1e-12));
    const Vec2 z = micro_coord({0.0, 0.0}, 0.37);
    CHECK(z[0] == 0.0);
    CHECK(z[1] == 0.0);
    const Vec2 w = micro_coord({0.999999, 0.3}, 0.1);
    CHECK(w[0] == Catch::Approx(0.99999).epsilon(1e-3));
    CHECK(w[1] == Catch::Approx(0.0).margin(1e-9));
    // periodicity
    for (double x0 : {0.123, 0.456, 0.789}) {
        const Vec2 a = micro_coord({x0, 0.4}, 0.1);
        const Vec2 b = micro_coord({x0 + 0.1, 0.4}, 0.1);
        CHECK(std::abs(a[0] - b[0]) < 1e-12);
    }
}
