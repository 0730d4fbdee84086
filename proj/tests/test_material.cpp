#include <catch2/catch_amalgamated.hpp>

#include "ritzhom/material.hpp"
#include "ritzhom/rng.hpp"

using namespace ritzhom;

TEST_CASE("conductivity inside and outside a circular inclusion") {
    const auto [micro, macro] = benchmark_problem(CircleCase{0.3, 0.1});
    CHECK(conductivity_at(micro, {0.5, 0.5})(0, 0) == 0.1);
    CHECK(conductivity_at(micro, {0.5, 0.5})(1, 1) == 0.1);
    CHECK(conductivity_at(micro, {0.05, 0.05})(0, 0) == 1.0);
    CHECK(conductivity_at(micro, {0.05, 0.05})(1, 1) == 1.0);
    CHECK(macro.source == 10.0);
    CHECK(macro.cell_size == 0.1);
    // boundary point belongs to the inclusion (closed region); the radius
    // must be exactly representable for the equality to be meaningful
    const Microstructure dyadic({1.0, 1.0}, {circle_inclusion({0.5, 0.5}, 0.25, 0.1)});
    CHECK(conductivity_at(dyadic, {0.75, 0.5})(0, 0) == 0.1);
    CHECK(conductivity_at(dyadic, {0.5, 0.25})(0, 0) == 0.1);
}

TEST_CASE("two-inclusion cell with distinct conductivities") {
    const auto [micro, macro] = benchmark_problem(TwoCircleCase{0.01, 0.02});
    CHECK(conductivity_at(micro, {0.7, 0.7})(0, 0) == 0.02);
    CHECK(conductivity_at(micro, {0.3, 0.3})(0, 0) == 0.01);
    CHECK(conductivity_at(micro, {0.5, 0.5})(0, 0) == 1.0);
}

TEST_CASE("square inclusion uses the max-norm distance") {
    const auto [micro, macro] = benchmark_problem(SquareCase{0.5, 0.1});
    CHECK(conductivity_at(micro, {0.26, 0.74})(0, 0) == 0.1);   // corner region
    CHECK(conductivity_at(micro, {0.24, 0.76})(0, 0) == 1.0);
    CHECK(conductivity_at(micro, {0.5, 0.75})(0, 0) == 0.1);    // edge point, closed
}

TEST_CASE("point outside the unit cell is a domain error") {
    const auto micro = make_microstructure(CircleCase{0.3, 0.1});
    CHECK_THROWS_AS(conductivity_at(micro, {1.2, 0.5}), std::domain_error);
    CHECK_THROWS_AS(conductivity_at(micro, {0.5, -0.01}), std::domain_error);
}

TEST_CASE("invalid materials are rejected") {
    CHECK_THROWS_AS(make_microstructure(CircleCase{0.3, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(make_microstructure(CircleCase{0.3, -1.0}), std::invalid_argument);
    CHECK_THROWS_AS(Microstructure({1.0, 1.0},
                                   {circle_inclusion({0.4, 0.4}, 0.2, 0.1),
                                    circle_inclusion({0.5, 0.5}, 0.2, 0.1)}),
                    std::invalid_argument);
    CHECK_THROWS_AS(benchmark_problem(CircleCase{0.3, 0.1}, 0.3), std::invalid_argument);
}

TEST_CASE("conductivity stays within the material range at random points") {
    Rng rng(12);
    const CaseSpec cases[] = {CaseSpec{CircleCase{0.3, 0.001}}, CaseSpec{SquareCase{0.5, 0.01}},
                              CaseSpec{TwoCircleCase{0.01, 0.02}}, CaseSpec{LaminateCase{0.1}}};
    for (const auto& spec : cases) {
        const auto micro = make_microstructure(spec);
        const double lo = micro.min_conductivity(), hi = micro.max_conductivity();
        for (int k = 0; k < 10000; ++k) {
            const Mat2 a = conductivity_at(micro, {rng.uniform01(), rng.uniform01()});
            REQUIRE(a(0, 0) >= lo);
            REQUIRE(a(0, 0) <= hi);
            REQUIRE(a(1, 1) >= lo);
            REQUIRE(a(1, 1) <= hi);
        }
    }
}

TEST_CASE("centered single-inclusion cells are reflection symmetric") {
    Rng rng(13);
    for (const CaseSpec& spec :
         {CaseSpec{CircleCase{0.3, 0.1}}, CaseSpec{SquareCase{0.5, 0.01}}}) {
        const auto micro = make_microstructure(spec);
        for (int k = 0; k < 2000; ++k) {
            const Vec2 y{rng.uniform01(), rng.uniform01()};
            const Mat2 a = conductivity_at(micro, y);
            CHECK(conductivity_at(micro, {1.0 - y[0], y[1]})(0, 0) == a(0, 0));
            CHECK(conductivity_at(micro, {y[0], 1.0 - y[1]})(0, 0) == a(0, 0));
        }
    }
}

TEST_CASE("laminate case splits the cell at y1 = 0.5") {
    const auto micro = make_microstructure(LaminateCase{0.1});
    CHECK(conductivity_at(micro, {0.25, 0.9})(0, 0) == 0.1);
    CHECK(conductivity_at(micro, {0.75, 0.1})(0, 0) == 1.0);
    const Vec2 h = micro.harmonic_mean();
    const Vec2 a = micro.arithmetic_mean();
    CHECK(h[0] == Catch::Approx(1.0 / 5.5).epsilon(1e-12));
    CHECK(a[0] == Catch::Approx(0.55).epsilon(1e-12));
}
