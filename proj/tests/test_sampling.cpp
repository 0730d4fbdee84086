#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ritzhom/sampling.hpp"

using namespace ritzhom;

TEST_CASE("interior samples are strictly inside and reproducible") {
    const Rect r = unit_square();
    const auto pts = sample_interior(r, 10000, 4);
    REQUIRE(pts.size() == 10000);
    for (const Vec2& p : pts) {
        REQUIRE(p[0] > 0.0);
        REQUIRE(p[0] < 1.0);
        REQUIRE(p[1] > 0.0);
        REQUIRE(p[1] < 1.0);
    }
    const auto again = sample_interior(r, 10000, 4);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i][0] == again[i][0]);
        CHECK(pts[i][1] == again[i][1]);
    }
}

TEST_CASE("interior sample mean approaches the center") {
    const auto pts = sample_interior(unit_square(), 100000, 7);
    double m1 = 0.0, m2 = 0.0;
    for (const Vec2& p : pts) {
        m1 += p[0];
        m2 += p[1];
    }
    m1 /= static_cast<double>(pts.size());
    m2 /= static_cast<double>(pts.size());
    CHECK(std::abs(m1 - 0.5) < 0.01);
    CHECK(std::abs(m2 - 0.5) < 0.01);
}

TEST_CASE("boundary samples sit on the boundary") {
    const auto pts = sample_boundary(unit_square(), 4, 9);
    REQUIRE(pts.size() == 4);
    for (const Vec2& p : pts) {
        const bool on = p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0;
        CHECK(on);
    }
    CHECK(sample_boundary(unit_square(), 0, 9).empty());
}

TEST_CASE("boundary sampling is uniform across the four edges") {
    const int n = 100000;
    const auto pts = sample_boundary(unit_square(), n, 21);
    int count[4] = {0, 0, 0, 0};
    for (const Vec2& p : pts) {
        if (p[1] == 0.0) ++count[0];
        else if (p[0] == 1.0) ++count[1];
        else if (p[1] == 1.0) ++count[2];
        else ++count[3];
    }
    for (int e = 0; e < 4; ++e)
        CHECK(std::abs(count[e] / static_cast<double>(n) - 0.25) < 0.01);
}

TEST_CASE("midpoint grid node count and exactness") {
    const QuadratureGrid g = midpoint_grid(unit_square(), 200);
    CHECK(g.node_count() == 40000);
    CHECK(g.integrate([](Vec2) { return 1.0; }) == Catch::Approx(1.0).epsilon(1e-15));
    CHECK(g.integrate([](Vec2 y) { return y[0]; }) == Catch::Approx(0.5).epsilon(1e-14));
    // midpoint is exact for bilinear functions
    const QuadratureGrid g2 = midpoint_grid(unit_square(), 37);
    CHECK(g2.integrate([](Vec2 y) { return 3.0 * y[0] * y[1] - y[0] + 2.0 * y[1] - 0.25; }) ==
          Catch::Approx(3.0 * 0.25 - 0.5 + 1.0 - 0.25).epsilon(1e-13));
    CHECK_THROWS_AS(midpoint_grid(unit_square(), 0), std::invalid_argument);
}

TEST_CASE("grid nodes are strictly interior and weights sum to the area") {
    const Rect r{{0.0, 0.0}, {2.0, 0.5}};
    const QuadratureGrid g = midpoint_grid(r, 17);
    double wsum = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int i = 0; i < g.n; ++i) {
            const Vec2 p = g.node(i, j);
            REQUIRE(p[0] > r.lo[0]);
            REQUIRE(p[0] < r.hi[0]);
            REQUIRE(p[1] > r.lo[1]);
            REQUIRE(p[1] < r.hi[1]);
            wsum += g.weight();
        }
    CHECK(wsum == Catch::Approx(r.area()).epsilon(1e-12));
}
