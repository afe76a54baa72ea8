#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bubbletower/radial_grid.hpp"

using namespace bubbletower;

TEST_CASE("geometric grid resolves the inner scale") {
    auto g = build_grid(7, 1.0, 1e-6, 16, 64);
    CHECK(g->nodes.front() == 0.0);
    CHECK(g->nodes.back() == 1.0);
    CHECK(g->nodes[1] <= 1e-6);
    CHECK(g->nodes.size() >= 16);
    for (size_t i = 0; i + 1 < g->nodes.size(); ++i) CHECK(g->nodes[i] < g->nodes[i + 1]);
}

TEST_CASE("uniform-only mode") {
    auto g = build_uniform_grid(7, 1.0, 8);
    REQUIRE(g->nodes.size() == 9);
    for (int k = 0; k <= 8; ++k) CHECK(g->nodes[k] == doctest::Approx(k / 8.0));
}

TEST_CASE("consecutive-ratio bound on the positive nodes") {
    // geometric region grows by 10^{1/npd}; the junction stays below growth^2
    auto g = build_grid(8, 2.0, 1e-4, 8, 32);
    const double growth = std::pow(10.0, 1.0 / 8.0);
    const double bound = growth * growth * (1.0 + 1e-9);
    for (size_t i = 1; i + 1 < g->nodes.size(); ++i) {
        CHECK(g->nodes[i + 1] / g->nodes[i] <= bound);
    }
}

TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(build_grid(7, 1.0, 2.0, 16, 64), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(7, 1.0, 1e-3, 3, 64), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(7, 1.0, 1e-3, 16, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(6, 1.0, 1e-3, 16, 64), std::invalid_argument);
}

TEST_CASE("piecewise-linear evaluation") {
    auto g = build_uniform_grid(7, 1.0, 10);
    RadialField u(g, true);
    for (size_t i = 0; i < g->size(); ++i) u.values[i] = g->nodes[i];
    u.values.back() = 0.0;  // dirichlet
    CHECK(u(0.05) == doctest::Approx(0.05));
    CHECK(u(0.85) == doctest::Approx(0.85));
    CHECK(u(1.0) == 0.0);
    CHECK(u(2.0) == 0.0);
}
