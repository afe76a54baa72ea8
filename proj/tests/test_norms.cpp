#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bubbletower/bubbles.hpp"
#include "bubbletower/constants.hpp"
#include "bubbletower/laplacian.hpp"
#include "bubbletower/norms.hpp"
#include "bubbletower/quadrature.hpp"

using namespace bubbletower;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("norm_lq basics") {
    CHECK(norm_lq([](double) { return 0.0; }, 2.0, 7, 0.0, 1.0) == doctest::Approx(0.0));

    // constant c on the ball: c (omega R^N)^{1/q}
    auto g = build_uniform_grid(7, 2.0, 32);
    RadialField c3(g, false);
    for (auto& v : c3.values) v = 3.0;
    const double expect = 3.0 * std::pow(unit_ball_volume(7) * std::pow(2.0, 7), 1.0 / 2.5);
    CHECK(norm_lq(c3, 2.5) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("critical norm of the standard bubble ties to the Sobolev constant") {
    auto c = compute_constants(7);
    const Bubble b{7, 1.0};
    const double q = c.p + 1.0;
    const double nrm =
        norm_lq([&](double r) { return bubble_value(r, b); }, q, 7, 0.0, kInf, {1.0});
    CHECK(std::pow(nrm, q) == doctest::Approx(64343.75790222512).epsilon(1e-8));
}

TEST_CASE("H1 inner product of the parabola against the closed form") {
    // u = R^2 - r^2 has int |grad u|^2 = 4 N omega R^{N+2} / (N+2)
    const int n = 7;
    const double R = 1.5;
    const double exact = 4.0 * sphere_measure(n) * std::pow(R, n + 2) / (n + 2);
    double err_coarse = 0.0, err_fine = 0.0;
    {
        auto g = build_uniform_grid(n, R, 64);
        auto u = interpolate(g, [R](double r) { return R * R - r * r; });
        err_coarse = std::abs(inner_h1(u, u) - exact);
    }
    {
        auto g = build_uniform_grid(n, R, 128);
        auto u = interpolate(g, [R](double r) { return R * R - r * r; });
        err_fine = std::abs(inner_h1(u, u) - exact);
        CHECK(inner_h1(u, u) == doctest::Approx(exact).epsilon(1e-3));
    }
    const double order = std::log2(err_coarse / err_fine);
    CHECK(order >= 1.9);  // second order in mesh width

    auto g = build_uniform_grid(n, R, 64);
    RadialField zero(g);
    CHECK(inner_h1(zero, zero) == 0.0);
}

TEST_CASE("grid mismatch is rejected") {
    auto g1 = build_uniform_grid(7, 1.0, 16);
    auto g2 = build_uniform_grid(7, 1.0, 16);
    RadialField u(g1), v(g2);
    CHECK_THROWS_AS(inner_h1(u, v), std::invalid_argument);
}

TEST_CASE("norm consistency: L2 norm equals the exact mass-matrix value") {
    auto g = build_grid(7, 1.0, 1e-4, 12, 48);
    auto u = interpolate(g, [](double r) { return std::cos(3.0 * r) * (1.0 - r); });
    const double via_gauss = norm_lq(u, 2.0);
    const double via_mass = std::sqrt(inner_l2(u, u));
    CHECK(via_gauss == doctest::Approx(via_mass).epsilon(1e-13));
}

TEST_CASE("inverse laplacian: zero and constant sources") {
    auto g = build_uniform_grid(7, 1.0, 256);
    auto w0 = inverse_laplacian([](double) { return 0.0; }, g);
    for (double v : w0.values) CHECK(v == doctest::Approx(0.0));

    // -Delta [c (R^2 - r^2) / (2N)] = c
    const double c = 4.2;
    auto w = inverse_laplacian([c](double) { return c; }, g);
    double max_err = 0.0;
    for (size_t i = 0; i < g->size(); ++i) {
        const double r = g->nodes[i];
        max_err = std::max(max_err, std::abs(w.values[i] - c * (1.0 - r * r) / 14.0));
    }
    CHECK(max_err <= 2e-4 * c / 14.0);
}

TEST_CASE("inverse laplacian reproduces the projected bubble") {
    const int n = 7;
    const double delta = 0.1;
    const Bubble b{n, delta};
    const BallDomain dom{n, 1.0};
    auto g = build_grid(n, 1.0, delta / 1000.0, 64, 16384);
    auto w = inverse_laplacian(
        [&](double r) { return std::pow(bubble_value(r, b), 1.8); }, g);
    double max_err = 0.0, umax = 0.0;
    for (size_t i = 0; i < g->size(); ++i) {
        const double exact = projected_bubble(g->nodes[i], b, dom);
        umax = std::max(umax, std::abs(exact));
        max_err = std::max(max_err, std::abs(w.values[i] - exact));
    }
    CHECK(max_err <= 1e-5 * umax);
}

TEST_CASE("pointwise laplacian of the solution converges at second order") {
    const int n = 7;
    auto gfun = [](double r) { return std::exp(-2.0 * r * r); };
    double errs[3];
    int k = 0;
    for (int m : {128, 256, 512}) {
        auto g = build_uniform_grid(n, 1.0, m);
        auto w = inverse_laplacian(gfun, g);
        const double h = 1.0 / m;
        double emax = 0.0;
        for (size_t i = 1; i + 1 < g->size(); ++i) {
            const double r = g->nodes[i];
            if (r < 0.2 || r > 0.8) continue;
            const double lap =
                (w.values[i + 1] - 2.0 * w.values[i] + w.values[i - 1]) / (h * h) +
                (n - 1) / r * (w.values[i + 1] - w.values[i - 1]) / (2.0 * h);
            emax = std::max(emax, std::abs(lap + gfun(r)));
        }
        errs[k++] = emax;
    }
    const double order1 = std::log2(errs[0] / errs[1]);
    const double order2 = std::log2(errs[1] / errs[2]);
    CHECK(order1 >= 1.9);
    CHECK(order2 >= 1.9);
}

TEST_CASE("self-adjointness of the inverse") {
    const int n = 7;
    auto g = build_uniform_grid(n, 1.0, 256);
    auto g1 = [](double r) { return std::exp(-r) * (1.0 + r); };
    auto g2 = [](double r) { return std::cos(2.0 * r); };
    auto w1 = inverse_laplacian(g1, g);
    auto w2 = inverse_laplacian(g2, g);
    auto pair12 = integrate_radial(
        [&](double r) { return g1(r) * w2(r) * std::pow(r, n - 1); }, 0.0, 1.0, {}, 1e-13);
    auto pair21 = integrate_radial(
        [&](double r) { return g2(r) * w1(r) * std::pow(r, n - 1); }, 0.0, 1.0, {}, 1e-13);
    CHECK(pair12.value == doctest::Approx(pair21.value).epsilon(1e-10));
}

TEST_CASE("projection removes basis components") {
    const int n = 7;
    const BallDomain dom{n, 1.0};
    auto g = build_grid(n, 1.0, 1e-5, 24, 96);
    auto z1 = interpolate(g, [&](double r) { return projected_z(r, {n, 0.1}, dom); });
    auto z2 = interpolate(g, [&](double r) { return projected_z(r, {n, 0.01}, dom); });

    SUBCASE("empty basis returns the field unchanged") {
        auto f = interpolate(g, [](double r) { return std::sin(3.0 * r) * (1.0 - r); });
        auto pf = project_orthogonal(f, {});
        CHECK(pf.values == f.values);
    }
    SUBCASE("a basis element projects to zero") {
        auto pz = project_orthogonal(z1, {z1, z2});
        CHECK(norm_h1(pz) <= 1e-12 * norm_h1(z1));
    }
    SUBCASE("random smooth field becomes orthogonal") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> coef(-2.0, 2.0);
        const double a = coef(rng), b = coef(rng);
        auto f = interpolate(
            g, [&](double r) { return (a + b * r) * std::sin(2.0 * r) * (1.0 - r); });
        auto pf = project_orthogonal(f, {z1, z2});
        CHECK(std::abs(inner_h1(pf, z1)) <= 1e-12 * norm_h1(f) * norm_h1(z1));
        CHECK(std::abs(inner_h1(pf, z2)) <= 1e-12 * norm_h1(f) * norm_h1(z2));
    }
    SUBCASE("degenerate basis is detected") {
        CHECK_THROWS_AS(project_orthogonal(z1, {z1, z1}), std::invalid_argument);
    }
}
