#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "bubbletower/inequalities.hpp"

using namespace bubbletower;

namespace {
const double kP = 9.0 / 5.0;  // critical exponent at N = 7
}

TEST_CASE("tag parsing round-trips") {
    for (const char* tag : {"2.1a", "2.1b", "2.2", "2.3", "2.4a", "2.4b", "2.5"}) {
        CHECK(lemma_to_string(lemma_from_string(tag)) == tag);
    }
    CHECK_THROWS_AS(lemma_from_string("3.1"), std::invalid_argument);
}

TEST_CASE("spot values") {
    {
        const double args[] = {1.0, 1.0, 0.5};
        auto c = check_inequality(Lemma::L21a, {args, 3}, kP);
        CHECK(c.lhs == doctest::Approx(std::sqrt(2.0)));
        CHECK(c.rhs_shape == doctest::Approx(2.0));
        CHECK(c.lhs <= c.rhs_shape);
    }
    {
        // a = 0 makes the linearization remainder exactly |b|^p
        for (double b : {0.3, -2.0, 1e4}) {
            const double args[] = {0.0, b};
            auto c = check_inequality(Lemma::L23, {args, 2}, kP);
            CHECK(c.lhs == doctest::Approx(c.rhs_shape).epsilon(1e-14));
        }
    }
    {
        const double args[] = {0.7, 1.3, 1.3};
        auto c = check_inequality(Lemma::L25, {args, 3}, kP);
        CHECK(c.lhs == 0.0);
    }
}

TEST_CASE("randomized suites exhibit stable finite constants") {
    const long n = 20000;
    for (Lemma lemma : {Lemma::L21a, Lemma::L21b, Lemma::L22, Lemma::L23, Lemma::L24a,
                        Lemma::L24b, Lemma::L25}) {
        auto run1 = run_inequality_suite(lemma, kP, n, 2024);
        auto run2 = run_inequality_suite(lemma, kP, n, 99);
        CHECK(run1.all_finite);
        CHECK(run2.all_finite);
        CHECK(run1.max_ratio > 0.0);
        CHECK(std::abs(run2.max_ratio - run1.max_ratio) <= 0.05 * run1.max_ratio);
    }
}

TEST_CASE("sub-additivity ratio never exceeds one for exponents below one") {
    auto run = run_inequality_suite(Lemma::L21a, kP, 20000, 7);
    CHECK(run.bounded_by_one);
    CHECK(run.max_ratio <= 1.0);
}
