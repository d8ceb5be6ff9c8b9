#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sflab/basis.hpp"
#include "sflab/subordination.hpp"

using namespace sflab;
using Catch::Approx;

TEST_CASE("Gamma(-s) from the reflection formula") {
    // Gamma(-1/2) = -2 sqrt(pi)
    REQUIRE(gamma_of_minus_s(0.5) == Approx(-2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-14));
    // recurrence spot check: Gamma(-s) = Gamma(1-s)/(-s) at s = 0.3
    REQUIRE(gamma_of_minus_s(0.3) ==
            Approx(std::tgamma(0.7) / (-0.3)).epsilon(1e-13));
    REQUIRE(gamma_of_minus_s(0.5) < 0.0);
}

TEST_CASE("subordination integral reproduces lambda^s") {
    REQUIRE(subordination_check(1.0, FractionalOrder::fractional(0.5)) ==
            Approx(1.0).margin(1e-10));
    REQUIRE(subordination_check(1.0, FractionalOrder::fractional(0.37)) ==
            Approx(1.0).margin(1e-10));
    REQUIRE(subordination_check(4.0, FractionalOrder::fractional(0.5)) ==
            Approx(2.0).margin(1e-8));
    REQUIRE(subordination_check(9.0, FractionalOrder::fractional(0.3)) ==
            Approx(std::pow(9.0, 0.3)).margin(1e-8));
}

TEST_CASE("subordination across a basis spectrum") {
    auto b = rectangle_basis(0.0, std::numbers::pi, 0.0, std::numbers::pi, 10);
    for (double s : {0.3, 0.5, 0.7}) {
        for (int k = 0; k < 10; ++k) {
            const double lam = b.eigenvalue(k);
            REQUIRE(subordination_check(lam, FractionalOrder::fractional(s)) ==
                    Approx(std::pow(lam, s)).margin(1e-8));
        }
    }
}

TEST_CASE("subordination rejects invalid inputs") {
    REQUIRE_THROWS_AS(subordination_check(-1.0, FractionalOrder::fractional(0.5)),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(subordination_check(1.0, FractionalOrder::classical_limit()),
                      std::invalid_argument);
}

TEST_CASE("non-convergent controls are reported") {
    SubordinationControls ctl;
    ctl.singular_panels = 1;
    ctl.tail_panels = 1;
    ctl.gauss_order = 2;
    ctl.tolerance = 1e-12;
    REQUIRE_THROWS_AS(subordination_check(100.0, FractionalOrder::fractional(0.9), ctl),
                      std::runtime_error);
}
