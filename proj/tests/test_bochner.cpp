#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "sflab/pohozaev.hpp"
#include "sflab/random.hpp"

using namespace sflab;
using Catch::Approx;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("kernel value at zero and hyperbolic closed forms") {
    for (double s : {0.1, 0.5, 0.9}) REQUIRE(bochner_kernel(0.0, s) == Approx(s).epsilon(1e-14));
    // H_{1/2}(2 log 2) = sinh(log 2)/sinh(2 log 2) = (3/4)/(15/8) = 2/5
    REQUIRE(bochner_kernel(2.0 * std::log(2.0), 0.5) == Approx(0.4).epsilon(1e-14));
}

TEST_CASE("kernel is even and decays like e^{-(1-s)|t|}") {
    std::mt19937_64 gen(17);
    for (int i = 0; i < 20; ++i) {
        const double t = 20.0 * uniform_pm1(gen);
        const double s = 0.05 + 0.9 * uniform01(gen);
        REQUIRE(bochner_kernel(-t, s) == Approx(bochner_kernel(t, s)).epsilon(1e-13));
        REQUIRE(bochner_kernel(t, s) > 0.0);
        REQUIRE(bochner_kernel(t, s) <= 1.2 * std::exp(-(1.0 - s) * std::abs(t)) + s);
    }
    // exp-form branch stays finite far out
    REQUIRE(std::isfinite(bochner_kernel(500.0, 0.9)));
    REQUIRE(bochner_kernel(500.0, 0.9) == Approx(std::exp(-0.1 * 500.0)).epsilon(1e-12));
}

TEST_CASE("series branch matches the direct quotient near zero") {
    for (double s : {0.25, 0.75}) {
        const double t = 2e-6;
        REQUIRE(bochner_kernel(t, s) == Approx(std::sinh(s * t) / std::sinh(t)).epsilon(1e-12));
    }
}

TEST_CASE("closed form of the transform at anchor points") {
    REQUIRE(bochner_transform_closed_form(0.5, 0.0) == Approx(pi).epsilon(1e-15));
    // 2 pi^2 xi = 1: value pi/(0 + cosh 1)
    const double xi = 1.0 / (2.0 * pi * pi);
    REQUIRE(bochner_transform_closed_form(0.5, xi) ==
            Approx(pi / std::cosh(1.0)).epsilon(1e-15));
}

TEST_CASE("quadrature reproduces the closed form over a frequency grid") {
    std::vector<double> grid;
    for (int i = 0; i <= 20; ++i) grid.push_back(0.025 * i);
    for (double s : {0.25, 0.5, 0.75}) {
        const double err = bochner_transform_check(s, grid, 1e-9);
        REQUIRE(err < 1e-6);
    }
    REQUIRE(bochner_transform_quadrature(0.5, 0.0, 1e-9) == Approx(pi).margin(1e-8));
}

TEST_CASE("transform is strictly positive (the Bochner witness)") {
    for (double s : {0.1, 0.5, 0.9}) {
        for (double xi : {0.0, 0.1, 0.5, 1.0})
            REQUIRE(bochner_transform_closed_form(s, xi) > 0.0);
    }
}

TEST_CASE("transition factorization P = e^{(s-1)(mu_j+mu_k)} H_s(mu_j - mu_k)") {
    auto b = interval_basis(0.0, pi, 16);
    for (double s : {0.3, 0.5, 0.8}) {
        const auto p = transition_matrix(b, FractionalOrder::fractional(s));
        REQUIRE(transition_factorization_check(p) < 1e-12);
    }
    // random log-uniform spectrum
    std::mt19937_64 gen(23);
    std::vector<double> lams(20);
    for (auto& l : lams) l = std::exp(5.0 * uniform01(gen) - 2.0);
    std::sort(lams.begin(), lams.end());
    const auto p = transition_matrix(lams, FractionalOrder::fractional(0.6));
    REQUIRE(transition_factorization_check(p) < 1e-12);
}

TEST_CASE("factorized entry reproduces the divided difference at (4,1)") {
    const double mu_j = 0.5 * std::log(4.0), mu_k = 0.0;
    const double factored =
        std::exp(-0.5 * (mu_j + mu_k)) * bochner_kernel(mu_j - mu_k, 0.5);
    REQUIRE(factored == Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("transform quadrature reports unattainable truncation requests") {
    REQUIRE_THROWS_AS(bochner_transform_quadrature(0.999999, 0.0, 1e-12), std::runtime_error);
}
