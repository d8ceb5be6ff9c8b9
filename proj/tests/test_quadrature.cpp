#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sflab/quadrature.hpp"

using namespace sflab;
using Catch::Approx;

TEST_CASE("Gauss-Legendre integrates polynomials up to degree 2g-1") {
    for (int g : {2, 4, 8, 12, 16}) {
        const GaussRule& rule = gauss_rule(g);
        for (int deg = 0; deg <= 2 * g - 1; ++deg) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i)
                acc += rule.weights[i] * std::pow(rule.nodes[i], deg);
            const double exact = (deg % 2 == 0) ? 2.0 / (deg + 1) : 0.0;
            REQUIRE(acc == Approx(exact).margin(1e-13));
        }
    }
}

TEST_CASE("gauss rule nodes are symmetric and weights positive") {
    const GaussRule& rule = gauss_rule(12);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        REQUIRE(rule.weights[i] > 0.0);
        REQUIRE(rule.nodes[i] == Approx(-rule.nodes[rule.nodes.size() - 1 - i]).margin(1e-15));
    }
}

TEST_CASE("composite rule handles oscillatory integrands") {
    auto q = composite_gauss(0.0, std::numbers::pi, 16, 12);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) acc += q.w[i] * std::sin(q.x[i]);
    REQUIRE(acc == Approx(2.0).epsilon(1e-14));

    acc = 0.0;  // sin(20x)^2 over (0, pi) = pi/2
    for (std::size_t i = 0; i < q.x.size(); ++i)
        acc += q.w[i] * std::pow(std::sin(20.0 * q.x[i]), 2);
    REQUIRE(acc == Approx(std::numbers::pi / 2).epsilon(1e-13));
}

TEST_CASE("geometric panels resolve an endpoint-steep integrand") {
    // integral of t^{-3/2} over (a, b), closed form 2(a^{-1/2} - b^{-1/2})
    const double a = 1e-6, b = 1.0;
    auto q = geometric_gauss(a, b, 24, 16);
    double acc = 0.0;
    for (std::size_t i = 0; i < q.x.size(); ++i) acc += q.w[i] * std::pow(q.x[i], -1.5);
    REQUIRE(acc == Approx(2.0 * (1.0 / std::sqrt(a) - 1.0)).epsilon(1e-12));
}

TEST_CASE("invalid quadrature arguments are rejected") {
    REQUIRE_THROWS_AS(make_gauss_rule(0), std::invalid_argument);
    REQUIRE_THROWS_AS(composite_gauss(1.0, 0.0, 4), std::invalid_argument);
    REQUIRE_THROWS_AS(geometric_gauss(0.0, 1.0, 4), std::invalid_argument);
}
