#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sflab/semilinear.hpp"

using namespace sflab;
using Catch::Approx;

namespace {
const double pi = std::numbers::pi;
const auto half = FractionalOrder::fractional(0.5);
}

TEST_CASE("nonlinearity self-consistency by finite differences") {
    auto sq = rectangle_basis(0.0, pi, 0.0, pi, 4);
    std::vector<Point> xs;
    for (std::size_t i = 0; i < sq.volume_nodes().size(); i += 7)
        xs.push_back(sq.volume_nodes()[i].x);
    REQUIRE(nonlinearity_consistency_check(power_nonlinearity(3.0), xs, 1) < 1e-6);
    REQUIRE(nonlinearity_consistency_check(cubic_plus_linear(), xs, 2) < 1e-6);
    REQUIRE(nonlinearity_consistency_check(linear_nonlinearity(2.5), xs, 3) < 1e-6);
    auto src = source_nonlinearity([](const Point& p) { return std::sin(p.x) * std::cos(p.y); },
                                   [](const Point& p) {
                                       return Point{std::cos(p.x) * std::cos(p.y),
                                                    -std::sin(p.x) * std::sin(p.y)};
                                   });
    REQUIRE(nonlinearity_consistency_check(src, xs, 4) < 1e-6);
    // F(x, 0) = 0
    for (const auto& nl : {power_nonlinearity(2.0), cubic_plus_linear()})
        REQUIRE(nl.F({1.0, 1.0}, 0.0) == 0.0);
}

TEST_CASE("galerkin residual vanishes for exact solutions") {
    auto b = interval_basis(0.0, pi, 12);
    GalerkinWorkspace ws(b);

    // trivial solution of the power problem
    auto zero = make_spectral_function(b, Eigen::VectorXd::Zero(12));
    REQUIRE(galerkin_residual(ws, zero, half, power_nonlinearity(2.0)).norm() == 0.0);

    // eigenfunction of the linear problem f(t) = lambda_1^s t, any amplitude
    auto nl = linear_nonlinearity(std::pow(b.eigenvalue(0), 0.5));
    for (double c : {1.0, 2.7}) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(12);
        g(0) = c;
        REQUIRE(galerkin_residual(ws, make_spectral_function(b, g), half, nl).norm() < 1e-12);
    }

    // linear source f(x) = phi_1(x): u = solve_linear closes in coefficients
    auto rhs = unit_coefficient(b, 0);
    auto u = solve_linear(b, rhs, half);
    auto src = source_nonlinearity([&](const Point& p) { return b.pair(0).value(p); },
                                   [&](const Point& p) { return b.pair(0).gradient(p); });
    REQUIRE(galerkin_residual(ws, u, half, src).norm() < 1e-12);
}

TEST_CASE("newton: zero guess stays at the trivial solution") {
    auto b = rectangle_basis(0.0, pi, 0.0, pi, 8);
    GalerkinWorkspace ws(b);
    auto rep = newton_solve(ws, make_spectral_function(b, Eigen::VectorXd::Zero(8)), half,
                            power_nonlinearity(2.0));
    REQUIRE(rep.converged);
    REQUIRE(rep.sup_norm < 1e-12);
}

TEST_CASE("newton finds the nontrivial subcritical solution on the interval") {
    // N = 1 = 2s: no finite critical exponent, p = 2 is subcritical
    auto b = interval_basis(0.0, pi, 24);
    GalerkinWorkspace ws(b);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(24);
    g(0) = 1.5;
    auto rep = newton_solve(ws, make_spectral_function(b, g), half, power_nonlinearity(2.0),
                            1e-10, 60);
    REQUIRE(rep.converged);
    REQUIRE(rep.sup_norm > 1e-2);
    REQUIRE(rep.classification == "subcritical");
    // independent residual recheck
    REQUIRE(galerkin_residual(ws, rep.solution, half, power_nonlinearity(2.0)).norm() <= 1e-8);
}

TEST_CASE("newton on the square: subcritical solution satisfies the inequality") {
    auto b = rectangle_basis(0.0, pi, 0.0, pi, 16);
    GalerkinWorkspace ws(b);
    auto nl = power_nonlinearity(2.0);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(16);
    g(0) = 1.6;
    auto rep = newton_solve(ws, make_spectral_function(b, g), half, nl, 1e-10, 60);
    REQUIRE(rep.converged);
    REQUIRE(rep.sup_norm > 1e-2);
    REQUIRE(rep.pohozaev_value >= -1e-6);

    // power-law reduction: functional = ((2s-N)/2 + N/(p+1)) * int |u|^{p+1}
    const Eigen::VectorXd uv = ws.values() * rep.solution.coeffs;
    double lp = 0.0;
    for (int i = 0; i < uv.size(); ++i)
        lp += ws.weights()(i) * std::pow(std::abs(uv(i)), 3.0);
    const double coeff = 0.5 * (2.0 * 0.5 - 2.0) + 2.0 / 3.0;
    REQUIRE(rep.pohozaev_value == Approx(coeff * lp).margin(1e-8 * (1.0 + lp)));
}

TEST_CASE("pohozaev functional: zero, critical borderline, supercritical sign") {
    auto b = rectangle_basis(0.0, pi, 0.0, pi, 10);
    GalerkinWorkspace ws(b);
    auto zero = make_spectral_function(b, Eigen::VectorXd::Zero(10));
    REQUIRE(pohozaev_functional(ws, zero, half, power_nonlinearity(5.0)) == 0.0);

    auto u = make_spectral_function(b, decayed_random_coefficients(10, 42));
    // p = 3 is critical for N=2, s=1/2: the coefficient vanishes identically
    const double crit = pohozaev_functional(ws, u, half, power_nonlinearity(3.0));
    const Eigen::VectorXd uv = ws.values() * u.coeffs;
    double l4 = 0.0, l6 = 0.0;
    for (int i = 0; i < uv.size(); ++i) {
        l4 += ws.weights()(i) * std::pow(std::abs(uv(i)), 4.0);
        l6 += ws.weights()(i) * std::pow(std::abs(uv(i)), 6.0);
    }
    REQUIRE(std::abs(crit) < 1e-12 * (1.0 + l4));

    // p = 5: functional = -(1/6) int |u|^6 < 0
    const double sup = pohozaev_functional(ws, u, half, power_nonlinearity(5.0));
    REQUIRE(sup == Approx(-l6 / 6.0).epsilon(1e-10));
    REQUIRE(sup < 0.0);
}

TEST_CASE("criticality classification") {
    REQUIRE(criticality(2, 0.5, 3.0) == Criticality::critical);
    REQUIRE(criticality(2, 0.5, 5.0) == Criticality::supercritical);
    REQUIRE(criticality(2, 0.5, 2.0) == Criticality::subcritical);
    REQUIRE(criticality(1, 0.5, 7.0) == Criticality::subcritical);  // N = 2s
    REQUIRE(criticality(1, 0.3, 4.0) == Criticality::critical);     // (1+0.6)/(1-0.6) = 4
    REQUIRE(criticality(2, 0.5, 3.0 + 1e-14) == Criticality::supercritical);
    REQUIRE_THROWS_AS(criticality(2, 0.5, 1.0), std::invalid_argument);
    REQUIRE_THROWS_AS(criticality(2, 1.5, 2.0), std::invalid_argument);
}

TEST_CASE("probe: supercritical power on the square yields a clean verdict") {
    auto b = rectangle_basis(0.0, pi, 0.0, pi, 12);
    GalerkinWorkspace ws(b);
    ProbeOptions opt;
    opt.seed = 2024;
    auto report = nonexistence_probe(ws, half, power_nonlinearity(5.0), opt);
    REQUIRE(!report.refused);
    REQUIRE(report.verdict == "clean");
    REQUIRE(report.contradictions == 0);
    REQUIRE(report.runs.size() == 8);
    for (const auto& run : report.runs) {
        INFO(run.guess_id << " -> " << run.outcome);
        REQUIRE((run.outcome == "trivial" || run.outcome == "flagged_spurious" ||
                 run.outcome == "diverged"));
        // no converged nontrivial candidate may survive the inequality check
        if (run.converged && run.sup_norm > opt.trivial_sup_norm)
            REQUIRE(run.pohozaev_value < -opt.pohozaev_tol);
    }
}

TEST_CASE("probe refuses subcritical and mixed-sign nonlinearities") {
    auto b = rectangle_basis(0.0, pi, 0.0, pi, 8);
    GalerkinWorkspace ws(b);
    auto sub = nonexistence_probe(ws, half, power_nonlinearity(2.0));
    REQUIRE(sub.refused);
    REQUIRE(sub.refusal_reason.find("sign condition") != std::string::npos);

    // f(t) = t^3 + t: F = t^4/4 + t^2/2 fails F < ((N-2s)/2N) t f(t)
    auto cubic = nonexistence_probe(ws, half, cubic_plus_linear());
    REQUIRE(cubic.refused);
}

TEST_CASE("probe refuses non-star-shaped configurations") {
    auto b = rectangle_basis(0.0, pi, 0.0, pi, 8, {2.0 * pi, 0.0});
    GalerkinWorkspace ws(b);
    auto rep = nonexistence_probe(ws, half, power_nonlinearity(5.0));
    REQUIRE(rep.refused);
    REQUIRE(rep.refusal_reason.find("star-shaped") != std::string::npos);
}

TEST_CASE("evaluation failure is reported, not fatal") {
    auto b = interval_basis(0.0, pi, 6);
    GalerkinWorkspace ws(b);
    Nonlinearity bad = power_nonlinearity(2.0);
    bad.f = [](const Point&, double) { return std::numeric_limits<double>::quiet_NaN(); };
    Eigen::VectorXd g = Eigen::VectorXd::Zero(6);
    g(0) = 1.0;
    auto rep = newton_solve(ws, make_spectral_function(b, g), half, bad);
    REQUIRE(!rep.converged);
    REQUIRE(rep.message.find("evaluation failure") != std::string::npos);
}
