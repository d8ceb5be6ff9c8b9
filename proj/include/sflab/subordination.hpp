#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "sflab/quadrature.hpp"
#include "sflab/spectral_function.hpp"

namespace sflab {

/// Gamma(-s) for s in (0,1), via the reflection formula
/// Gamma(-s) Gamma(1+s) = -pi / sin(pi s), with Gamma(1+s) from log-Gamma
/// on the positive axis. Negative for all s in (0,1).
inline double gamma_of_minus_s(double s) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("gamma_of_minus_s: s must lie in (0,1)");
    return -std::numbers::pi / (std::sin(std::numbers::pi * s) * std::exp(std::lgamma(1.0 + s)));
}

struct SubordinationControls {
    double split_scale = 1.0;   // t* = split_scale / lambda
    double series_cut = 1e-3;   // analytic series on (0, series_cut * t*)
    int singular_panels = 12;   // geometric panels on (a, t*)
    int tail_panels = 24;       // geometric panels on (t*, t_end)
    int gauss_order = 16;
    double tail_exponent = 45.0;  // integrate e^{-lambda t} out to lambda t = this
    double tolerance = 1e-10;     // demanded agreement between refinement levels
};

namespace detail {

inline double subordination_quadrature(double lambda, double s, const SubordinationControls& c) {
    const double tstar = c.split_scale / lambda;
    const double a = c.series_cut * tstar;

    // (0, a): expand e^{-lambda t} - 1 and integrate the powers analytically
    double series = 0.0, lam_pow = 1.0, fact = 1.0;
    for (int m = 1; m <= 60; ++m) {
        lam_pow *= -lambda;
        fact *= m;
        const double term = lam_pow / fact * std::pow(a, m - s) / (m - s);
        series += term;
        if (std::abs(term) < 1e-22 * (std::abs(series) + 1e-300)) break;
    }

    auto body = [&](const Quadrature1D& q, bool subtract_one) {
        double acc = 0.0;
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const double t = q.x[i];
            const double e = subtract_one ? std::expm1(-lambda * t) : std::exp(-lambda * t);
            acc += q.w[i] * e * std::pow(t, -1.0 - s);
        }
        return acc;
    };
    const double mid = body(geometric_gauss(a, tstar, c.singular_panels, c.gauss_order), true);
    const double tend = c.tail_exponent / lambda;
    const double tail_exp = body(geometric_gauss(tstar, tend, c.tail_panels, c.gauss_order), false);
    const double tail_one = -std::pow(tstar, -s) / s;  // -(integral of t^{-1-s} beyond t*)

    return (series + mid + tail_exp + tail_one) / gamma_of_minus_s(s);
}

}  // namespace detail

/// Heat-semigroup representation of lambda^s:
///   (1/Gamma(-s)) * integral over (0,inf) of (e^{-lambda t} - 1) t^{-1-s} dt.
/// Returns the quadrature value; evaluated at two refinement levels, and a
/// disagreement beyond ctl.tolerance is reported as non-convergence.
inline double subordination_check(double lambda, FractionalOrder s,
                                  const SubordinationControls& ctl = {}) {
    if (!(lambda > 0.0)) throw std::invalid_argument("subordination_check: lambda must be > 0");
    if (s.is_classical())
        throw std::invalid_argument("subordination_check: the integral requires s < 1");
    const double coarse = detail::subordination_quadrature(lambda, s.s, ctl);
    SubordinationControls fine = ctl;
    fine.singular_panels *= 2;
    fine.tail_panels *= 2;
    const double refined = detail::subordination_quadrature(lambda, s.s, fine);
    const double est = std::abs(refined - coarse);
    if (est > ctl.tolerance * (1.0 + std::abs(refined)))
        throw std::runtime_error("subordination_check: quadrature non-convergence, error estimate " +
                                 std::to_string(est));
    return refined;
}

}  // namespace sflab
