#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sflab/basis.hpp"

namespace sflab {

/// Fractional exponent s of the spectral power. Strictly inside (0,1);
/// s = 1 is admitted only through classical_limit() and only the purely
/// spectral operations (apply_sfl, solve_linear, transition entries, the
/// Pohozaev forms) accept it, where it reproduces the local operator.
struct FractionalOrder {
    double s;

    static FractionalOrder fractional(double s) {
        if (!(s > 0.0 && s < 1.0))
            throw std::invalid_argument("s must lie in (0,1)");
        return FractionalOrder{s};
    }
    static FractionalOrder classical_limit() { return FractionalOrder{1.0}; }
    static FractionalOrder with_classical_limit(double s) {
        if (!(s > 0.0 && s <= 1.0))
            throw std::invalid_argument("s must lie in (0,1]");
        return FractionalOrder{s};
    }
    bool is_classical() const { return s == 1.0; }
};

/// A function on the domain, represented by its coefficients in a basis.
struct SpectralFunction {
    std::string basis_fingerprint;
    Eigen::VectorXd coeffs;
};

namespace detail {
inline void check_basis(const SpectralBasis& basis, const SpectralFunction& u,
                        const char* where) {
    if (u.basis_fingerprint != basis.fingerprint())
        throw std::invalid_argument(std::string(where) + ": function belongs to a different basis");
    if (u.coeffs.size() != basis.size())
        throw std::invalid_argument(std::string(where) + ": coefficient length mismatch");
}
}  // namespace detail

inline SpectralFunction make_spectral_function(const SpectralBasis& basis, Eigen::VectorXd coeffs) {
    if (coeffs.size() != basis.size())
        throw std::invalid_argument("make_spectral_function: coefficient length mismatch");
    return {basis.fingerprint(), std::move(coeffs)};
}

inline SpectralFunction unit_coefficient(const SpectralBasis& basis, int k) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(basis.size());
    c(k) = 1.0;
    return {basis.fingerprint(), std::move(c)};
}

/// Coefficients <f, phi_k> by the basis volume rule.
inline SpectralFunction analyze(const SpectralBasis& basis,
                                const std::function<double(const Point&)>& f) {
    const auto& nodes = basis.volume_nodes();
    Eigen::VectorXd fv(static_cast<int>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double v = f(nodes[i].x);
        if (!std::isfinite(v))
            throw std::runtime_error("analyze: non-finite sample at a quadrature node");
        fv(static_cast<int>(i)) = v;
    }
    Eigen::VectorXd coeffs =
        basis.values().transpose() * basis.volume_weights().cwiseProduct(fv);
    return {basis.fingerprint(), std::move(coeffs)};
}

inline double synthesize_at(const SpectralBasis& basis, const SpectralFunction& u, const Point& p) {
    detail::check_basis(basis, u, "synthesize");
    if (!basis.contains(p)) throw std::invalid_argument("synthesize: point outside the domain");
    double v = 0.0;
    for (int k = 0; k < basis.size(); ++k)
        if (u.coeffs(k) != 0.0) v += u.coeffs(k) * basis.pair(k).value(p);
    return v;
}

inline std::vector<double> synthesize(const SpectralBasis& basis, const SpectralFunction& u,
                                      std::span<const Point> points) {
    std::vector<double> out;
    out.reserve(points.size());
    for (const auto& p : points) out.push_back(synthesize_at(basis, u, p));
    return out;
}

/// Values of u at the basis volume nodes (table path, no per-point sums).
inline Eigen::VectorXd synthesize_on_nodes(const SpectralBasis& basis, const SpectralFunction& u) {
    detail::check_basis(basis, u, "synthesize_on_nodes");
    return basis.values() * u.coeffs;
}

inline Eigen::VectorXd spectral_powers(const SpectralBasis& basis, double s) {
    Eigen::VectorXd p(basis.size());
    for (int k = 0; k < basis.size(); ++k) p(k) = std::exp(s * std::log(basis.eigenvalue(k)));
    return p;
}

/// (-Delta|_Omega)^s u: multiplies coefficient k by lambda_k^s.
inline SpectralFunction apply_sfl(const SpectralBasis& basis, const SpectralFunction& u,
                                  FractionalOrder s) {
    detail::check_basis(basis, u, "apply_sfl");
    return {u.basis_fingerprint, spectral_powers(basis, s.s).cwiseProduct(u.coeffs)};
}

/// Spectral inverse: coefficient k of the result is lambda_k^{-s} g_k.
inline SpectralFunction solve_linear(const SpectralBasis& basis, const SpectralFunction& rhs,
                                     FractionalOrder s) {
    detail::check_basis(basis, rhs, "solve_linear");
    return {rhs.basis_fingerprint, spectral_powers(basis, -s.s).cwiseProduct(rhs.coeffs)};
}

inline double l2_norm(const SpectralFunction& u) { return u.coeffs.norm(); }

/// <(-Delta)^s u, u> = sum lambda_k^s u_k^2 (nonnegative, zero iff u = 0).
inline double sfl_energy(const SpectralBasis& basis, const SpectralFunction& u, FractionalOrder s) {
    detail::check_basis(basis, u, "sfl_energy");
    return u.coeffs.dot(spectral_powers(basis, s.s).cwiseProduct(u.coeffs));
}

}  // namespace sflab
