#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sflab/basis.hpp"
#include "sflab/spectral_function.hpp"

namespace sflab {

inline double power_s(double lambda, double s) { return std::exp(s * std::log(lambda)); }

/// Divided difference of t -> t^s over (lambda_j, lambda_k); s lambda^{s-1}
/// on the diagonal branch. Near-coincident eigenvalues are evaluated through
/// the integral form s * int_0^1 (lambda_k + tau (lambda_j - lambda_k))^{s-1} dtau,
/// which is uniformly accurate where the quotient cancels catastrophically.
inline double transition_entry(double lambda_j, double lambda_k, FractionalOrder s) {
    if (!(lambda_j > 0.0) || !(lambda_k > 0.0))
        throw std::invalid_argument("transition_entry: eigenvalues must be positive");
    if (s.is_classical()) return 1.0;  // divided difference of the identity
    const double diff = lambda_j - lambda_k;
    if (std::abs(diff) <= 1e-6 * std::max(lambda_j, lambda_k)) {
        const GaussRule& rule = gauss_rule(8);
        double acc = 0.0;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double tau = 0.5 + 0.5 * rule.nodes[i];
            acc += 0.5 * rule.weights[i] * power_s(lambda_k + tau * diff, s.s - 1.0);
        }
        return s.s * acc;
    }
    return (power_s(lambda_j, s.s) - power_s(lambda_k, s.s)) / diff;
}

/// The transition matrix P^(s) over a spectrum, with mu_k = log(lambda_k)/2.
struct TransitionP {
    double s;
    Eigen::MatrixXd entries;
    Eigen::VectorXd log_eigen;
};

inline TransitionP transition_matrix(std::span<const double> lambdas, FractionalOrder s) {
    const int n = static_cast<int>(lambdas.size());
    TransitionP p;
    p.s = s.s;
    p.entries.resize(n, n);
    p.log_eigen.resize(n);
    for (int k = 0; k < n; ++k) {
        if (!(lambdas[k] > 0.0))
            throw std::invalid_argument("transition_matrix: eigenvalues must be positive");
        p.log_eigen(k) = 0.5 * std::log(lambdas[k]);
    }
    for (int j = 0; j < n; ++j) {
        p.entries(j, j) = s.s * power_s(lambdas[j], s.s - 1.0);
        for (int k = 0; k < j; ++k) {
            const double v = transition_entry(lambdas[j], lambdas[k], s);
            p.entries(j, k) = v;
            p.entries(k, j) = v;
        }
    }
    return p;
}

inline TransitionP transition_matrix(const SpectralBasis& basis, FractionalOrder s) {
    std::vector<double> lams(basis.size());
    for (int k = 0; k < basis.size(); ++k) lams[k] = basis.eigenvalue(k);
    return transition_matrix(lams, s);
}

/// The classical Pohozaev quadratic form in eigencoordinates,
/// Q1_{jk} = (1/2) * integral over the boundary of
///           (grad phi_j . grad phi_k) (x - c) . nu dS.
struct PohozaevQ1 {
    std::string basis_fingerprint;
    Eigen::MatrixXd entries;
};

inline PohozaevQ1 q1_boundary_route(const SpectralBasis& basis) {
    const auto& B = basis.boundary_normal_derivative();
    const auto& nodes = basis.boundary_nodes();
    Eigen::VectorXd w(static_cast<int>(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i)
        w(static_cast<int>(i)) = nodes[i].w * nodes[i].star_factor;
    Eigen::MatrixXd raw = 0.5 * B.transpose() * w.asDiagonal() * B;
    return {basis.fingerprint(), 0.5 * (raw + raw.transpose())};
}

/// Volume route: lambda_k on the diagonal and
/// (lambda_j - lambda_k)/2 * M_{jk} off it (symmetrized), which coincides
/// with the boundary integral for exact eigenfunctions.
inline PohozaevQ1 q1_volume_route(const SpectralBasis& basis, const Eigen::MatrixXd& moments) {
    const int n = basis.size();
    Eigen::MatrixXd Q(n, n);
    for (int j = 0; j < n; ++j) {
        Q(j, j) = basis.eigenvalue(j);
        for (int k = 0; k < j; ++k) {
            const double v = 0.25 * (basis.eigenvalue(j) - basis.eigenvalue(k)) *
                             (moments(j, k) - moments(k, j));
            Q(j, k) = v;
            Q(k, j) = v;
        }
    }
    return {basis.fingerprint(), std::move(Q)};
}

/// Worst discrepancy of (lambda_j - lambda_k) M_{jk} against the boundary
/// integral, over nondegenerate pairs.
inline double q1_cross_check(const SpectralBasis& basis, const Eigen::MatrixXd& moments,
                             const PohozaevQ1& boundary) {
    double worst = 0.0;
    const int n = basis.size();
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k || basis.pair(j).multiplicity_tag == basis.pair(k).multiplicity_tag)
                continue;
            const double lhs = (basis.eigenvalue(j) - basis.eigenvalue(k)) * moments(j, k);
            const double rhs = 2.0 * boundary.entries(j, k);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    return worst;
}

/// Assembles Q1. Closed-form bases use the boundary integrals directly;
/// grid bases use the volume route, whose discrete identities are exact,
/// while the one-sided boundary traces serve as the cross-check. A
/// discrepancy beyond the declared tolerance flags quadrature failure.
inline PohozaevQ1 q1_matrix(const SpectralBasis& basis) {
    const Eigen::MatrixXd M = radial_moment_matrix(basis);
    const PohozaevQ1 bdry = q1_boundary_route(basis);
    if (basis.closed_form()) {
        const double worst = q1_cross_check(basis, M, bdry);
        if (worst > 1e-8)
            throw std::runtime_error(
                "q1_matrix: boundary/volume cross-check failed (worst " + std::to_string(worst) +
                "), volume rule under-resolves the basis");
        return bdry;
    }
    // grid: one-sided traces are O(h^2 lambda)-accurate, check against that bound
    const double h = basis.grid_spacing();
    const int n = basis.size();
    PohozaevQ1 vol = q1_volume_route(basis, M);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            if (j == k || basis.pair(j).multiplicity_tag == basis.pair(k).multiplicity_tag)
                continue;
            const double lhs = (basis.eigenvalue(j) - basis.eigenvalue(k)) * M(j, k);
            const double rhs = 2.0 * bdry.entries(j, k);
            const double tol =
                2.0 * h * h * (basis.eigenvalue(j) + basis.eigenvalue(k)) * (1.0 + std::abs(rhs));
            if (std::abs(lhs - rhs) > tol)
                throw std::runtime_error("q1_matrix: grid boundary trace inconsistent with the "
                                         "volume moments beyond the O(h^2) bound");
        }
    return vol;
}

/// Entrywise (Schur) product Q^(s) = P^(s) o Q^(1).
inline Eigen::MatrixXd qs_schur(const PohozaevQ1& q1, const TransitionP& p) {
    if (q1.entries.rows() != p.entries.rows() || q1.entries.cols() != p.entries.cols())
        throw std::invalid_argument("qs_schur: size mismatch");
    return p.entries.cwiseProduct(q1.entries);
}

/// Direct evaluation of
///   Q^(s)[u] = ((2s-N)/2) <u, (-Delta)^s u> - <x . grad u, (-Delta)^s u>
/// through the Fourier rewrite with the radial moment matrix.
inline double qs_direct(const SpectralBasis& basis, const Eigen::MatrixXd& moments,
                        const SpectralFunction& u, FractionalOrder s) {
    detail::check_basis(basis, u, "qs_direct");
    const double N = basis.dimension();
    const Eigen::VectorXd lam_s = spectral_powers(basis, s.s);
    const double quad = lam_s.dot(u.coeffs.cwiseAbs2());
    const double mixed = u.coeffs.dot(moments * lam_s.cwiseProduct(u.coeffs));
    return 0.5 * (2.0 * s.s - N) * quad - mixed;
}

inline double qs_direct(const SpectralBasis& basis, const SpectralFunction& u, FractionalOrder s) {
    return qs_direct(basis, radial_moment_matrix(basis), u, s);
}

/// Numerical PSD certificate from the full symmetric spectrum.
struct PsdCertificate {
    std::string matrix_id;
    double min_eigenvalue = 0.0;
    double norm2 = 0.0;   // spectral norm
    double tolerance = 0.0;
    std::string method = "full_spectrum";
    bool psd = false;
    Eigen::VectorXd witness;      // offending direction when indefinite
    double witness_value = 0.0;   // witness^T M witness
};

inline PsdCertificate psd_certify(const Eigen::MatrixXd& M, double tol,
                                  std::string matrix_id = "") {
    if (M.rows() != M.cols()) throw std::invalid_argument("psd_certify: matrix must be square");
    const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("psd_certify: matrix is not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("psd_certify: eigensolver did not converge");
    PsdCertificate cert;
    cert.matrix_id = std::move(matrix_id);
    cert.tolerance = tol;
    const auto& ev = es.eigenvalues();
    cert.min_eigenvalue = ev(0);
    cert.norm2 = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
    cert.psd = cert.min_eigenvalue >= -tol * (1.0 + cert.norm2);
    if (!cert.psd) {
        cert.witness = es.eigenvectors().col(0);
        cert.witness_value = cert.witness.dot(M * cert.witness);
    }
    return cert;
}

/// H_s(t) = sinh(s t)/sinh(t), continued by H_s(0) = s. Even in t, bounded
/// by s near zero and decaying like e^{-(1-s)|t|}.
inline double bochner_kernel(double t, double s) {
    const double a = std::abs(t);
    if (a < 1e-6) return s * (1.0 + (s * s - 1.0) * t * t / 6.0);
    if (a > 30.0)  // exp form avoids sinh overflow for large arguments
        return std::exp((s - 1.0) * a) * (1.0 - std::exp(-2.0 * s * a)) /
               (1.0 - std::exp(-2.0 * a));
    return std::sinh(s * t) / std::sinh(t);
}

/// Closed form of the inverse Fourier transform of H_s:
///   pi sin(pi s) / (cos(pi s) + cosh(2 pi^2 xi)),
/// strictly positive for all xi -- the positivity witness for P~^(s).
inline double bochner_transform_closed_form(double s, double xi) {
    return std::numbers::pi * std::sin(std::numbers::pi * s) /
           (std::cos(std::numbers::pi * s) + std::cosh(2.0 * std::numbers::pi * std::numbers::pi * xi));
}

/// 2 * int_0^T cos(2 pi xi t) H_s(t) dt with unit-width Gauss panels; T is
/// chosen from the known e^{-(1-s)t} decay so the truncated tail is below
/// requested_tol, otherwise the truncation error is reported.
inline double bochner_transform_quadrature(double s, double xi, double requested_tol = 1e-9) {
    if (!(s > 0.0 && s < 1.0))
        throw std::invalid_argument("bochner_transform_quadrature: s must lie in (0,1)");
    const double decay = 1.0 - s;
    double T = std::ceil(-std::log(requested_tol * decay / 4.8) / decay);
    if (T > 4000.0)
        throw std::runtime_error("bochner_transform_quadrature: truncation error estimate exceeds "
                                 "the requested tolerance at a representable horizon");
    const double tail_bound = 2.0 * 1.2 * std::exp(-decay * T) / decay;
    if (tail_bound > requested_tol)
        throw std::runtime_error("bochner_transform_quadrature: truncation error estimate " +
                                 std::to_string(tail_bound) + " exceeds the requested tolerance");
    const int order = std::max(12, static_cast<int>(std::ceil(2.0 * std::numbers::pi * std::abs(xi))) + 10);
    const GaussRule& rule = gauss_rule(order);
    double acc = 0.0;
    const int panels = static_cast<int>(T);
    for (int p = 0; p < panels; ++p) {
        const double mid = p + 0.5;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            const double t = mid + 0.5 * rule.nodes[i];
            acc += 0.5 * rule.weights[i] * std::cos(2.0 * std::numbers::pi * xi * t) *
                   bochner_kernel(t, s);
        }
    }
    return 2.0 * acc;
}

/// Max deviation of the quadrature from the closed form over a xi grid.
inline double bochner_transform_check(double s, std::span<const double> xi_grid,
                                      double requested_tol = 1e-9) {
    double worst = 0.0;
    for (double xi : xi_grid)
        worst = std::max(worst, std::abs(bochner_transform_quadrature(s, xi, requested_tol) -
                                         bochner_transform_closed_form(s, xi)));
    return worst;
}

/// Verifies P_{jk} = e^{(s-1)(mu_j+mu_k)} H_s(mu_j - mu_k) entrywise;
/// the factorization behind the Schur/Bochner positivity chain.
inline double transition_factorization_check(const TransitionP& p) {
    const int n = static_cast<int>(p.entries.rows());
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            const double mu_j = p.log_eigen(j), mu_k = p.log_eigen(k);
            const double predicted =
                std::exp((p.s - 1.0) * (mu_j + mu_k)) * bochner_kernel(mu_j - mu_k, p.s);
            worst = std::max(worst, std::abs(p.entries(j, k) - predicted));
        }
    return worst;
}

}  // namespace sflab
