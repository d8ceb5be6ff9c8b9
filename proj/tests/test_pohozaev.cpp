#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "sflab/pohozaev.hpp"
#include "sflab/random.hpp"

using namespace sflab;
using Catch::Approx;

namespace {
const double pi = std::numbers::pi;
const auto half = FractionalOrder::fractional(0.5);

double identity_residual(const SpectralBasis& b, double s_val, std::uint64_t seed) {
    const auto s = FractionalOrder::with_classical_limit(s_val);
    const Eigen::MatrixXd M = radial_moment_matrix(b);
    const auto q1 = q1_matrix(b);
    const auto p = transition_matrix(b, s);
    const Eigen::MatrixXd qs = qs_schur(q1, p);
    auto u = make_spectral_function(b, decayed_random_coefficients(b.size(), seed));
    const double direct = qs_direct(b, M, u, s);
    const double schur = u.coeffs.dot(qs * u.coeffs);
    return std::abs(direct - schur) / (1.0 + std::abs(direct));
}
}  // namespace

TEST_CASE("transition entries: closed forms and the diagonal branch") {
    REQUIRE(transition_entry(4.0, 1.0, half) == Approx(1.0 / 3.0).epsilon(1e-15));
    REQUIRE(transition_entry(4.0, 4.0, half) == Approx(0.25).epsilon(1e-15));
    REQUIRE(transition_entry(1.0, 4.0, half) == Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("transition entries: stabilized branch near coalescing eigenvalues") {
    for (double lam : {0.5, 2.0, 100.0}) {
        for (double sv : {0.3, 0.7}) {
            const auto s = FractionalOrder::fractional(sv);
            const double got = transition_entry(lam, lam * (1.0 + 1e-13), s);
            const double expect = sv * std::pow(lam, sv - 1.0);
            REQUIRE(got == Approx(expect).epsilon(1e-6));
        }
    }
    // continuity across the stabilization threshold
    const double lam = 3.0;
    const double just_in = transition_entry(lam, lam * (1.0 + 9e-7), half);
    const double just_out = transition_entry(lam, lam * (1.0 + 2e-6), half);
    REQUIRE(just_in == Approx(just_out).epsilon(1e-6));
}

TEST_CASE("transition matrix at s = 1 is all ones") {
    auto b = interval_basis(0.0, pi, 6);
    const auto p = transition_matrix(b, FractionalOrder::classical_limit());
    REQUIRE((p.entries.array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("interval Q1 closed form jk(-1)^{j+k}") {
    auto b = interval_basis(0.0, pi, 6);
    const auto q1 = q1_matrix(b);
    for (int j = 1; j <= 6; ++j)
        for (int k = 1; k <= 6; ++k) {
            const double expect = j * k * (((j + k) % 2) ? -1.0 : 1.0);
            REQUIRE(q1.entries(j - 1, k - 1) == Approx(expect).margin(1e-10));
        }
}

TEST_CASE("Q1 diagonal reproduces the eigenvalues") {
    for (const auto& b : {rectangle_basis(0.0, pi, 0.0, pi, 10), disk_basis(1.0, 10)}) {
        const auto q1 = q1_matrix(b);
        for (int k = 0; k < b.size(); ++k)
            REQUIRE(q1.entries(k, k) == Approx(b.eigenvalue(k)).epsilon(1e-9));
    }
}

TEST_CASE("degenerate pairs carry vanishing Q1 and Q^s entries") {
    auto sq = rectangle_basis(0.0, pi, 0.0, pi, 3);
    const auto q1 = q1_matrix(sq);
    REQUIRE(std::abs(q1.entries(1, 2)) < 1e-12);
    const auto p = transition_matrix(sq, half);
    const Eigen::MatrixXd qs = qs_schur(q1, p);
    REQUIRE(std::abs(qs(1, 2)) < 1e-12);

    auto dk = disk_basis(1.0, 3);
    const auto q1d = q1_matrix(dk);
    REQUIRE(std::abs(q1d.entries(1, 2)) < 1e-12);
}

TEST_CASE("Schur product: s = 1 degenerates to Q1 and the diagonal is s lambda^s") {
    auto b = interval_basis(0.0, pi, 8);
    const auto q1 = q1_matrix(b);
    const auto p1 = transition_matrix(b, FractionalOrder::classical_limit());
    REQUIRE((qs_schur(q1, p1) - q1.entries).cwiseAbs().maxCoeff() < 1e-12);

    const auto ph = transition_matrix(b, half);
    const Eigen::MatrixXd qs = qs_schur(q1, ph);
    // k = 2: diagonal equals s lambda_k^s = 0.5 * 4^{1/2} = 1
    REQUIRE(qs(1, 1) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("qs_direct on eigenfunctions") {
    auto b = interval_basis(0.0, pi, 4);
    const Eigen::MatrixXd M = radial_moment_matrix(b);
    // u = phi_2, s = 1/2: s lambda^s = 0.5 * 2
    REQUIRE(qs_direct(b, M, unit_coefficient(b, 1), half) == Approx(1.0).margin(1e-10));
    // classical limit: Q^1[phi_1] = lambda_1
    REQUIRE(qs_direct(b, M, unit_coefficient(b, 0), FractionalOrder::classical_limit()) ==
            Approx(1.0).margin(1e-10));
}

TEST_CASE("main identity: direct equals Schur quadratic form") {
    auto iv = interval_basis(0.0, pi, 24);
    auto sq = rectangle_basis(0.0, pi, 0.0, pi, 16);
    for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            REQUIRE(identity_residual(iv, s, seed) < 1e-8);
            REQUIRE(identity_residual(sq, s, seed) < 1e-8);
        }
    }
}

TEST_CASE("psd_certify: rank-1 interval Q1 and an indefinite witness") {
    auto b = interval_basis(0.0, pi, 6);
    const auto q1 = q1_matrix(b);
    auto cert = psd_certify(q1.entries, 1e-10, "q1-interval");
    REQUIRE(cert.psd);
    REQUIRE(std::abs(cert.min_eigenvalue) < 1e-10 * (1.0 + cert.norm2));

    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    auto bad = psd_certify(m, 1e-12, "diag(1,-1)");
    REQUIRE(!bad.psd);
    REQUIRE(bad.min_eigenvalue == Approx(-1.0).epsilon(1e-14));
    REQUIRE(std::abs(bad.witness(1)) == Approx(1.0).epsilon(1e-12));
    REQUIRE(bad.witness_value == Approx(-1.0).epsilon(1e-12));

    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 0.5, -0.5, 1.0;
    REQUIRE_THROWS_AS(psd_certify(asym, 1e-10), std::invalid_argument);
}

TEST_CASE("P^(s) is PSD across spectra and s") {
    auto b = interval_basis(0.0, pi, 16);
    for (double s : {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}) {
        const auto p = transition_matrix(b, FractionalOrder::fractional(s));
        auto cert = psd_certify(p.entries, 1e-10);
        REQUIRE(cert.psd);
    }
    // synthetic log-uniform spectrum
    std::mt19937_64 gen(99);
    std::vector<double> lams(24);
    for (auto& l : lams) l = std::exp(6.0 * uniform01(gen) - 1.0);
    std::sort(lams.begin(), lams.end());
    for (double s : {0.25, 0.75}) {
        const auto p = transition_matrix(lams, FractionalOrder::fractional(s));
        REQUIRE(psd_certify(p.entries, 1e-10).psd);
    }
}

TEST_CASE("positivity transfer on star-shaped domains") {
    auto sq = rectangle_basis(0.0, pi, 0.0, pi, 16);
    REQUIRE(star_shape_margin(sq) >= 0.0);
    const auto q1 = q1_matrix(sq);
    REQUIRE(psd_certify(q1.entries, 1e-10).psd);
    for (double s : {0.3, 0.7}) {
        const auto p = transition_matrix(sq, FractionalOrder::fractional(s));
        REQUIRE(psd_certify(qs_schur(q1, p), 1e-10).psd);
    }
}

TEST_CASE("sign-flip invariance of the quadratic forms") {
    auto b = interval_basis(0.0, pi, 8);
    Eigen::MatrixXd flip(1, 1);
    flip << -1.0;
    auto flipped = rotate_eigengroup(b, 3, 1, flip);
    auto u = make_spectral_function(b, decayed_random_coefficients(8, 13));
    Eigen::VectorXd cf = u.coeffs;
    cf(3) = -cf(3);  // re-expansion of the same function in the flipped basis
    auto uf = make_spectral_function(flipped, cf);
    const auto s = FractionalOrder::fractional(0.6);
    const double q_orig = qs_direct(b, radial_moment_matrix(b), u, s);
    const double q_flip = qs_direct(flipped, radial_moment_matrix(flipped), uf, s);
    REQUIRE(q_orig == Approx(q_flip).epsilon(1e-12));

    const double schur_orig =
        u.coeffs.dot(qs_schur(q1_matrix(b), transition_matrix(b, s)) * u.coeffs);
    const double schur_flip =
        uf.coeffs.dot(qs_schur(q1_matrix(flipped), transition_matrix(flipped, s)) * uf.coeffs);
    REQUIRE(schur_orig == Approx(schur_flip).epsilon(1e-12));
}

TEST_CASE("rotation within a degenerate group preserves Q^s[u]") {
    auto sq = rectangle_basis(0.0, pi, 0.0, pi, 12);
    auto groups = sq.degenerate_groups();
    REQUIRE(!groups.empty());
    const auto [first, count] = groups[0];
    std::mt19937_64 gen(7);
    const auto s = FractionalOrder::fractional(0.45);
    auto u = make_spectral_function(sq, decayed_random_coefficients(12, 3));
    const double before =
        u.coeffs.dot(qs_schur(q1_matrix(sq), transition_matrix(sq, s)) * u.coeffs);
    for (int trial = 0; trial < 3; ++trial) {
        const double ang = 2.0 * pi * uniform01(gen);
        Eigen::MatrixXd rot(count, count);
        rot.setIdentity();
        rot(0, 0) = std::cos(ang);
        rot(0, 1) = -std::sin(ang);
        rot(1, 0) = std::sin(ang);
        rot(1, 1) = std::cos(ang);
        auto rotated = rotate_eigengroup(sq, first, count, rot);
        Eigen::VectorXd c2 = u.coeffs;
        c2.segment(first, count) = rot.transpose() * u.coeffs.segment(first, count);
        auto u2 = make_spectral_function(rotated, c2);
        const double after =
            u2.coeffs.dot(qs_schur(q1_matrix(rotated), transition_matrix(rotated, s)) * u2.coeffs);
        REQUIRE(after == Approx(before).margin(1e-9));
        // orthonormality survives the rotation
        const Eigen::MatrixXd gram = rotated.values().transpose() *
                                     rotated.volume_weights().asDiagonal() * rotated.values();
        REQUIRE((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("boundary/volume cross-check agrees on closed-form bases") {
    for (const auto& b : {interval_basis(0.0, pi, 10), rectangle_basis(0.0, pi, 0.0, pi, 10),
                          disk_basis(1.0, 10)}) {
        const Eigen::MatrixXd M = radial_moment_matrix(b);
        const auto bdry = q1_boundary_route(b);
        REQUIRE(q1_cross_check(b, M, bdry) < 1e-8);
    }
}

TEST_CASE("grid Q1: volume route with O(h^2)-consistent boundary traces") {
    auto g = grid_basis(GridMask::rectangle(15, 15, 1.0 / 16), 6);
    const auto q1 = q1_matrix(g);  // throws if the trace bound is violated
    for (int k = 0; k < 6; ++k) REQUIRE(q1.entries(k, k) == Approx(g.eigenvalue(k)));
    // identity holds to solver precision on the grid
    for (double s : {0.3, 0.7}) REQUIRE(identity_residual(g, s, 4) < 1e-11);
}
