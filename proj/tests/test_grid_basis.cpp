#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "sflab/basis.hpp"

using namespace sflab;
using Catch::Approx;

namespace {
const double pi = std::numbers::pi;

// L = (0,2)^2 minus the closed top-right quarter [1,2]^2, star-shaped about
// centers slightly inside the reentrant corner.
GridMask lshape_mask(int cells_per_unit) {
    const int half = cells_per_unit - 1;  // last interior index before the notch line
    const int n = 2 * cells_per_unit - 1;
    const double h = 1.0 / cells_per_unit;
    std::vector<std::uint8_t> cells(static_cast<std::size_t>(n) * n, 0);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
            if (r < half || c < half) cells[static_cast<std::size_t>(r) * n + c] = 1;
    return GridMask(n, n, h, cells);
}

double fd_lambda1(double h) { return 8.0 / (h * h) * std::pow(std::sin(pi * h / 2.0), 2); }
}  // namespace

TEST_CASE("unit square grid: smallest eigenvalue matches the discrete closed form") {
    const double h = 1.0 / 16;
    auto b = grid_basis(GridMask::rectangle(15, 15, h), 4);
    REQUIRE(b.eigenvalue(0) == Approx(fd_lambda1(h)).epsilon(1e-10));
    REQUIRE(std::abs(b.eigenvalue(0) - 2.0 * pi * pi) / (2.0 * pi * pi) < 0.01);
    // modes 2 and 3 are the degenerate (1,2)/(2,1) pair
    REQUIRE(b.pair(1).multiplicity_tag == b.pair(2).multiplicity_tag);
}

TEST_CASE("Richardson ratio: halving h shrinks the eigenvalue error ~4x") {
    auto b1 = grid_basis(GridMask::rectangle(15, 15, 1.0 / 16), 1);
    auto b2 = grid_basis(GridMask::rectangle(31, 31, 1.0 / 32), 1);
    const double e1 = std::abs(b1.eigenvalue(0) - 2.0 * pi * pi);
    const double e2 = std::abs(b2.eigenvalue(0) - 2.0 * pi * pi);
    REQUIRE(e1 / e2 == Approx(4.0).margin(0.5));
}

TEST_CASE("L-shaped mask: discrete orthonormality to solver precision") {
    auto b = grid_basis(lshape_mask(8), 12, {0.75, 0.75});
    const Eigen::MatrixXd gram =
        b.values().transpose() * b.volume_weights().asDiagonal() * b.values();
    REQUIRE((gram - Eigen::MatrixXd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(star_shape_margin(b) == Approx(0.25).margin(1e-12));
}

TEST_CASE("grid moments: exact discrete diagonal and antisymmetry") {
    auto b = grid_basis(GridMask::rectangle(15, 15, 1.0 / 16), 8);
    const Eigen::MatrixXd M = radial_moment_matrix(b);
    for (int k = 0; k < 8; ++k) REQUIRE(M(k, k) == Approx(-1.0).margin(1e-10));
    for (int j = 0; j < 8; ++j)
        for (int k = 0; k < j; ++k) REQUIRE(M(j, k) + M(k, j) == Approx(0.0).margin(1e-10));

    auto bl = grid_basis(lshape_mask(8), 8, {0.75, 0.75});
    const Eigen::MatrixXd Ml = radial_moment_matrix(bl);
    for (int k = 0; k < 8; ++k) REQUIRE(Ml(k, k) == Approx(-1.0).margin(1e-10));
}

TEST_CASE("grid eigenvalues are nondecreasing and positive") {
    auto b = grid_basis(lshape_mask(6), 10, {0.8, 0.8});
    for (int k = 0; k < 10; ++k) {
        REQUIRE(b.eigenvalue(k) > 0.0);
        if (k) REQUIRE(b.eigenvalue(k) >= b.eigenvalue(k - 1));
    }
}

TEST_CASE("grid evaluator interpolates the lattice values") {
    const double h = 1.0 / 12;
    auto b = grid_basis(GridMask::rectangle(11, 11, h), 3);
    for (int i : {0, 40, 90}) {
        const Point x = b.volume_nodes()[i].x;
        for (int k = 0; k < 3; ++k)
            REQUIRE(b.pair(k).value(x) == Approx(b.values()(i, k)).margin(1e-12));
    }
    // midway between lattice nodes the interpolant stays near the average
    const Point mid{6.5 * h, 6.0 * h};
    const double v = b.pair(0).value(mid);
    REQUIRE(std::isfinite(v));
}

TEST_CASE("grid sign convention and boundary margin about the origin") {
    auto b = grid_basis(GridMask::rectangle(9, 9, 0.1), 4);
    for (int k = 0; k < 4; ++k) {
        double first = 0.0;
        for (int i = 0; i < static_cast<int>(b.volume_nodes().size()); ++i)
            if (std::abs(b.values()(i, k)) > 1e-8) {
                first = b.values()(i, k);
                break;
            }
        REQUIRE(first > 0.0);
    }
    REQUIRE(star_shape_margin(b) == Approx(0.0).margin(1e-14));
}

TEST_CASE("mask parsing from text") {
    const std::string text = "h=0.25\n0110\n1111\n0110\n";
    auto m = GridMask::from_string(text);
    REQUIRE(m.rows() == 3);
    REQUIRE(m.cols() == 4);
    REQUIRE(m.interior_count() == 8);
    REQUIRE(m.spacing() == Approx(0.25));
    // top file row maps to the highest internal row
    REQUIRE(m.on(2, 1));
    REQUIRE(!m.on(2, 0));
    REQUIRE(m.on(1, 0));
}

TEST_CASE("grid preconditions") {
    REQUIRE_THROWS_AS(grid_basis(GridMask::rectangle(3, 3, 0.1), 10), std::invalid_argument);
    // two disconnected blocks
    std::vector<std::uint8_t> cells = {1, 0, 1};
    REQUIRE_THROWS_AS(GridMask(1, 3, 0.1, cells), std::invalid_argument);
    REQUIRE_THROWS_AS(GridMask::from_string("0110\n"), std::invalid_argument);
    REQUIRE_THROWS_AS(GridMask::from_string("h=0.1\n0x1\n"), std::invalid_argument);
}
