#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "sflab/bessel.hpp"
#include "sflab/domain.hpp"
#include "sflab/quadrature.hpp"

namespace sflab {

struct EigenPair {
    int index = 0;  // 1-based position in the basis
    double lambda = 0.0;
    int multiplicity_tag = 0;  // equal-eigenvalue groups share a tag
    std::function<double(const Point&)> value;
    std::function<Point(const Point&)> gradient;
};

struct VolumeNode {
    Point x;
    double w;
};

struct BoundaryNode {
    Point x;
    Point normal;
    double w;            // surface weight
    double star_factor;  // (x - star_center) . normal
};

enum class BasisKind { interval, rectangle, disk, grid };

namespace detail {

inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 1469598103934665603ULL) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::vector<int> multiplicity_tags(const std::vector<double>& lams) {
    std::vector<int> tags(lams.size());
    int tag = 0;
    for (std::size_t i = 1; i < lams.size(); ++i) {
        const double scale = std::max({lams[i], lams[i - 1], 1.0});
        if (std::abs(lams[i] - lams[i - 1]) > 1e-9 * scale) ++tag;
        tags[i] = tag;
    }
    return tags;
}

// Panels so that trigonometric products of the highest retained mode are
// resolved with margin by the order-12 rule (>= 4 points per half-wavelength).
inline int trig_panels(int max_mode) { return std::max(4, (2 * max_mode + 5) / 3); }

}  // namespace detail

class SpectralBasis {
public:
    int size() const { return static_cast<int>(pairs_.size()); }
    int dimension() const { return domain_.dimension(); }
    const Domain& domain() const { return domain_; }
    BasisKind kind() const { return kind_; }
    bool closed_form() const { return kind_ != BasisKind::grid; }

    const EigenPair& pair(int k) const { return pairs_.at(static_cast<std::size_t>(k)); }
    double eigenvalue(int k) const { return pairs_.at(static_cast<std::size_t>(k)).lambda; }

    Eigen::VectorXd eigenvalue_vector() const {
        Eigen::VectorXd v(size());
        for (int k = 0; k < size(); ++k) v(k) = pairs_[k].lambda;
        return v;
    }

    const std::vector<VolumeNode>& volume_nodes() const { return vol_; }
    const std::vector<BoundaryNode>& boundary_nodes() const { return bdry_; }
    const Eigen::VectorXd& volume_weights() const { return vol_w_; }

    /// phi_k at the volume nodes, one column per mode.
    const Eigen::MatrixXd& values() const { return phi_; }
    const Eigen::MatrixXd& gradient_component(int d) const { return dphi_[d]; }

    /// (x - star_center) . grad phi_k at the volume nodes. On grid bases this
    /// is the symmetrized discrete dilation generator, which satisfies the
    /// summation-by-parts identities exactly (see grid_basis).
    const Eigen::MatrixXd& dilation() const { return dil_; }

    /// Outward normal derivative of phi_k at the boundary nodes. The
    /// tangential gradient vanishes on the boundary (Dirichlet data).
    const Eigen::MatrixXd& boundary_normal_derivative() const { return bnd_; }

    /// Declared accuracy of the node set (orthonormality / moment checks).
    double quadrature_tolerance() const { return quad_tol_; }

    double grid_spacing() const {
        const auto* g = std::get_if<GridMask>(&domain_.shape);
        return g ? g->spacing() : 0.0;
    }

    std::string fingerprint() const {
        std::uint64_t h = detail::fnv1a(domain_.describe().data(), domain_.describe().size());
        for (const auto& p : pairs_) h = detail::fnv1a(&p.lambda, sizeof(double), h);
        char buf[64];
        std::snprintf(buf, sizeof buf, ":n=%d:%016llx", size(), static_cast<unsigned long long>(h));
        return domain_.describe() + buf + rotation_marker_;
    }

    /// Contiguous groups of repeated eigenvalues, as (first index, count).
    std::vector<std::pair<int, int>> degenerate_groups() const {
        std::vector<std::pair<int, int>> groups;
        int start = 0;
        for (int k = 1; k <= size(); ++k) {
            if (k == size() || pairs_[k].multiplicity_tag != pairs_[start].multiplicity_tag) {
                if (k - start >= 2) groups.emplace_back(start, k - start);
                start = k;
            }
        }
        return groups;
    }

    bool contains(const Point& p) const {
        const double tol = 1e-12;
        if (const auto* iv = std::get_if<Interval>(&domain_.shape)) {
            const double pad = tol * (iv->b - iv->a);
            return p.x >= iv->a - pad && p.x <= iv->b + pad;
        }
        if (const auto* rc = std::get_if<Rectangle>(&domain_.shape)) {
            const double px = tol * (rc->bx - rc->ax), py = tol * (rc->by - rc->ay);
            return p.x >= rc->ax - px && p.x <= rc->bx + px && p.y >= rc->ay - py &&
                   p.y <= rc->by + py;
        }
        if (const auto* dk = std::get_if<Disk>(&domain_.shape)) {
            const Point d = p - dk->center;
            return std::sqrt(dot(d, d)) <= dk->radius * (1.0 + tol);
        }
        const auto& g = std::get<GridMask>(domain_.shape);
        const double h = g.spacing();
        return p.x >= 0.0 && p.x <= (g.cols() + 1) * h && p.y >= 0.0 && p.y <= (g.rows() + 1) * h;
    }

    /// Replays the volume rule with `factor` times the panel density
    /// (used for nonlinear integrands). Grid bases return their own nodes.
    std::vector<VolumeNode> refined_volume_nodes(int factor) const {
        if (factor < 1) throw std::invalid_argument("refined_volume_nodes: factor must be >= 1");
        if (kind_ == BasisKind::grid || factor == 1) return vol_;
        std::vector<VolumeNode> nodes;
        if (const auto* iv = std::get_if<Interval>(&domain_.shape)) {
            auto q = composite_gauss(iv->a, iv->b, panels_x_ * factor, order_);
            for (std::size_t i = 0; i < q.x.size(); ++i) nodes.push_back({{q.x[i], 0.0}, q.w[i]});
        } else if (const auto* rc = std::get_if<Rectangle>(&domain_.shape)) {
            auto qx = composite_gauss(rc->ax, rc->bx, panels_x_ * factor, order_);
            auto qy = composite_gauss(rc->ay, rc->by, panels_y_ * factor, order_);
            for (std::size_t i = 0; i < qx.x.size(); ++i)
                for (std::size_t j = 0; j < qy.x.size(); ++j)
                    nodes.push_back({{qx.x[i], qy.x[j]}, qx.w[i] * qy.w[j]});
        } else if (const auto* dk = std::get_if<Disk>(&domain_.shape)) {
            auto qr = composite_gauss(0.0, dk->radius, panels_x_ * factor, order_);
            const int nt = ntheta_ * factor;
            const double wt = 2.0 * std::numbers::pi / nt;
            for (std::size_t i = 0; i < qr.x.size(); ++i)
                for (int q = 0; q < nt; ++q) {
                    const double th = wt * q;
                    nodes.push_back({{dk->center.x + qr.x[i] * std::cos(th),
                                      dk->center.y + qr.x[i] * std::sin(th)},
                                     qr.w[i] * qr.x[i] * wt});
                }
        }
        return nodes;
    }

private:
    friend SpectralBasis interval_basis(double, double, int, Point);
    friend SpectralBasis rectangle_basis(double, double, double, double, int, Point);
    friend SpectralBasis disk_basis(double, int, Point, Point);
    friend SpectralBasis grid_basis(const GridMask&, int, Point);
    friend SpectralBasis rotate_eigengroup(const SpectralBasis&, int, int, const Eigen::MatrixXd&);

    SpectralBasis() = default;

    // Evaluates the closed-form evaluators on the stored nodes, applies the
    // deterministic sign convention, and fills all cached tables.
    void finalize_closed_form() {
        const int n = size();
        const int nv = static_cast<int>(vol_.size());
        const int nb = static_cast<int>(bdry_.size());
        phi_.resize(nv, n);
        dphi_[0].resize(nv, n);
        dphi_[1].resize(nv, n);
        dil_.resize(nv, n);
        bnd_.resize(nb, n);
        vol_w_.resize(nv);
        for (int i = 0; i < nv; ++i) vol_w_(i) = vol_[i].w;
        const Point c = domain_.star_center;
        for (int k = 0; k < n; ++k) {
            auto& p = pairs_[k];
            double sign = 1.0;
            for (int i = 0; i < nv; ++i) {
                const double v = p.value(vol_[i].x);
                if (std::abs(v) > 1e-8) {
                    sign = (v > 0.0) ? 1.0 : -1.0;
                    break;
                }
            }
            if (sign < 0.0) {
                auto val = std::move(p.value);
                auto grd = std::move(p.gradient);
                p.value = [val](const Point& q) { return -val(q); };
                p.gradient = [grd](const Point& q) {
                    const Point g = grd(q);
                    return Point{-g.x, -g.y};
                };
            }
            for (int i = 0; i < nv; ++i) {
                const Point& x = vol_[i].x;
                phi_(i, k) = p.value(x);
                const Point g = p.gradient(x);
                dphi_[0](i, k) = g.x;
                dphi_[1](i, k) = g.y;
                dil_(i, k) = (x.x - c.x) * g.x + (x.y - c.y) * g.y;
            }
            for (int i = 0; i < nb; ++i) {
                const Point g = p.gradient(bdry_[i].x);
                bnd_(i, k) = g.x * bdry_[i].normal.x + g.y * bdry_[i].normal.y;
            }
        }
    }

    Domain domain_;
    BasisKind kind_{};
    std::vector<EigenPair> pairs_;
    std::vector<VolumeNode> vol_;
    std::vector<BoundaryNode> bdry_;
    Eigen::VectorXd vol_w_;
    Eigen::MatrixXd phi_;
    Eigen::MatrixXd dphi_[2];
    Eigen::MatrixXd dil_;
    Eigen::MatrixXd bnd_;
    double quad_tol_ = 1e-10;
    std::string rotation_marker_;
    int panels_x_ = 0, panels_y_ = 0, order_ = 12, ntheta_ = 0;
};

/// Sine eigenbasis of the Dirichlet Laplacian on (a, b):
/// lambda_k = (k pi / L)^2, phi_k = sqrt(2/L) sin(k pi (x-a)/L).
inline SpectralBasis interval_basis(double a, double b, int n, Point star_center = {}) {
    if (!(a < b)) throw std::invalid_argument("interval_basis: need a < b");
    if (n < 1) throw std::invalid_argument("interval_basis: need n >= 1");
    SpectralBasis basis;
    basis.domain_ = Domain{Interval{a, b}, star_center};
    basis.kind_ = BasisKind::interval;
    const double L = b - a;
    const double amp = std::sqrt(2.0 / L);
    for (int k = 1; k <= n; ++k) {
        const double om = k * std::numbers::pi / L;
        EigenPair p;
        p.index = k;
        p.lambda = om * om;
        p.value = [amp, om, a](const Point& q) { return amp * std::sin(om * (q.x - a)); };
        p.gradient = [amp, om, a](const Point& q) {
            return Point{amp * om * std::cos(om * (q.x - a)), 0.0};
        };
        basis.pairs_.push_back(std::move(p));
    }
    std::vector<double> lams;
    for (auto& p : basis.pairs_) lams.push_back(p.lambda);
    auto tags = detail::multiplicity_tags(lams);
    for (int k = 0; k < n; ++k) basis.pairs_[k].multiplicity_tag = tags[k];

    basis.panels_x_ = detail::trig_panels(n);
    auto q = composite_gauss(a, b, basis.panels_x_, basis.order_);
    for (std::size_t i = 0; i < q.x.size(); ++i) basis.vol_.push_back({{q.x[i], 0.0}, q.w[i]});
    basis.bdry_.push_back({{a, 0.0}, {-1.0, 0.0}, 1.0, -(a - star_center.x)});
    basis.bdry_.push_back({{b, 0.0}, {1.0, 0.0}, 1.0, b - star_center.x});
    basis.quad_tol_ = 1e-10;
    basis.finalize_closed_form();
    return basis;
}

/// Tensor-product sine eigenbasis on (ax,bx) x (ay,by), sorted by eigenvalue
/// with ties grouped. Repeated eigenvalues occur for commensurate side
/// ratios (e.g. the square's (j,k)/(k,j) pairs).
inline SpectralBasis rectangle_basis(double ax, double bx, double ay, double by, int n,
                                     Point star_center = {}) {
    if (!(ax < bx) || !(ay < by)) throw std::invalid_argument("rectangle_basis: degenerate rectangle");
    if (n < 1) throw std::invalid_argument("rectangle_basis: need n >= 1");
    const double Lx = bx - ax, Ly = by - ay;
    struct Mode {
        double lambda;
        int j, k;
    };
    std::vector<Mode> modes;
    modes.reserve(static_cast<std::size_t>(n) * n);
    for (int j = 1; j <= n; ++j)
        for (int k = 1; k <= n; ++k) {
            const double wx = j * std::numbers::pi / Lx, wy = k * std::numbers::pi / Ly;
            modes.push_back({wx * wx + wy * wy, j, k});
        }
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.j != b.j) return a.j < b.j;
        return a.k < b.k;
    });
    modes.resize(n);

    SpectralBasis basis;
    basis.domain_ = Domain{Rectangle{ax, bx, ay, by}, star_center};
    basis.kind_ = BasisKind::rectangle;
    const double amp = 2.0 / std::sqrt(Lx * Ly);
    int mx = 1, my = 1;
    std::vector<double> lams;
    for (int i = 0; i < n; ++i) {
        const auto& m = modes[i];
        mx = std::max(mx, m.j);
        my = std::max(my, m.k);
        const double wx = m.j * std::numbers::pi / Lx, wy = m.k * std::numbers::pi / Ly;
        EigenPair p;
        p.index = i + 1;
        p.lambda = m.lambda;
        p.value = [amp, wx, wy, ax, ay](const Point& q) {
            return amp * std::sin(wx * (q.x - ax)) * std::sin(wy * (q.y - ay));
        };
        p.gradient = [amp, wx, wy, ax, ay](const Point& q) {
            return Point{amp * wx * std::cos(wx * (q.x - ax)) * std::sin(wy * (q.y - ay)),
                         amp * wy * std::sin(wx * (q.x - ax)) * std::cos(wy * (q.y - ay))};
        };
        basis.pairs_.push_back(std::move(p));
        lams.push_back(m.lambda);
    }
    auto tags = detail::multiplicity_tags(lams);
    for (int k = 0; k < n; ++k) basis.pairs_[k].multiplicity_tag = tags[k];

    basis.panels_x_ = detail::trig_panels(mx);
    basis.panels_y_ = detail::trig_panels(my);
    auto qx = composite_gauss(ax, bx, basis.panels_x_, basis.order_);
    auto qy = composite_gauss(ay, by, basis.panels_y_, basis.order_);
    for (std::size_t i = 0; i < qx.x.size(); ++i)
        for (std::size_t j = 0; j < qy.x.size(); ++j)
            basis.vol_.push_back({{qx.x[i], qy.x[j]}, qx.w[i] * qy.w[j]});

    const Point c = star_center;
    for (std::size_t j = 0; j < qy.x.size(); ++j) {
        basis.bdry_.push_back({{ax, qy.x[j]}, {-1.0, 0.0}, qy.w[j], -(ax - c.x)});
        basis.bdry_.push_back({{bx, qy.x[j]}, {1.0, 0.0}, qy.w[j], bx - c.x});
    }
    for (std::size_t i = 0; i < qx.x.size(); ++i) {
        basis.bdry_.push_back({{qx.x[i], ay}, {0.0, -1.0}, qx.w[i], -(ay - c.y)});
        basis.bdry_.push_back({{qx.x[i], by}, {0.0, 1.0}, qx.w[i], by - c.y});
    }
    basis.quad_tol_ = 1e-10;
    basis.finalize_closed_form();
    return basis;
}

/// Fourier-Bessel eigenbasis of the disk of radius R. Eigenvalues are
/// (j_{m,l}/R)^2 with j_{m,l} the l-th positive zero of J_m; each m >= 1
/// contributes a cos/sin pair of multiplicity two.
inline SpectralBasis disk_basis(double radius, int n, Point center = {}, Point star_center = {}) {
    if (!(radius > 0.0)) throw std::invalid_argument("disk_basis: need radius > 0");
    if (n < 1) throw std::invalid_argument("disk_basis: need n >= 1");

    struct Root {
        double z;
        int m, ell;
    };
    std::vector<Root> pool;
    {
        auto zeros0 = bessel_j_zeros(0, n);
        for (int l = 0; l < n; ++l) pool.push_back({zeros0[l], 0, l + 1});
        auto cutoff = [&]() {
            std::vector<Root> sorted = pool;
            std::sort(sorted.begin(), sorted.end(),
                      [](const Root& a, const Root& b) { return a.z < b.z; });
            int acc = 0;
            for (const auto& r : sorted) {
                acc += (r.m == 0) ? 1 : 2;
                if (acc >= n) return r.z;
            }
            return sorted.back().z;
        };
        double cut = cutoff();
        for (int m = 1;; ++m) {
            const int est = std::max(1, static_cast<int>((cut - m) / std::numbers::pi) + 3);
            auto zs = bessel_j_zeros(m, est);
            if (zs[0] > cut) break;
            for (int l = 0; l < est && zs[l] <= cut; ++l) pool.push_back({zs[l], m, l + 1});
            cut = cutoff();
        }
        std::sort(pool.begin(), pool.end(), [](const Root& a, const Root& b) {
            if (a.z != b.z) return a.z < b.z;
            return a.m < b.m;
        });
    }

    SpectralBasis basis;
    basis.domain_ = Domain{Disk{radius, center}, star_center};
    basis.kind_ = BasisKind::disk;
    const double R = radius;
    int mmax = 0;
    double jmax = 1.0;
    std::vector<double> lams;
    for (const auto& root : pool) {
        if (basis.size() >= n) break;
        const int m = root.m;
        const double z = root.z;
        const double A = 1.0 / (std::sqrt(std::numbers::pi) * R * std::abs(bessel_j(m + 1, z)));
        const double lambda = (z / R) * (z / R);
        const int types = (m == 0) ? 1 : 2;  // 1: axial; 2: cos then sin
        for (int t = 0; t < types && basis.size() < n; ++t) {
            const bool is_sin = (t == 1);
            EigenPair p;
            p.index = basis.size() + 1;
            p.lambda = lambda;
            p.value = [A, m, z, R, center, is_sin](const Point& q) {
                const Point d = q - center;
                const double r = std::sqrt(dot(d, d));
                const double rad = bessel_j(m, z * r / R);
                if (m == 0) return A * rad;
                const double th = std::atan2(d.y, d.x);
                const double ang = std::sqrt(2.0) * (is_sin ? std::sin(m * th) : std::cos(m * th));
                return A * rad * ang;
            };
            p.gradient = [A, m, z, R, center, is_sin](const Point& q) {
                const Point d = q - center;
                const double r = std::sqrt(dot(d, d));
                if (r < 1e-12 * R) {
                    // Only the m = 1 pair has a nonzero gradient at the center.
                    if (m != 1) return Point{0.0, 0.0};
                    const double slope = A * std::sqrt(2.0) * z / (2.0 * R);
                    return is_sin ? Point{0.0, slope} : Point{slope, 0.0};
                }
                const double th = std::atan2(d.y, d.x);
                const double rho = z * r / R;
                const double dr = A * (z / R) * bessel_j_prime(m, rho);
                double ang = 1.0, dang = 0.0;
                if (m > 0) {
                    ang = std::sqrt(2.0) * (is_sin ? std::sin(m * th) : std::cos(m * th));
                    dang = std::sqrt(2.0) * m * (is_sin ? std::cos(m * th) : -std::sin(m * th));
                }
                const double gr = dr * ang;
                const double gt = A * bessel_j(m, rho) * dang / r;
                const double ct = std::cos(th), st = std::sin(th);
                return Point{gr * ct - gt * st, gr * st + gt * ct};
            };
            basis.pairs_.push_back(std::move(p));
            lams.push_back(lambda);
        }
        mmax = std::max(mmax, m);
        jmax = std::max(jmax, z);
    }
    auto tags = detail::multiplicity_tags(lams);
    for (int k = 0; k < basis.size(); ++k) basis.pairs_[k].multiplicity_tag = tags[k];

    basis.panels_x_ = std::max(6, static_cast<int>(std::ceil(2.0 * jmax / 3.0)) + 2);
    basis.ntheta_ = 4 * mmax + 16;
    auto qr = composite_gauss(0.0, R, basis.panels_x_, basis.order_);
    const double wt = 2.0 * std::numbers::pi / basis.ntheta_;
    for (std::size_t i = 0; i < qr.x.size(); ++i)
        for (int q = 0; q < basis.ntheta_; ++q) {
            const double th = wt * q;
            basis.vol_.push_back({{center.x + qr.x[i] * std::cos(th),
                                   center.y + qr.x[i] * std::sin(th)},
                                  qr.w[i] * qr.x[i] * wt});
        }
    const int nb = std::max(basis.ntheta_, 64);
    const double wb = 2.0 * std::numbers::pi * R / nb;
    for (int q = 0; q < nb; ++q) {
        const double th = 2.0 * std::numbers::pi * q / nb;
        const Point nu{std::cos(th), std::sin(th)};
        const Point x{center.x + R * nu.x, center.y + R * nu.y};
        basis.bdry_.push_back({x, nu, wb, dot(x - star_center, nu)});
    }
    basis.quad_tol_ = 1e-9;
    basis.finalize_closed_form();
    return basis;
}

/// Five-point finite-difference Dirichlet Laplacian on the mask's interior
/// nodes; the n smallest eigenpairs are computed with a dense symmetric
/// solver (LAPACK dsyevr) and normalized in the h^2-weighted inner product.
///
/// The dilation table stores G phi_k with
///   G = (x - c) . grad_h + (h^2/4) Delta_h,
/// the symmetrization of the lattice dilation generator. With central
/// differences and zero extension this G satisfies G + G^T = -N id exactly,
/// so the diagonal moment -N/2 and the off-diagonal antisymmetry hold to
/// solver precision rather than to O(h^2).
inline SpectralBasis grid_basis(const GridMask& mask, int n, Point star_center = {}) {
    const int total = mask.interior_count();
    if (n < 1) throw std::invalid_argument("grid_basis: need n >= 1");
    if (n > total)
        throw std::invalid_argument("grid_basis: n exceeds the number of interior nodes");

    const double h = mask.spacing();
    const double h2 = h * h;
    // index map over marked nodes, row-major from the bottom row
    std::vector<int> idx(static_cast<std::size_t>(mask.rows()) * mask.cols(), -1);
    std::vector<std::pair<int, int>> rc;
    rc.reserve(total);
    for (int r = 0; r < mask.rows(); ++r)
        for (int c = 0; c < mask.cols(); ++c)
            if (mask.on(r, c)) {
                idx[static_cast<std::size_t>(r) * mask.cols() + c] = static_cast<int>(rc.size());
                rc.emplace_back(r, c);
            }
    auto node_index = [&](int r, int c) -> int {
        if (r < 0 || r >= mask.rows() || c < 0 || c >= mask.cols()) return -1;
        return idx[static_cast<std::size_t>(r) * mask.cols() + c];
    };

    // dense FD matrix, column-major (symmetric, so layout is immaterial)
    std::vector<double> A(static_cast<std::size_t>(total) * total, 0.0);
    for (int i = 0; i < total; ++i) {
        const auto [r, c] = rc[i];
        A[static_cast<std::size_t>(i) * total + i] = 4.0 / h2;
        const int nbr[4] = {node_index(r + 1, c), node_index(r - 1, c), node_index(r, c + 1),
                            node_index(r, c - 1)};
        for (int j : nbr)
            if (j >= 0) A[static_cast<std::size_t>(j) * total + i] = -1.0 / h2;
    }
    std::vector<double> w(total), z(static_cast<std::size_t>(total) * n);
    std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', total, A.data(), total, 0.0, 0.0, 1, n,
                       1e-13, &found, w.data(), z.data(), total, isuppz.data());
    if (info != 0 || found < n)
        throw std::runtime_error("grid_basis: eigensolver did not converge (dsyevr info=" +
                                 std::to_string(info) + ")");

    SpectralBasis basis;
    basis.domain_ = Domain{mask, star_center};
    basis.kind_ = BasisKind::grid;
    basis.quad_tol_ = 1e-8;

    basis.vol_.reserve(total);
    for (int i = 0; i < total; ++i) basis.vol_.push_back({mask.node_position(rc[i].first, rc[i].second), h2});
    basis.vol_w_.resize(total);
    for (int i = 0; i < total; ++i) basis.vol_w_(i) = h2;

    auto phi = std::make_shared<Eigen::MatrixXd>(total, n);
    for (int k = 0; k < n; ++k) {
        double sign = 1.0;
        for (int i = 0; i < total; ++i)
            if (std::abs(z[static_cast<std::size_t>(k) * total + i]) > 1e-8 * h) {
                sign = (z[static_cast<std::size_t>(k) * total + i] > 0.0) ? 1.0 : -1.0;
                break;
            }
        for (int i = 0; i < total; ++i)
            (*phi)(i, k) = sign * z[static_cast<std::size_t>(k) * total + i] / h;
    }
    basis.phi_ = *phi;

    auto dx = std::make_shared<Eigen::MatrixXd>(total, n);
    auto dy = std::make_shared<Eigen::MatrixXd>(total, n);
    auto at = [&](int j, int k) { return j >= 0 ? (*phi)(j, k) : 0.0; };
    for (int i = 0; i < total; ++i) {
        const auto [r, c] = rc[i];
        const int e = node_index(r, c + 1), wn = node_index(r, c - 1);
        const int no = node_index(r + 1, c), so = node_index(r - 1, c);
        for (int k = 0; k < n; ++k) {
            (*dx)(i, k) = (at(e, k) - at(wn, k)) / (2.0 * h);
            (*dy)(i, k) = (at(no, k) - at(so, k)) / (2.0 * h);
        }
    }
    basis.dphi_[0] = *dx;
    basis.dphi_[1] = *dy;

    basis.dil_.resize(total, n);
    for (int i = 0; i < total; ++i) {
        const Point x = basis.vol_[i].x;
        for (int k = 0; k < n; ++k)
            basis.dil_(i, k) = (x.x - star_center.x) * (*dx)(i, k) +
                               (x.y - star_center.y) * (*dy)(i, k) -
                               0.25 * h2 * w[k] * (*phi)(i, k);
    }

    // boundary faces: one per missing neighbor, with a second-order
    // one-sided normal derivative (zero extension supplies exterior values)
    struct Face {
        int inner, inner2;
        Point x, nu;
        double star;
    };
    std::vector<Face> faces;
    for (int i = 0; i < total; ++i) {
        const auto [r, c] = rc[i];
        const int step[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};  // (dr, dc)
        for (const auto& s : step) {
            if (node_index(r + s[0], c + s[1]) >= 0) continue;
            const Point nu{static_cast<double>(s[1]), static_cast<double>(s[0])};
            const Point q = basis.vol_[i].x + h * nu;
            faces.push_back({i, node_index(r - s[0], c - s[1]), q, nu,
                             dot(q - star_center, nu)});
        }
    }
    basis.bnd_.resize(static_cast<int>(faces.size()), n);
    for (std::size_t f = 0; f < faces.size(); ++f) {
        basis.bdry_.push_back({faces[f].x, faces[f].nu, h, faces[f].star});
        for (int k = 0; k < n; ++k) {
            const double p1 = (*phi)(faces[f].inner, k);
            const double p2 = faces[f].inner2 >= 0 ? (*phi)(faces[f].inner2, k) : 0.0;
            basis.bnd_(static_cast<int>(f), k) = (-4.0 * p1 + p2) / (2.0 * h);
        }
    }

    // evaluators: bilinear interpolation over the lattice (zero outside)
    struct Lattice {
        std::shared_ptr<Eigen::MatrixXd> phi, dx, dy;
        std::vector<int> idx;
        int rows, cols;
        double h;
        double get(const Eigen::MatrixXd& tab, int r, int c, int k) const {
            if (r < 0 || r >= rows || c < 0 || c >= cols) return 0.0;
            const int i = idx[static_cast<std::size_t>(r) * cols + c];
            return i >= 0 ? tab(i, k) : 0.0;
        }
        double bilerp(const Eigen::MatrixXd& tab, const Point& p, int k) const {
            const double gx = p.x / h - 1.0, gy = p.y / h - 1.0;
            const int c0 = static_cast<int>(std::floor(gx)), r0 = static_cast<int>(std::floor(gy));
            const double fx = gx - c0, fy = gy - r0;
            return (1 - fx) * (1 - fy) * get(tab, r0, c0, k) +
                   fx * (1 - fy) * get(tab, r0, c0 + 1, k) +
                   (1 - fx) * fy * get(tab, r0 + 1, c0, k) +
                   fx * fy * get(tab, r0 + 1, c0 + 1, k);
        }
    };
    auto lat = std::make_shared<Lattice>();
    lat->phi = phi;
    lat->dx = dx;
    lat->dy = dy;
    lat->idx = idx;
    lat->rows = mask.rows();
    lat->cols = mask.cols();
    lat->h = h;

    std::vector<double> lams(w.begin(), w.begin() + n);
    auto tags = detail::multiplicity_tags(lams);
    for (int k = 0; k < n; ++k) {
        EigenPair p;
        p.index = k + 1;
        p.lambda = w[k];
        p.multiplicity_tag = tags[k];
        p.value = [lat, k](const Point& q) { return lat->bilerp(*lat->phi, q, k); };
        p.gradient = [lat, k](const Point& q) {
            return Point{lat->bilerp(*lat->dx, q, k), lat->bilerp(*lat->dy, q, k)};
        };
        basis.pairs_.push_back(std::move(p));
    }
    return basis;
}

/// M_{jk} = integral of (x . grad phi_j) phi_k over the domain.
/// Diagonal -N/2, antisymmetric off the diagonal.
inline Eigen::MatrixXd radial_moment_matrix(const SpectralBasis& basis) {
    return basis.dilation().transpose() * basis.volume_weights().asDiagonal() * basis.values();
}

/// Minimum of (x - star_center) . nu over the boundary nodes. Nonnegative
/// return certifies star-shapedness at the quadrature resolution.
inline double star_shape_margin(const SpectralBasis& basis) {
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& b : basis.boundary_nodes()) margin = std::min(margin, b.star_factor);
    return margin;
}

/// New basis with the modes [first, first+count) replaced by their image
/// under the orthogonal matrix `rot`. Only meaningful within a degenerate
/// eigenvalue group; used to probe rotation invariance of the forms.
inline SpectralBasis rotate_eigengroup(const SpectralBasis& basis, int first, int count,
                                       const Eigen::MatrixXd& rot) {
    const int n = basis.size();
    if (first < 0 || count < 1 || first + count > n)
        throw std::invalid_argument("rotate_eigengroup: block out of range");
    if (rot.rows() != count || rot.cols() != count)
        throw std::invalid_argument("rotate_eigengroup: rotation size mismatch");
    if ((rot.transpose() * rot - Eigen::MatrixXd::Identity(count, count)).cwiseAbs().maxCoeff() >
        1e-10)
        throw std::invalid_argument("rotate_eigengroup: matrix is not orthogonal");
    for (int k = 1; k < count; ++k)
        if (basis.pair(first + k).multiplicity_tag != basis.pair(first).multiplicity_tag)
            throw std::invalid_argument("rotate_eigengroup: block spans distinct eigenvalues");

    SpectralBasis out = basis;
    out.phi_.middleCols(first, count) = basis.phi_.middleCols(first, count) * rot;
    out.dphi_[0].middleCols(first, count) = basis.dphi_[0].middleCols(first, count) * rot;
    out.dphi_[1].middleCols(first, count) = basis.dphi_[1].middleCols(first, count) * rot;
    out.dil_.middleCols(first, count) = basis.dil_.middleCols(first, count) * rot;
    out.bnd_.middleCols(first, count) = basis.bnd_.middleCols(first, count) * rot;
    for (int j = 0; j < count; ++j) {
        std::vector<std::function<double(const Point&)>> vals;
        std::vector<std::function<Point(const Point&)>> grads;
        Eigen::VectorXd col = rot.col(j);
        for (int i = 0; i < count; ++i) {
            vals.push_back(basis.pair(first + i).value);
            grads.push_back(basis.pair(first + i).gradient);
        }
        out.pairs_[first + j].value = [vals, col](const Point& q) {
            double v = 0.0;
            for (int i = 0; i < col.size(); ++i) v += col(i) * vals[i](q);
            return v;
        };
        out.pairs_[first + j].gradient = [grads, col](const Point& q) {
            Point g{0.0, 0.0};
            for (int i = 0; i < col.size(); ++i) {
                const Point gi = grads[i](q);
                g.x += col(i) * gi.x;
                g.y += col(i) * gi.y;
            }
            return g;
        };
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, ":rot[%d+%d:%016llx]", first, count,
                  static_cast<unsigned long long>(
                      detail::fnv1a(rot.data(), sizeof(double) * count * count)));
    out.rotation_marker_ = basis.rotation_marker_ + buf;
    return out;
}

}  // namespace sflab
