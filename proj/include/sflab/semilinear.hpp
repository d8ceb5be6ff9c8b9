#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sflab/basis.hpp"
#include "sflab/pohozaev.hpp"
#include "sflab/random.hpp"
#include "sflab/spectral_function.hpp"

namespace sflab {

/// Right-hand side f(x,t) with primitive F(x,t) = int_0^t f(x,tau) dtau,
/// t-derivative f_t, and spatial gradient F_x of the primitive.
struct Nonlinearity {
    std::string kind = "custom";
    double p = 0.0;      // exponent for power kinds
    double scale = 1.0;
    std::function<double(const Point&, double)> f;
    std::function<double(const Point&, double)> f_t;
    std::function<double(const Point&, double)> F;
    std::function<Point(const Point&, double)> F_x;
};

inline Nonlinearity power_nonlinearity(double p, double scale = 1.0) {
    if (!(p > 1.0)) throw std::invalid_argument("power_nonlinearity: need p > 1");
    Nonlinearity nl;
    nl.kind = "power";
    nl.p = p;
    nl.scale = scale;
    nl.f = [p, scale](const Point&, double t) { return scale * std::pow(std::abs(t), p - 1.0) * t; };
    nl.f_t = [p, scale](const Point&, double t) { return scale * p * std::pow(std::abs(t), p - 1.0); };
    nl.F = [p, scale](const Point&, double t) {
        return scale * std::pow(std::abs(t), p + 1.0) / (p + 1.0);
    };
    nl.F_x = [](const Point&, double) { return Point{0.0, 0.0}; };
    return nl;
}

inline Nonlinearity linear_nonlinearity(double c) {
    Nonlinearity nl;
    nl.kind = "linear";
    nl.scale = c;
    nl.f = [c](const Point&, double t) { return c * t; };
    nl.f_t = [c](const Point&, double) { return c; };
    nl.F = [c](const Point&, double t) { return 0.5 * c * t * t; };
    nl.F_x = [](const Point&, double) { return Point{0.0, 0.0}; };
    return nl;
}

/// t-independent source term g(x): F(x,t) = g(x) t, F_x = grad g * t.
inline Nonlinearity source_nonlinearity(std::function<double(const Point&)> g,
                                        std::function<Point(const Point&)> grad_g) {
    Nonlinearity nl;
    nl.kind = "source";
    nl.f = [g](const Point& x, double) { return g(x); };
    nl.f_t = [](const Point&, double) { return 0.0; };
    nl.F = [g](const Point& x, double t) { return g(x) * t; };
    nl.F_x = [grad_g](const Point& x, double t) {
        const Point gg = grad_g(x);
        return Point{gg.x * t, gg.y * t};
    };
    return nl;
}

inline Nonlinearity cubic_plus_linear(double a = 1.0, double b = 1.0) {
    Nonlinearity nl;
    nl.kind = "cubic_plus_linear";
    nl.f = [a, b](const Point&, double t) { return a * t * t * t + b * t; };
    nl.f_t = [a, b](const Point&, double t) { return 3.0 * a * t * t + b; };
    nl.F = [a, b](const Point&, double t) { return 0.25 * a * t * t * t * t + 0.5 * b * t * t; };
    nl.F_x = [](const Point&, double) { return Point{0.0, 0.0}; };
    return nl;
}

/// Finite-difference self-consistency of (f, F, F_x) at random samples:
/// returns the worst |dF/dt - f| and |grad_x F - F_x| deviation.
inline double nonlinearity_consistency_check(const Nonlinearity& nl,
                                             const std::vector<Point>& sample_points,
                                             std::uint64_t seed, int trials = 100) {
    if (sample_points.empty())
        throw std::invalid_argument("nonlinearity_consistency_check: no sample points");
    std::mt19937_64 gen(seed);
    double worst = 0.0;
    const double dt = 1e-5, dx = 1e-5;
    for (int i = 0; i < trials; ++i) {
        const Point& x = sample_points[gen() % sample_points.size()];
        const double t = 3.0 * uniform_pm1(gen);
        const double fd_t = (nl.F(x, t + dt) - nl.F(x, t - dt)) / (2.0 * dt);
        worst = std::max(worst, std::abs(fd_t - nl.f(x, t)));
        const Point fx = nl.F_x(x, t);
        const double fd_x = (nl.F({x.x + dx, x.y}, t) - nl.F({x.x - dx, x.y}, t)) / (2.0 * dx);
        const double fd_y = (nl.F({x.x, x.y + dx}, t) - nl.F({x.x, x.y - dx}, t)) / (2.0 * dx);
        worst = std::max({worst, std::abs(fd_x - fx.x), std::abs(fd_y - fx.y)});
    }
    return worst;
}

/// Quadrature and mode tables for the nonlinear terms. Closed-form bases
/// refine the volume rule (|u|^{p-1} u steepens the integrand); grid bases
/// reuse their lattice sum.
class GalerkinWorkspace {
public:
    explicit GalerkinWorkspace(const SpectralBasis& basis, int overkill = 2) : basis_(basis) {
        if (!basis.closed_form() || overkill <= 1) {
            nodes_ = basis.volume_nodes();
            phi_ = basis.values();
            w_ = basis.volume_weights();
        } else {
            nodes_ = basis.refined_volume_nodes(overkill);
            const int nv = static_cast<int>(nodes_.size());
            phi_.resize(nv, basis.size());
            w_.resize(nv);
            for (int i = 0; i < nv; ++i) w_(i) = nodes_[i].w;
            for (int k = 0; k < basis.size(); ++k) {
                const auto& val = basis.pair(k).value;
                for (int i = 0; i < nv; ++i) phi_(i, k) = val(nodes_[i].x);
            }
        }
    }

    const SpectralBasis& basis() const { return basis_; }
    const std::vector<VolumeNode>& nodes() const { return nodes_; }
    const Eigen::MatrixXd& values() const { return phi_; }
    const Eigen::VectorXd& weights() const { return w_; }

private:
    const SpectralBasis& basis_;
    std::vector<VolumeNode> nodes_;
    Eigen::MatrixXd phi_;
    Eigen::VectorXd w_;
};

/// r_k = lambda_k^s u_k - <f(., u), phi_k>; zero residual characterizes
/// Galerkin solutions of (-Delta|_Omega)^s u = f(x, u).
inline Eigen::VectorXd galerkin_residual(const GalerkinWorkspace& ws, const Eigen::VectorXd& coeffs,
                                         FractionalOrder s, const Nonlinearity& nl) {
    const Eigen::VectorXd uv = ws.values() * coeffs;
    const int nv = static_cast<int>(ws.nodes().size());
    Eigen::VectorXd fv(nv);
    for (int i = 0; i < nv; ++i) {
        fv(i) = nl.f(ws.nodes()[i].x, uv(i));
        if (!std::isfinite(fv(i)))
            throw std::runtime_error("galerkin_residual: nonlinearity evaluation failed "
                                     "(non-finite value)");
    }
    return spectral_powers(ws.basis(), s.s).cwiseProduct(coeffs) -
           ws.values().transpose() * ws.weights().cwiseProduct(fv);
}

inline Eigen::VectorXd galerkin_residual(const GalerkinWorkspace& ws, const SpectralFunction& u,
                                         FractionalOrder s, const Nonlinearity& nl) {
    detail::check_basis(ws.basis(), u, "galerkin_residual");
    return galerkin_residual(ws, u.coeffs, s, nl);
}

/// Left-hand side of the Pohozaev inequality,
///   ((2s-N)/2) int u f(x,u) + N int F(x,u) + int (x-c) . F_x(x,u),
/// nonnegative for bounded solutions on star-shaped domains. For the power
/// kind this reduces to ((2s-N)/2 + N/(p+1)) int |u|^{p+1}.
inline double pohozaev_functional(const GalerkinWorkspace& ws, const SpectralFunction& u,
                                  FractionalOrder s, const Nonlinearity& nl) {
    detail::check_basis(ws.basis(), u, "pohozaev_functional");
    const double N = ws.basis().dimension();
    const Point c = ws.basis().domain().star_center;
    const Eigen::VectorXd uv = ws.values() * u.coeffs;
    double acc = 0.0;
    for (std::size_t i = 0; i < ws.nodes().size(); ++i) {
        const Point& x = ws.nodes()[i].x;
        const double t = uv(static_cast<int>(i));
        const Point fx = nl.F_x(x, t);
        const double integrand = 0.5 * (2.0 * s.s - N) * t * nl.f(x, t) + N * nl.F(x, t) +
                                 (x.x - c.x) * fx.x + (x.y - c.y) * fx.y;
        if (!std::isfinite(integrand))
            throw std::runtime_error("pohozaev_functional: quadrature failure on f(x,u)");
        acc += ws.weights()(static_cast<int>(i)) * integrand;
    }
    return acc;
}

enum class Criticality { subcritical, critical, supercritical };

inline const char* to_string(Criticality c) {
    switch (c) {
        case Criticality::subcritical: return "subcritical";
        case Criticality::critical: return "critical";
        default: return "supercritical";
    }
}

/// Compares p against (N+2s)/(N-2s) by cross-multiplication, which is exact
/// for dyadic-rational inputs. For N <= 2s every p > 1 is subcritical.
inline Criticality criticality(int N, double s, double p) {
    if (!(p > 1.0)) throw std::invalid_argument("criticality: need p > 1");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("criticality: s must lie in (0,1)");
    const double denom = N - 2.0 * s;
    if (denom <= 0.0) return Criticality::subcritical;
    const double lhs = p * denom, rhs = N + 2.0 * s;
    if (lhs < rhs) return Criticality::subcritical;
    if (lhs > rhs) return Criticality::supercritical;
    return Criticality::critical;
}

struct SolveReport {
    SpectralFunction solution;
    double residual_norm = 0.0;
    int newton_iters = 0;
    bool converged = false;
    double pohozaev_value = 0.0;
    double sup_norm = 0.0;  // on the quadrature grid (boundedness certificate)
    std::string classification = "n/a";
    std::string message;
};

/// Damped Newton iteration on the coefficient residual with Jacobian
/// lambda_k^s delta_jk - <f_t(.,u) phi_j, phi_k>. Steps halve (up to 20
/// times) whenever the residual norm fails to decrease.
inline SolveReport newton_solve(const GalerkinWorkspace& ws, const SpectralFunction& guess,
                                FractionalOrder s, const Nonlinearity& nl, double tol = 1e-10,
                                int max_iter = 50) {
    detail::check_basis(ws.basis(), guess, "newton_solve");
    const int n = ws.basis().size();
    const Eigen::VectorXd lam_s = spectral_powers(ws.basis(), s.s);
    Eigen::VectorXd u = guess.coeffs;
    SolveReport rep;
    rep.solution = guess;
    if (nl.kind == "power")
        rep.classification = to_string(criticality(ws.basis().dimension(), s.s, nl.p));
    try {
        Eigen::VectorXd r = galerkin_residual(ws, u, s, nl);
        double rn = r.norm();
        int iters = 0;
        while (rn > tol && iters < max_iter) {
            const Eigen::VectorXd uv = ws.values() * u;
            Eigen::VectorXd ftv(uv.size());
            for (int i = 0; i < uv.size(); ++i) ftv(i) = nl.f_t(ws.nodes()[i].x, uv(i));
            Eigen::MatrixXd J = Eigen::MatrixXd(lam_s.asDiagonal()) -
                                ws.values().transpose() *
                                    ws.weights().cwiseProduct(ftv).asDiagonal() * ws.values();
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(J);
            if (qr.rank() < n) {
                rep.message = "Jacobian solve failure (rank-deficient, near a bifurcation)";
                break;
            }
            const Eigen::VectorXd delta = qr.solve(r);
            if (!delta.allFinite()) {
                rep.message = "Jacobian solve failure (non-finite step)";
                break;
            }
            double alpha = 1.0;
            bool accepted = false;
            for (int halvings = 0; halvings < 20; ++halvings) {
                const Eigen::VectorXd cand = u - alpha * delta;
                const Eigen::VectorXd rc = galerkin_residual(ws, cand, s, nl);
                const double rcn = rc.norm();
                if (rcn < rn) {
                    u = cand;
                    r = rc;
                    rn = rcn;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                // Levenberg-Marquardt fallback: the damped Newton step stalls
                // near singular Jacobians; gradient-biased steps still descend
                // on ||r|| unless the iterate is merit-stationary.
                const Eigen::MatrixXd jtj = J.transpose() * J;
                const Eigen::VectorXd grad = J.transpose() * r;
                const double scale = jtj.diagonal().maxCoeff() + 1e-300;
                for (double mu : {1e-8, 1e-6, 1e-4, 1e-2, 1.0, 1e2}) {
                    const Eigen::VectorXd step =
                        (jtj + mu * scale * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(grad);
                    const Eigen::VectorXd cand = u - step;
                    const Eigen::VectorXd rc = galerkin_residual(ws, cand, s, nl);
                    const double rcn = rc.norm();
                    if (rcn < rn) {
                        u = cand;
                        r = rc;
                        rn = rcn;
                        accepted = true;
                        break;
                    }
                }
            }
            ++iters;
            if (!accepted) {
                rep.message = "diverged: residual did not decrease after 20 step halvings";
                break;
            }
        }
        rep.newton_iters = iters;
        rep.residual_norm = rn;
        rep.converged = rn <= tol;
        if (!rep.converged && rep.message.empty()) rep.message = "max_iter exceeded";
    } catch (const std::runtime_error& e) {
        rep.message = std::string("evaluation failure: ") + e.what();
        rep.converged = false;
        rep.residual_norm = std::numeric_limits<double>::infinity();
    }
    rep.solution = make_spectral_function(ws.basis(), u);
    rep.sup_norm = (ws.values() * u).cwiseAbs().maxCoeff();
    try {
        rep.pohozaev_value = pohozaev_functional(ws, rep.solution, s, nl);
    } catch (const std::runtime_error&) {
        rep.pohozaev_value = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

struct ProbeOptions {
    std::uint64_t seed = 0;
    std::vector<double> amplitudes = {0.1, 1.0, 10.0};
    int random_guesses = 5;
    double newton_tol = 1e-10;
    int max_iter = 80;
    double trivial_sup_norm = 1e-6;
    double pohozaev_tol = 1e-8;
};

struct ProbeRun {
    std::string guess_id;
    std::string outcome;  // trivial | flagged_spurious | contradiction | diverged
    bool converged = false;
    double residual = 0.0;
    double pohozaev_value = 0.0;
    double sup_norm = 0.0;
    int iters = 0;
};

struct ProbeReport {
    bool refused = false;
    std::string refusal_reason;
    std::vector<ProbeRun> runs;
    int contradictions = 0;
    std::string verdict;  // clean | contradiction | inconclusive | refused
};

/// Non-existence probe. Preconditions: the domain is star-shaped about its
/// configured center and the nonlinearity satisfies the pointwise sign
/// condition
///   ((2s-N)/2) t f(x,t) + N F(x,t) + (x-c) . F_x(x,t) < 0   (t != 0)
/// on a sample grid; otherwise the probe refuses to run. Every converged
/// nontrivial candidate must then fail the Pohozaev inequality (a truncation
/// artifact); a candidate that satisfies it is a contradiction finding and
/// would falsify the implementation, not the theory.
inline ProbeReport nonexistence_probe(const GalerkinWorkspace& ws, FractionalOrder s,
                                      const Nonlinearity& nl, const ProbeOptions& opt = {}) {
    ProbeReport report;
    const double margin = star_shape_margin(ws.basis());
    if (margin < 0.0) {
        report.refused = true;
        report.refusal_reason =
            "domain is not star-shaped about the configured center (margin " +
            std::to_string(margin) + ")";
        report.verdict = "refused";
        return report;
    }
    const double N = ws.basis().dimension();
    const Point c = ws.basis().domain().star_center;
    {
        std::vector<double> ts;
        for (int i = 0; i < 13; ++i) {
            const double t = std::pow(10.0, -3.0 + 0.5 * i);
            ts.push_back(t);
            ts.push_back(-t);
        }
        const auto& nodes = ws.basis().volume_nodes();
        const std::size_t stride = std::max<std::size_t>(1, nodes.size() / 40);
        for (std::size_t i = 0; i < nodes.size(); i += stride) {
            const Point& x = nodes[i].x;
            for (double t : ts) {
                const Point fx = nl.F_x(x, t);
                const double lhs = 0.5 * (2.0 * s.s - N) * t * nl.f(x, t) + N * nl.F(x, t) +
                                   (x.x - c.x) * fx.x + (x.y - c.y) * fx.y;
                if (!(lhs < 0.0)) {
                    char buf[160];
                    std::snprintf(buf, sizeof buf,
                                  "sign condition fails at t=%.6g, x=(%.6g,%.6g): value %.6g >= 0",
                                  t, x.x, x.y, lhs);
                    report.refused = true;
                    report.refusal_reason = buf;
                    report.verdict = "refused";
                    return report;
                }
            }
        }
    }

    auto classify = [&](const SolveReport& sr, const std::string& id) {
        ProbeRun run;
        run.guess_id = id;
        run.converged = sr.converged;
        run.residual = sr.residual_norm;
        run.pohozaev_value = sr.pohozaev_value;
        run.sup_norm = sr.sup_norm;
        run.iters = sr.newton_iters;
        if (!sr.converged)
            run.outcome = "diverged";
        else if (sr.sup_norm <= opt.trivial_sup_norm)
            run.outcome = "trivial";
        else if (sr.pohozaev_value >= -opt.pohozaev_tol) {
            run.outcome = "contradiction";
            ++report.contradictions;
        } else
            run.outcome = "flagged_spurious";
        report.runs.push_back(std::move(run));
    };

    const int n = ws.basis().size();
    for (std::size_t a = 0; a < opt.amplitudes.size(); ++a) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
        g(0) = opt.amplitudes[a];
        char id[48];
        std::snprintf(id, sizeof id, "phi1_x%g", opt.amplitudes[a]);
        classify(newton_solve(ws, make_spectral_function(ws.basis(), g), s, nl, opt.newton_tol,
                              opt.max_iter),
                 id);
    }
    for (int r = 0; r < opt.random_guesses; ++r) {
        Eigen::VectorXd g = decayed_random_coefficients(n, subseed(opt.seed, r));
        char id[48];
        std::snprintf(id, sizeof id, "random_%d", r);
        classify(newton_solve(ws, make_spectral_function(ws.basis(), g), s, nl, opt.newton_tol,
                              opt.max_iter),
                 id);
    }

    // A run that never converges produced no candidate: it cannot contradict
    // the inequality and is itself the expected supercritical behavior
    // (damped Newton either collapses to zero or stalls; see newton_solve).
    report.verdict = report.contradictions > 0 ? "contradiction" : "clean";
    return report;
}

}  // namespace sflab
