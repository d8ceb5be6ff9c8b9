#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace sflab {

/// Nodes and weights on (-1, 1).
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule by Newton iteration on the three-term recurrence.
inline GaussRule make_gauss_rule(int order) {
    if (order < 1) throw std::invalid_argument("gauss rule: order must be >= 1");
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int half = (order + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[order - 1 - i] = x;
        rule.weights[order - 1 - i] = w;
    }
    return rule;
}

inline const GaussRule& gauss_rule(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, make_gauss_rule(order)).first;
    return it->second;
}

struct Quadrature1D {
    std::vector<double> x;
    std::vector<double> w;
};

/// Composite Gauss-Legendre on (a, b) with equal panels.
inline Quadrature1D composite_gauss(double a, double b, int panels, int order = 12) {
    if (!(a < b)) throw std::invalid_argument("composite_gauss: need a < b");
    if (panels < 1) throw std::invalid_argument("composite_gauss: need panels >= 1");
    const GaussRule& rule = gauss_rule(order);
    Quadrature1D q;
    q.x.reserve(static_cast<std::size_t>(panels) * order);
    q.w.reserve(static_cast<std::size_t>(panels) * order);
    const double len = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * len;
        const double mid = lo + 0.5 * len;
        for (int i = 0; i < order; ++i) {
            q.x.push_back(mid + 0.5 * len * rule.nodes[i]);
            q.w.push_back(0.5 * len * rule.weights[i]);
        }
    }
    return q;
}

/// Composite Gauss-Legendre with geometrically graded panels from a to b,
/// useful near integrable endpoint singularities.
inline Quadrature1D geometric_gauss(double a, double b, int panels, int order = 16) {
    if (!(0.0 < a && a < b)) throw std::invalid_argument("geometric_gauss: need 0 < a < b");
    const GaussRule& rule = gauss_rule(order);
    Quadrature1D q;
    const double ratio = std::pow(b / a, 1.0 / panels);
    double lo = a;
    for (int p = 0; p < panels; ++p) {
        const double hi = (p + 1 == panels) ? b : lo * ratio;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < order; ++i) {
            q.x.push_back(mid + half * rule.nodes[i]);
            q.w.push_back(half * rule.weights[i]);
        }
        lo = hi;
    }
    return q;
}

}  // namespace sflab
