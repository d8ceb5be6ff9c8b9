#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace sflab {

/// J_m(x) for integer order m >= 0, x >= 0.
inline double bessel_j(int order, double x) {
    if (order < 0) throw std::invalid_argument("bessel_j: order must be >= 0");
    if (x < 0.0) throw std::invalid_argument("bessel_j: argument must be >= 0");
    return std::cyl_bessel_j(static_cast<double>(order), x);
}

/// J_m'(x) via the recurrence 2 J_m' = J_{m-1} - J_{m+1} (J_{-1} = -J_1).
inline double bessel_j_prime(int order, double x) {
    if (order == 0) return -bessel_j(1, x);
    return 0.5 * (bessel_j(order - 1, x) - bessel_j(order + 1, x));
}

/// First `count` positive zeros of J_m, by sign-scan bracketing and bisection.
/// Consecutive zeros are separated by more than pi, so a 0.25 step cannot
/// skip a bracket. A final Newton polish sharpens the bisection result.
inline std::vector<double> bessel_j_zeros(int order, int count) {
    if (count < 0) throw std::invalid_argument("bessel_j_zeros: count must be >= 0");
    std::vector<double> zeros;
    zeros.reserve(count);
    const double step = 0.25;
    // J_m > 0 on (0, j_{m,1}) and j_{m,1} > m, so start the scan near m.
    double x0 = (order == 0) ? 0.5 : static_cast<double>(order);
    double f0 = bessel_j(order, x0);
    const double hard_limit = x0 + 4.0 * (count + 2) + 40.0;
    while (static_cast<int>(zeros.size()) < count) {
        const double x1 = x0 + step;
        if (x1 > hard_limit)
            throw std::logic_error("bessel_j_zeros: failed to bracket a zero");
        const double f1 = bessel_j(order, x1);
        if ((f0 < 0.0) != (f1 < 0.0)) {
            double lo = x0, hi = x1, flo = f0;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = bessel_j(order, mid);
                if ((flo < 0.0) != (fm < 0.0))
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
                if (hi - lo < 1e-14 * hi) break;
            }
            double z = 0.5 * (lo + hi);
            for (int it = 0; it < 3; ++it) {
                const double d = bessel_j_prime(order, z);
                if (d == 0.0) break;
                z -= bessel_j(order, z) / d;
            }
            zeros.push_back(z);
        }
        x0 = x1;
        f0 = f1;
    }
    return zeros;
}

}  // namespace sflab
