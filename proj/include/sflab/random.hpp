#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace sflab {

// mt19937_64 output is fully specified, so seeded draws reproduce bit-for-bit.
inline double uniform01(std::mt19937_64& gen) {
    return std::ldexp(static_cast<double>(gen() >> 11), -53);
}

inline double uniform_pm1(std::mt19937_64& gen) { return 2.0 * uniform01(gen) - 1.0; }

/// Random coefficient vector with the k^{-decay} envelope used by the
/// verification suites and probe guesses.
inline Eigen::VectorXd decayed_random_coefficients(int n, std::uint64_t seed, double decay = 2.0) {
    std::mt19937_64 gen(seed);
    Eigen::VectorXd v(n);
    for (int k = 0; k < n; ++k) v(k) = uniform_pm1(gen) / std::pow(k + 1.0, decay);
    return v;
}

/// Deterministic sub-seed for stream `index` of a master seed.
inline std::uint64_t subseed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t x = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

}  // namespace sflab
