#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "csk/error.hpp"

namespace csk {

using BigInt = boost::multiprecision::cpp_int;

inline BigInt factorial(std::uint64_t n) {
    BigInt f = 1;
    for (std::uint64_t i = 2; i <= n; ++i) f *= i;
    return f;
}

/// Number of ordered factorizations of n into kappa factors (Piltz divisor
/// function d_kappa). Recursion: d_1(n) = 1, d_k(n) = sum over d | n of d_{k-1}(d).
inline BigInt ordered_factorization_count(std::uint64_t n, std::uint32_t kappa) {
    if (n < 1) throw ValueError("ordered_factorization_count: n must be >= 1");
    if (kappa < 1) throw ValueError("ordered_factorization_count: kappa must be >= 1");

    std::vector<std::uint64_t> divisors;
    for (std::uint64_t d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            divisors.push_back(d);
            if (d != n / d) divisors.push_back(n / d);
        }
    }
    std::sort(divisors.begin(), divisors.end());

    // layer[i] = d_k(divisors[i]); every divisor of a divisor of n divides n,
    // so the table is closed under the recursion.
    std::vector<BigInt> layer(divisors.size(), 1);
    for (std::uint32_t k = 2; k <= kappa; ++k) {
        std::vector<BigInt> next(divisors.size(), 0);
        for (std::size_t i = 0; i < divisors.size(); ++i) {
            for (std::size_t j = 0; j <= i; ++j) {
                if (divisors[i] % divisors[j] == 0) next[i] += layer[j];
            }
        }
        layer = std::move(next);
    }
    return layer.back();
}

/// How many spatial configurations an n-cell signal flattened to a vector
/// could have come from, assuming a kappa-dimensional original: d_kappa(n) * n!.
inline BigInt count_spatial_configurations(std::uint64_t n, std::uint32_t kappa) {
    return ordered_factorization_count(n, kappa) * factorial(n);
}

}  // namespace csk
