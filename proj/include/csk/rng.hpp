#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "csk/error.hpp"

namespace csk {

/// Deterministic random source: mt19937_64 plus fixed derivation rules.
///
/// The raw 64-bit stream of mt19937_64 is pinned by the C++ standard, so a
/// given seed reproduces bit-identically on every platform. Standard-library
/// distributions are not portable, so all draws below are derived here with
/// fixed arithmetic:
///   uniform01       (x >> 11) * 2^-53                  -> [0, 1)
///   uniform_int     bitmask rejection on next_u64      -> unbiased inclusive range
///   normal          Box-Muller on two uniform01 draws  -> pair cached
///
/// Parallel workers derive their stream with split(i), i.e. seed ^ i.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer on [lo, hi], both inclusive. Unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        if (lo > hi) throw ValueError("uniform_int: empty range");
        const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo);
        if (span == UINT64_MAX) return static_cast<std::int64_t>(next_u64());
        const std::uint64_t n = span + 1;
        std::uint64_t mask = n - 1;
        mask |= mask >> 1; mask |= mask >> 2; mask |= mask >> 4;
        mask |= mask >> 8; mask |= mask >> 16; mask |= mask >> 32;
        std::uint64_t draw;
        do { draw = next_u64() & mask; } while (draw >= n);
        return lo + static_cast<std::int64_t>(draw);
    }

    /// Standard normal via Box-Muller; second member of each pair is cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    /// Deterministic per-worker stream: worker i uses seed ^ i.
    Rng split(std::uint64_t worker) const { return Rng(seed_ ^ worker); }

    /// Fisher-Yates; std::shuffle is not seed-portable across standard libraries.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices from [0, n), in draw order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        if (k > n) throw ValueError("sample_indices: k exceeds population");
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out;
        out.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const auto j = static_cast<std::size_t>(
                uniform_int(static_cast<std::int64_t>(i), static_cast<std::int64_t>(n) - 1));
            std::swap(pool[i], pool[j]);
            out.push_back(pool[i]);
        }
        return out;
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace csk
