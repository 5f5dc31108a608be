#pragma once

#include <cmath>
#include <cstdlib>
#include <limits>
#include <vector>

#include "csk/correlation.hpp"
#include "csk/error.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Vectorized Euclidean distance between equal-shape signals.
inline double euclidean_distance(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "euclidean_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

struct ShiftMinResult {
    double distance = 0.0;
    Offsets shift;  // translation applied to a that best aligns it with b
};

/// Shift-minimized Euclidean distance: a is zero-padded and slid over
/// [-max_shift, +max_shift] per axis against b; returns the minimum and the
/// minimizing shift (ties resolved to the lexicographically smallest shift).
/// Sums run over b's frame, so content shifted outside the frame is dropped
/// by the padding convention.
inline ShiftMinResult shift_min_distance(const Tensor& a, const Tensor& b,
                                         const Offsets& max_shift) {
    require_same_shape(a, b, "shift_min_distance");
    if (max_shift.size() != a.rank()) {
        throw ValueError("shift_min_distance: max_shift needs one entry per axis");
    }
    for (auto s : max_shift)
        if (s < 0) throw ValueError("shift_min_distance: max_shift must be >= 0");

    const std::size_t rank = a.rank();
    const std::ptrdiff_t n0 = static_cast<std::ptrdiff_t>(a.extent(0));
    const std::ptrdiff_t n1 = rank == 2 ? static_cast<std::ptrdiff_t>(a.extent(1)) : 1;
    const std::ptrdiff_t s0 = max_shift[0];
    const std::ptrdiff_t s1 = rank == 2 ? max_shift[1] : 0;

    ShiftMinResult best;
    best.distance = std::numeric_limits<double>::infinity();
    for (std::ptrdiff_t x = -s0; x <= s0; ++x) {
        for (std::ptrdiff_t y = -s1; y <= s1; ++y) {
            double acc = 0.0;
            for (std::ptrdiff_t i = 0; i < n0; ++i) {
                const std::ptrdiff_t ia = i - x;
                const bool row_in = ia >= 0 && ia < n0;
                for (std::ptrdiff_t j = 0; j < n1; ++j) {
                    const std::ptrdiff_t ja = j - y;
                    double av = 0.0;
                    if (row_in && ja >= 0 && ja < n1)
                        av = a[static_cast<std::size_t>(ia * n1 + ja)];
                    const double d = av - b[static_cast<std::size_t>(i * n1 + j)];
                    acc += d * d;
                }
            }
            const double dist = std::sqrt(acc);
            if (dist < best.distance) {
                best.distance = dist;
                best.shift = rank == 2 ? Offsets{x, y} : Offsets{x};
            }
        }
    }
    return best;
}

/// Default search window: the full overlap range, extent - 1 per axis.
inline ShiftMinResult shift_min_distance(const Tensor& a, const Tensor& b) {
    Offsets ms(a.rank());
    for (std::size_t ax = 0; ax < a.rank(); ++ax)
        ms[ax] = static_cast<std::ptrdiff_t>(a.extent(ax)) - 1;
    return shift_min_distance(a, b, ms);
}

/// Inverse-of-peak-cross-correlation distance. The raw (unnormalized)
/// correlation is the default; normalized divides by ||a||*||b||.
/// A non-positive correlation peak leaves the distance undefined.
inline double xcorr_distance(const Tensor& a, const Tensor& b, bool normalized = false,
                             CorrMode mode = CorrMode::Auto) {
    require_same_shape(a, b, "xcorr_distance");
    const Tensor c = xcorr_full(a, b, mode);
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < c.size(); ++i) peak = std::max(peak, c[i]);
    if (normalized) {
        const double denom = l2_norm(a) * l2_norm(b);
        if (denom <= 0.0) throw NumericError("xcorr_distance: zero-energy operand");
        peak /= denom;
    }
    if (peak <= 0.0) {
        throw NumericError("xcorr_distance: correlation peak is not positive, distance undefined");
    }
    return 1.0 / peak;
}

}  // namespace csk
