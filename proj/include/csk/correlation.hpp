#pragma once

#include <algorithm>
#include <complex>
#include <cstddef>
#include <vector>

#include "csk/error.hpp"
#include "csk/fft.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Path selection for correlation/convolution. Auto switches to FFT when the
/// full displacement grid has more than 1024 cells.
enum class CorrMode { Auto, Naive, Fft };

inline constexpr std::size_t kFftAreaThreshold = 1024;

// All correlation-family ops below are slices of one primitive, the full
// displacement array
//
//   corr_disp(y, k)[d] = sum_u k(u) * y(u + d),   d in [-(p-1), n-1] per axis
//
// stored with index l = d + (p - 1), extent n + p - 1. Boundary handling is
// zero-padded linear (never circular): y reads outside [0, n) contribute 0.
//
// Placement conventions derived from it:
//   corr_valid     d in [0, n-p]            kernel fully inside the frame
//   corr_map       d in [0, n-1]            "same"-size corner-anchored grid
//   corr_centered  d in [-(p-1)/2, ...]     "same"-size center-anchored (filtering)
//   conv_map       reconstruction sum_t x(t) k(i - t) cropped to the frame;
//                  a spike at map position t places the kernel corner at t

namespace detail {

inline Shape disp_shape(const Shape& ny, const Shape& nk) {
    if (ny.size() != nk.size()) {
        throw ShapeError("correlation: rank mismatch " + shape_to_string(ny) + " vs " +
                         shape_to_string(nk));
    }
    Shape out(ny.size());
    for (std::size_t a = 0; a < ny.size(); ++a) out[a] = ny[a] + nk[a] - 1;
    return out;
}

inline bool use_fft(const Shape& full, CorrMode mode) {
    if (mode == CorrMode::Naive) return false;
    if (mode == CorrMode::Fft) return true;
    return Tensor::count(full) > kFftAreaThreshold;
}

inline Tensor corr_disp_naive(const Tensor& y, const Tensor& k) {
    const Shape full = disp_shape(y.shape(), k.shape());
    Tensor out = Tensor::zeros(full);
    if (y.rank() == 1) {
        const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(y.extent(0));
        const std::ptrdiff_t p = static_cast<std::ptrdiff_t>(k.extent(0));
        for (std::ptrdiff_t d = -(p - 1); d < n; ++d) {
            const std::ptrdiff_t u0 = std::max<std::ptrdiff_t>(0, -d);
            const std::ptrdiff_t u1 = std::min<std::ptrdiff_t>(p, n - d);
            double s = 0.0;
            for (std::ptrdiff_t u = u0; u < u1; ++u) s += k[u] * y[u + d];
            out[static_cast<std::size_t>(d + p - 1)] = s;
        }
    } else {
        const std::ptrdiff_t n0 = static_cast<std::ptrdiff_t>(y.extent(0));
        const std::ptrdiff_t n1 = static_cast<std::ptrdiff_t>(y.extent(1));
        const std::ptrdiff_t p0 = static_cast<std::ptrdiff_t>(k.extent(0));
        const std::ptrdiff_t p1 = static_cast<std::ptrdiff_t>(k.extent(1));
        for (std::ptrdiff_t d0 = -(p0 - 1); d0 < n0; ++d0) {
            const std::ptrdiff_t u0a = std::max<std::ptrdiff_t>(0, -d0);
            const std::ptrdiff_t u0b = std::min<std::ptrdiff_t>(p0, n0 - d0);
            for (std::ptrdiff_t d1 = -(p1 - 1); d1 < n1; ++d1) {
                const std::ptrdiff_t u1a = std::max<std::ptrdiff_t>(0, -d1);
                const std::ptrdiff_t u1b = std::min<std::ptrdiff_t>(p1, n1 - d1);
                double s = 0.0;
                for (std::ptrdiff_t u0 = u0a; u0 < u0b; ++u0) {
                    const double* yrow = y.data() + (u0 + d0) * n1;
                    const double* krow = k.data() + u0 * p1;
                    for (std::ptrdiff_t u1 = u1a; u1 < u1b; ++u1) s += krow[u1] * yrow[u1 + d1];
                }
                out(static_cast<std::size_t>(d0 + p0 - 1), static_cast<std::size_t>(d1 + p1 - 1)) = s;
            }
        }
    }
    return out;
}

}  // namespace detail

/// Frequency-domain correlation plan for a fixed (signal shape, kernel shape)
/// pair. Signal/kernel spectra can be cached by the caller and combined many
/// times; the hot clustering and coding loops depend on this.
class FftCorrPlan {
public:
    using Spectrum = std::vector<detail::Complex>;

    FftCorrPlan(Shape signal_shape, Shape kernel_shape)
        : signal_shape_(std::move(signal_shape)), kernel_shape_(std::move(kernel_shape)) {
        full_ = detail::disp_shape(signal_shape_, kernel_shape_);
        padded_.resize(full_.size());
        for (std::size_t a = 0; a < full_.size(); ++a)
            padded_[a] = detail::next_fast_size(full_[a]);
    }

    const Shape& full_shape() const { return full_; }
    const Shape& padded_shape() const { return padded_; }

    Spectrum signal_spectrum(const Tensor& y) const {
        check(y.shape(), signal_shape_, "signal");
        Spectrum buf = embed(y, /*reversed=*/false);
        detail::fft_nd(buf, padded_, false);
        return buf;
    }

    /// Kernel enters reversed so that pointwise product + inverse yields
    /// correlation rather than convolution.
    Spectrum kernel_spectrum(const Tensor& k) const {
        check(k.shape(), kernel_shape_, "kernel");
        Spectrum buf = embed(k, /*reversed=*/true);
        detail::fft_nd(buf, padded_, false);
        return buf;
    }

    /// Plain (non-reversed) kernel spectrum; combined with a map spectrum this
    /// gives the convolution a * x instead of the correlation.
    Spectrum kernel_spectrum_conv(const Tensor& k) const {
        check(k.shape(), kernel_shape_, "kernel");
        Spectrum buf = embed(k, /*reversed=*/false);
        detail::fft_nd(buf, padded_, false);
        return buf;
    }

    /// acc += a .* b, pointwise over spectra.
    static void accumulate_product(Spectrum& acc, const Spectrum& a, const Spectrum& b) {
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i] * b[i];
    }

    /// Inverse-transform a combined spectrum into the full displacement array.
    Tensor to_disp_array(Spectrum spectrum) const {
        detail::fft_nd(spectrum, padded_, true);
        std::vector<double> out(Tensor::count(full_));
        if (full_.size() == 1) {
            for (std::size_t i = 0; i < full_[0]; ++i) out[i] = spectrum[i].real();
        } else {
            for (std::size_t i = 0; i < full_[0]; ++i)
                for (std::size_t j = 0; j < full_[1]; ++j)
                    out[i * full_[1] + j] = spectrum[i * padded_[1] + j].real();
        }
        return Tensor::from_data(full_, std::move(out));
    }

    Tensor correlate(const Spectrum& signal, const Spectrum& kernel) const {
        Spectrum prod(signal.size());
        for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = signal[i] * kernel[i];
        return to_disp_array(std::move(prod));
    }

private:
    void check(const Shape& got, const Shape& want, const char* what) const {
        if (got != want)
            throw ShapeError(std::string("FftCorrPlan ") + what + ": expected " +
                             shape_to_string(want) + ", got " + shape_to_string(got));
    }

    Spectrum embed(const Tensor& t, bool reversed) const {
        Spectrum buf(Tensor::count(padded_), detail::Complex{0.0, 0.0});
        const std::size_t n = t.size();
        if (padded_.size() == 1) {
            for (std::size_t i = 0; i < n; ++i)
                buf[i] = detail::Complex(t[reversed ? n - 1 - i : i], 0.0);
        } else {
            const std::size_t r = t.extent(0), c = t.extent(1);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < c; ++j) {
                    const double v = reversed ? t(r - 1 - i, c - 1 - j) : t(i, j);
                    buf[i * padded_[1] + j] = detail::Complex(v, 0.0);
                }
        }
        return buf;
    }

    Shape signal_shape_, kernel_shape_, full_, padded_;
};

/// Full displacement array corr_disp(y, k); see the convention block above.
inline Tensor corr_disp_full(const Tensor& y, const Tensor& k, CorrMode mode = CorrMode::Auto) {
    const Shape full = detail::disp_shape(y.shape(), k.shape());
    if (!detail::use_fft(full, mode)) return detail::corr_disp_naive(y, k);
    FftCorrPlan plan(y.shape(), k.shape());
    return plan.correlate(plan.signal_spectrum(y), plan.kernel_spectrum(k));
}

namespace detail {

inline Tensor slice_disp(const Tensor& disp, const Shape& kshape, const Offsets& lo,
                         const Shape& out_shape) {
    Tensor out = Tensor::zeros(out_shape);
    if (out.rank() == 1) {
        const std::ptrdiff_t base = lo[0] + static_cast<std::ptrdiff_t>(kshape[0]) - 1;
        for (std::size_t i = 0; i < out_shape[0]; ++i)
            out[i] = disp[static_cast<std::size_t>(base + static_cast<std::ptrdiff_t>(i))];
    } else {
        const std::ptrdiff_t b0 = lo[0] + static_cast<std::ptrdiff_t>(kshape[0]) - 1;
        const std::ptrdiff_t b1 = lo[1] + static_cast<std::ptrdiff_t>(kshape[1]) - 1;
        for (std::size_t i = 0; i < out_shape[0]; ++i)
            for (std::size_t j = 0; j < out_shape[1]; ++j)
                out(i, j) = disp(static_cast<std::size_t>(b0 + static_cast<std::ptrdiff_t>(i)),
                                 static_cast<std::size_t>(b1 + static_cast<std::ptrdiff_t>(j)));
    }
    return out;
}

}  // namespace detail

/// Correlation at every fully-inside placement; output extent n - p + 1.
inline Tensor corr_valid(const Tensor& y, const Tensor& k, CorrMode mode = CorrMode::Auto) {
    for (std::size_t a = 0; a < y.rank(); ++a) {
        if (k.shape()[a] > y.shape()[a])
            throw ShapeError("corr_valid: kernel " + shape_to_string(k.shape()) +
                             " exceeds signal " + shape_to_string(y.shape()));
    }
    const Tensor disp = corr_disp_full(y, k, mode);
    Shape out(y.rank());
    for (std::size_t a = 0; a < y.rank(); ++a) out[a] = y.shape()[a] - k.shape()[a] + 1;
    return detail::slice_disp(disp, k.shape(), Offsets(y.rank(), 0), out);
}

/// Correlation over the "same"-size corner-anchored offset grid [0, n);
/// the adjoint of conv_map.
inline Tensor corr_map(const Tensor& y, const Tensor& k, CorrMode mode = CorrMode::Auto) {
    const Tensor disp = corr_disp_full(y, k, mode);
    return detail::slice_disp(disp, k.shape(), Offsets(y.rank(), 0), y.shape());
}

/// Center-anchored "same"-size correlation (filter response).
inline Tensor corr_centered(const Tensor& y, const Tensor& k, CorrMode mode = CorrMode::Auto) {
    const Tensor disp = corr_disp_full(y, k, mode);
    Offsets lo(y.rank());
    for (std::size_t a = 0; a < y.rank(); ++a)
        lo[a] = -static_cast<std::ptrdiff_t>((k.shape()[a] - 1) / 2);
    return detail::slice_disp(disp, k.shape(), lo, y.shape());
}

/// Lag window [0, lags) of sum_t x(t) r(t + u); the atom-support gradient of
/// the convolutional data term.
inline Tensor corr_lags(const Tensor& r, const Tensor& x, const Shape& lags,
                        CorrMode mode = CorrMode::Auto) {
    const Tensor disp = corr_disp_full(r, x, mode);
    return detail::slice_disp(disp, x.shape(), Offsets(r.rank(), 0), lags);
}

/// Reconstruction sum_t x(t) k(i - t), cropped to x's frame.
inline Tensor conv_map(const Tensor& x, const Tensor& k, CorrMode mode = CorrMode::Auto) {
    // conv with k == correlation with reversed k; reuse the same engine.
    Tensor rk = k;
    std::reverse(rk.values().begin(), rk.values().end());
    const Tensor disp = corr_disp_full(x, rk, mode);
    Offsets lo(x.rank());
    for (std::size_t a = 0; a < x.rank(); ++a)
        lo[a] = -(static_cast<std::ptrdiff_t>(k.shape()[a]) - 1);
    return detail::slice_disp(disp, rk.shape(), lo, x.shape());
}

/// Full cross-correlation of a and b over all overlapping lags (extent
/// n_a + n_b - 1 per axis); lag l corresponds to displacement
/// d = l - (n_b - 1) of b relative to a.
inline Tensor xcorr_full(const Tensor& a, const Tensor& b, CorrMode mode = CorrMode::Auto) {
    return corr_disp_full(a, b, mode);
}

}  // namespace csk
