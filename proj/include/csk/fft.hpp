#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "csk/tensor.hpp"

namespace csk::detail {

using Complex = std::complex<double>;

/// Smallest size >= n whose factors are all in {2, 3, 5}; kissfft degrades
/// badly on large prime lengths.
inline std::size_t next_fast_size(std::size_t n) {
    if (n <= 2) return n;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        while (r % 2 == 0) r /= 2;
        while (r % 3 == 0) r /= 3;
        while (r % 5 == 0) r /= 5;
        if (r == 1) return m;
    }
}

inline Eigen::FFT<double>& fft_engine() {
    thread_local Eigen::FFT<double> engine;
    return engine;
}

/// Single-line transform; a 1-point DFT is the identity (the kissfft backend
/// cannot take nfft == 1).
inline void fft_line(std::vector<Complex>& dst, const std::vector<Complex>& src, bool inverse) {
    if (src.size() == 1) {
        dst = src;
        return;
    }
    auto& fft = fft_engine();
    if (inverse) fft.inv(dst, src); else fft.fwd(dst, src);
}

/// In-place complex FFT over a row-major 1D/2D buffer.
inline void fft_nd(std::vector<Complex>& buf, const Shape& dims, bool inverse) {
    if (dims.size() == 1) {
        std::vector<Complex> out(dims[0]);
        fft_line(out, buf, inverse);
        buf = std::move(out);
        return;
    }
    const std::size_t rows = dims[0], cols = dims[1];
    std::vector<Complex> line(cols), out(cols);
    for (std::size_t i = 0; i < rows; ++i) {
        std::copy(buf.begin() + i * cols, buf.begin() + (i + 1) * cols, line.begin());
        fft_line(out, line, inverse);
        std::copy(out.begin(), out.end(), buf.begin() + i * cols);
    }
    std::vector<Complex> col(rows), cout(rows);
    for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t i = 0; i < rows; ++i) col[i] = buf[i * cols + j];
        fft_line(cout, col, inverse);
        for (std::size_t i = 0; i < rows; ++i) buf[i * cols + j] = cout[i];
    }
}

}  // namespace csk::detail
