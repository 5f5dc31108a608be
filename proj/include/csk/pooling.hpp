#pragma once

#include <algorithm>
#include <cmath>

#include "csk/error.hpp"
#include "csk/tensor.hpp"

namespace csk {

enum class PoolKind { Max, Average };

inline Tensor absolute(const Tensor& a) {
    Tensor out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::abs(out[i]);
    return out;
}

/// Non-overlapping cell pooling; output extent is ceil(n / cell) per axis, so
/// partial edge cells pool over whatever entries they cover (averages divide
/// by the actual population).
inline Tensor pool(const Tensor& map, const Shape& cell, PoolKind kind) {
    if (cell.size() != map.rank())
        throw ShapeError("pool: cell rank " + shape_to_string(cell) + " vs map " +
                         shape_to_string(map.shape()));
    for (std::size_t e : cell)
        if (e == 0) throw ValueError("pool: cell extents must be positive");

    Shape out_shape(map.rank());
    for (std::size_t a = 0; a < map.rank(); ++a)
        out_shape[a] = (map.extent(a) + cell[a] - 1) / cell[a];
    Tensor out = Tensor::zeros(out_shape);

    const std::size_t rows = map.rank() == 2 ? map.extent(0) : 1;
    const std::size_t cols = map.rank() == 2 ? map.extent(1) : map.extent(0);
    const std::size_t ch = map.rank() == 2 ? cell[0] : 1;
    const std::size_t cw = map.rank() == 2 ? cell[1] : cell[0];
    const std::size_t out_cols = out_shape.back();

    for (std::size_t bi = 0; bi * ch < rows; ++bi) {
        for (std::size_t bj = 0; bj * cw < cols; ++bj) {
            const std::size_t i1 = std::min(rows, (bi + 1) * ch);
            const std::size_t j1 = std::min(cols, (bj + 1) * cw);
            double acc = kind == PoolKind::Max ? -std::numeric_limits<double>::infinity() : 0.0;
            std::size_t count = 0;
            for (std::size_t i = bi * ch; i < i1; ++i)
                for (std::size_t j = bj * cw; j < j1; ++j) {
                    const double v = map[i * cols + j];
                    if (kind == PoolKind::Max) acc = std::max(acc, v);
                    else acc += v;
                    ++count;
                }
            out[bi * out_cols + bj] = kind == PoolKind::Max
                                          ? acc
                                          : acc / static_cast<double>(count);
        }
    }
    return out;
}

}  // namespace csk
