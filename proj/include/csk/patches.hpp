#pragma once

#include <cstddef>
#include <vector>

#include "csk/error.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// All sliding windows of `patch_shape` over y at the given stride, in
/// row-major traversal order of the window origin.
inline std::vector<Tensor> extract_patches(const Tensor& y, const Shape& patch_shape,
                                           std::size_t stride = 1) {
    if (patch_shape.size() != y.rank())
        throw ShapeError("extract_patches: patch rank " + std::to_string(patch_shape.size()) +
                         " != signal rank " + std::to_string(y.rank()));
    if (stride == 0) throw ValueError("extract_patches: stride must be positive");
    for (std::size_t a = 0; a < y.rank(); ++a) {
        if (patch_shape[a] == 0) throw ValueError("extract_patches: zero patch extent");
        if (patch_shape[a] > y.extent(a))
            throw ShapeError("extract_patches: patch " + shape_to_string(patch_shape) +
                             " exceeds signal " + shape_to_string(y.shape()));
    }

    if (y.rank() == 1) {
        const std::size_t steps = (y.extent(0) - patch_shape[0]) / stride + 1;
        std::vector<Tensor> out;
        out.reserve(steps);
        for (std::size_t s = 0; s < steps; ++s) {
            Tensor p = Tensor::zeros(patch_shape);
            for (std::size_t i = 0; i < patch_shape[0]; ++i) p[i] = y[s * stride + i];
            out.push_back(std::move(p));
        }
        return out;
    }

    const std::size_t steps0 = (y.extent(0) - patch_shape[0]) / stride + 1;
    const std::size_t steps1 = (y.extent(1) - patch_shape[1]) / stride + 1;
    std::vector<Tensor> out;
    out.reserve(steps0 * steps1);
    for (std::size_t s0 = 0; s0 < steps0; ++s0)
        for (std::size_t s1 = 0; s1 < steps1; ++s1) {
            Tensor p = Tensor::zeros(patch_shape);
            for (std::size_t i = 0; i < patch_shape[0]; ++i)
                for (std::size_t j = 0; j < patch_shape[1]; ++j)
                    p(i, j) = y(s0 * stride + i, s1 * stride + j);
            out.push_back(std::move(p));
        }
    return out;
}

}  // namespace csk
