#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>

#include "csk/correlation.hpp"
#include "csk/dictionary.hpp"
#include "csk/error.hpp"
#include "csk/sparse_code.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Best single placement of any atom: maximizes c^2 over atoms k and all
/// fully-inside offsets t, where c = <y window at t, atom k>. Ties break to
/// the smallest k, then lexicographic t (guaranteed by strict > on scan
/// order). For unit-norm atoms the optimal residual is ||y||^2 - c^2.
inline AtomMatch best_atom_match(const Tensor& y, const Dictionary& dict,
                                 CorrMode mode = CorrMode::Auto) {
    dict.require_normalized("best_atom_match");
    for (std::size_t a = 0; a < y.rank(); ++a)
        if (dict.atom_shape().size() != y.rank() || dict.atom_shape()[a] > y.extent(a))
            throw ShapeError("best_atom_match: atom " + shape_to_string(dict.atom_shape()) +
                             " does not fit in sample " + shape_to_string(y.shape()));

    AtomMatch best;
    double best_sq = -1.0;
    for (std::size_t k = 0; k < dict.size(); ++k) {
        const Tensor corr = corr_valid(y, dict.atom(k), mode);
        for (std::size_t t = 0; t < corr.size(); ++t) {
            const double c = corr[t];
            if (c * c > best_sq) {
                best_sq = c * c;
                best.atom_index = k;
                best.coeff = c;
                if (corr.rank() == 1) {
                    best.offset = {static_cast<std::ptrdiff_t>(t)};
                } else {
                    best.offset = {static_cast<std::ptrdiff_t>(t / corr.extent(1)),
                                   static_cast<std::ptrdiff_t>(t % corr.extent(1))};
                }
            }
        }
    }
    const double energy = dot(y, y);
    best.residual_energy = std::max(0.0, energy - best.coeff * best.coeff);
    return best;
}

/// Row index of the equivalent global-dictionary column for (k*, t*):
/// columns are interleaved position-major over the "same"-size map grid,
/// j = flat(t)*K + k, so k* = j mod K.
inline std::size_t global_code_index(const AtomMatch& match, const Dictionary& dict,
                                     const Shape& sample_shape) {
    if (match.atom_index >= dict.size())
        throw ValueError("global_code_index: atom index out of range");
    if (match.offset.size() != sample_shape.size())
        throw ShapeError("global_code_index: offset rank != sample rank");
    const Shape& as = dict.atom_shape();
    for (std::size_t a = 0; a < sample_shape.size(); ++a) {
        const std::ptrdiff_t t = match.offset[a];
        if (t < 0 || static_cast<std::size_t>(t) + as[a] > sample_shape[a])
            throw ValueError("global_code_index: offset out of range");
    }
    std::size_t flat = static_cast<std::size_t>(match.offset[0]);
    if (sample_shape.size() == 2)
        flat = flat * sample_shape[1] + static_cast<std::size_t>(match.offset[1]);
    return flat * dict.size() + match.atom_index;
}

/// Inverse of global_code_index: (atom index, per-axis offset).
inline std::pair<std::size_t, Offsets> decode_code_index(std::size_t j, const Dictionary& dict,
                                                         const Shape& sample_shape) {
    const std::size_t K = dict.size();
    const std::size_t k = j % K;
    const std::size_t flat = j / K;
    if (flat >= Tensor::count(sample_shape))
        throw ValueError("decode_code_index: index outside map grid");
    Offsets t(sample_shape.size());
    if (sample_shape.size() == 1) {
        t[0] = static_cast<std::ptrdiff_t>(flat);
    } else {
        t[0] = static_cast<std::ptrdiff_t>(flat / sample_shape[1]);
        t[1] = static_cast<std::ptrdiff_t>(flat % sample_shape[1]);
    }
    return {k, t};
}

}  // namespace csk
