#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "csk/error.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// One selected placement: atom k at map offset t with coefficient c.
/// Offsets index the "same"-size corner-anchored map grid of the sample.
struct CodeEntry {
    std::size_t atom = 0;
    std::size_t offset = 0;  // flat row-major index into the map grid
    double coeff = 0.0;
};

/// Per-sample sparse coefficient maps in triplet form. Map grids are
/// "same"-size (one cell per sample position); non-convolutional codes are
/// the special case offset == 0.
class SparseCode {
public:
    SparseCode() = default;
    SparseCode(Shape sample_shape, Shape atom_shape, std::size_t atom_count)
        : sample_shape_(std::move(sample_shape)),
          atom_shape_(std::move(atom_shape)),
          atom_count_(atom_count) {}

    const Shape& sample_shape() const { return sample_shape_; }
    const Shape& atom_shape() const { return atom_shape_; }
    std::size_t atom_count() const { return atom_count_; }
    std::size_t map_cells() const { return Tensor::count(sample_shape_); }

    const std::vector<CodeEntry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

    void add(std::size_t atom, std::size_t offset, double coeff) {
        if (atom >= atom_count_) throw ValueError("SparseCode: atom index out of range");
        if (offset >= map_cells()) throw ValueError("SparseCode: offset outside map grid");
        for (const auto& e : entries_) {
            if (e.atom == atom && e.offset == offset)
                throw ValueError("SparseCode: duplicate (atom, offset) pair");
        }
        entries_.push_back({atom, offset, coeff});
    }

    /// Append in strictly increasing (atom, offset) order; keeps the
    /// no-duplicates invariant with an O(1) check. For dense scan loops.
    void append_ordered(std::size_t atom, std::size_t offset, double coeff) {
        if (atom >= atom_count_) throw ValueError("SparseCode: atom index out of range");
        if (offset >= map_cells()) throw ValueError("SparseCode: offset outside map grid");
        if (!entries_.empty()) {
            const CodeEntry& last = entries_.back();
            if (atom < last.atom || (atom == last.atom && offset <= last.offset))
                throw ValueError("SparseCode: append_ordered out of order");
        }
        entries_.push_back({atom, offset, coeff});
    }

    /// Per-axis coordinates of a flat map offset.
    Offsets offset_coords(std::size_t flat) const {
        Offsets c(sample_shape_.size());
        if (sample_shape_.size() == 1) {
            c[0] = static_cast<std::ptrdiff_t>(flat);
        } else {
            c[0] = static_cast<std::ptrdiff_t>(flat / sample_shape_[1]);
            c[1] = static_cast<std::ptrdiff_t>(flat % sample_shape_[1]);
        }
        return c;
    }

    /// Dense coefficient map for one atom.
    Tensor dense_map(std::size_t atom) const {
        Tensor m = Tensor::zeros(sample_shape_);
        for (const auto& e : entries_)
            if (e.atom == atom) m[e.offset] = e.coeff;
        return m;
    }

    /// Dense vector of per-atom coefficients for offset-0 codes.
    std::vector<double> dense_vector() const {
        std::vector<double> v(atom_count_, 0.0);
        for (const auto& e : entries_) {
            if (e.offset != 0)
                throw ValueError("SparseCode: dense_vector requires offset-0 code");
            v[e.atom] = e.coeff;
        }
        return v;
    }

    void sort_entries() {
        std::sort(entries_.begin(), entries_.end(), [](const CodeEntry& a, const CodeEntry& b) {
            return a.atom != b.atom ? a.atom < b.atom : a.offset < b.offset;
        });
    }

private:
    Shape sample_shape_, atom_shape_;
    std::size_t atom_count_ = 0;
    std::vector<CodeEntry> entries_;
};

/// Best single convolutional-atom placement for one sample.
struct AtomMatch {
    std::size_t atom_index = 0;
    Offsets offset;            // per-axis placement of the atom corner
    double coeff = 0.0;
    double residual_energy = 0.0;  // ||y||^2 - c^2 for unit-norm atoms
};

}  // namespace csk
