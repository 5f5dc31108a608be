#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "csk/error.hpp"
#include "csk/rng.hpp"
#include "csk/serialize.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Ordered set of atoms sharing one shape. The normalized flag certifies
/// |l2_norm(atom) - 1| < 1e-10 for every atom; it is only ever set by
/// normalize(), so holders may rely on it without re-checking.
class Dictionary {
public:
    explicit Dictionary(std::vector<Tensor> atoms) : atoms_(std::move(atoms)) {
        if (atoms_.empty()) throw ValueError("Dictionary: atom count must be >= 1");
        atom_shape_ = atoms_.front().shape();
        for (std::size_t k = 0; k < atoms_.size(); ++k) {
            if (atoms_[k].shape() != atom_shape_)
                throw ShapeError("Dictionary: atom " + std::to_string(k) + " shape " +
                                 shape_to_string(atoms_[k].shape()) + " != " +
                                 shape_to_string(atom_shape_));
            if (l2_norm(atoms_[k]) == 0.0)
                throw ValueError("Dictionary: atom " + std::to_string(k) + " is all-zero");
        }
    }

    /// Unit-norm atoms drawn from a standard normal, for CDL initialization.
    static Dictionary random_unit(const Shape& atom_shape, std::size_t count, Rng& rng) {
        if (count == 0) throw ValueError("Dictionary: atom count must be >= 1");
        std::vector<Tensor> atoms;
        atoms.reserve(count);
        for (std::size_t k = 0; k < count; ++k) {
            Tensor a = Tensor::zeros(atom_shape);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.normal();
            atoms.push_back(std::move(a));
        }
        Dictionary d(std::move(atoms));
        d.normalize();
        return d;
    }

    std::size_t size() const { return atoms_.size(); }
    const Shape& atom_shape() const { return atom_shape_; }
    const Tensor& atom(std::size_t k) const { return atoms_.at(k); }
    const std::vector<Tensor>& atoms() const { return atoms_; }
    bool is_normalized() const { return normalized_; }

    void replace_atom(std::size_t k, Tensor a) {
        if (k >= atoms_.size()) throw ValueError("Dictionary: atom index out of range");
        if (a.shape() != atom_shape_)
            throw ShapeError("Dictionary: replacement shape " + shape_to_string(a.shape()) +
                             " != " + shape_to_string(atom_shape_));
        if (l2_norm(a) == 0.0)
            throw ValueError("Dictionary: replacement atom is all-zero");
        atoms_[k] = std::move(a);
        normalized_ = false;
    }

    void normalize() {
        for (auto& a : atoms_) {
            const double n = l2_norm(a);
            if (n == 0.0) throw NumericError("Dictionary: cannot normalize all-zero atom");
            // Atoms already inside the certificate stay bit-identical, so
            // persistence round trips and pass-through updates are exact.
            if (std::abs(n - 1.0) < 1e-10) continue;
            for (std::size_t i = 0; i < a.size(); ++i) a[i] /= n;
        }
        normalized_ = true;
    }

    void require_normalized(const std::string& op) const {
        if (!normalized_)
            throw ValueError(op + ": dictionary atoms must be unit-norm (call normalize())");
    }

    /// Column-major matrix view: column k is atom k flattened row-major.
    std::vector<double> as_columns() const {
        const std::size_t m = Tensor::count(atom_shape_);
        std::vector<double> cols(m * atoms_.size());
        for (std::size_t k = 0; k < atoms_.size(); ++k)
            for (std::size_t i = 0; i < m; ++i) cols[k * m + i] = atoms_[k][i];
        return cols;
    }

private:
    std::vector<Tensor> atoms_;
    Shape atom_shape_;
    bool normalized_ = false;
};

inline void write_dictionary(std::ostream& out, const Dictionary& dict) {
    out.write("CSKA", 4);
    detail::put_u64(out, dict.size());
    out.put(dict.is_normalized() ? 1 : 0);
    for (std::size_t k = 0; k < dict.size(); ++k) write_tensor(out, dict.atom(k));
    if (!out) throw IoError("write_dictionary: stream failure");
}

inline Dictionary read_dictionary(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "CSKA")
        throw IoError("read_dictionary: bad magic (expected CSKA)");
    const std::uint64_t count = detail::get_u64(in);
    const int flag = in.get();
    if (flag != 0 && flag != 1) throw IoError("read_dictionary: bad normalized flag");
    if (count == 0) throw IoError("read_dictionary: zero atom count");
    std::vector<Tensor> atoms;
    atoms.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) atoms.push_back(read_tensor(in));
    Dictionary d(std::move(atoms));
    if (flag == 1) {
        for (std::size_t k = 0; k < d.size(); ++k)
            if (std::abs(l2_norm(d.atom(k)) - 1.0) >= 1e-10)
                throw IoError("read_dictionary: normalized flag set but atom " +
                              std::to_string(k) + " is not unit-norm");
        d.normalize();
    }
    return d;
}

inline void save_dictionary(const std::string& path, const Dictionary& dict) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("save_dictionary: cannot open " + path);
    write_dictionary(out, dict);
}

inline Dictionary load_dictionary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("load_dictionary: cannot open " + path);
    return read_dictionary(in);
}

/// Tiled grayscale PGM of all atoms, one per cell, each min-max scaled to
/// 0..255 independently; 1D atoms render as single-row cells.
inline void export_atoms_pgm(const std::string& path, const Dictionary& dict,
                             std::size_t columns = 0) {
    const Shape& as = dict.atom_shape();
    const std::size_t cell_h = as.size() == 2 ? as[0] : 1;
    const std::size_t cell_w = as.size() == 2 ? as[1] : as[0];
    if (columns == 0) {
        columns = 1;
        while (columns * columns < dict.size()) ++columns;
    }
    const std::size_t rows = (dict.size() + columns - 1) / columns;
    const std::size_t width = columns * (cell_w + 1) + 1;
    const std::size_t height = rows * (cell_h + 1) + 1;
    std::vector<std::uint8_t> pixels(width * height, 0);

    for (std::size_t k = 0; k < dict.size(); ++k) {
        const Tensor& a = dict.atom(k);
        double lo = a[0], hi = a[0];
        for (std::size_t i = 0; i < a.size(); ++i) {
            lo = std::min(lo, a[i]);
            hi = std::max(hi, a[i]);
        }
        const double span = hi - lo;
        const std::size_t r0 = (k / columns) * (cell_h + 1) + 1;
        const std::size_t c0 = (k % columns) * (cell_w + 1) + 1;
        for (std::size_t i = 0; i < cell_h; ++i)
            for (std::size_t j = 0; j < cell_w; ++j) {
                const double v = a[i * cell_w + j];
                const double g = span > 0.0 ? (v - lo) / span : 0.5;
                pixels[(r0 + i) * width + (c0 + j)] =
                    static_cast<std::uint8_t>(std::lround(g * 255.0));
            }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("export_atoms_pgm: cannot open " + path);
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()),
              static_cast<std::streamsize>(pixels.size()));
    if (!out) throw IoError("export_atoms_pgm: stream failure");
}

}  // namespace csk
