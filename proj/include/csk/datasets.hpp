#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "csk/error.hpp"
#include "csk/rng.hpp"
#include "csk/serialize.hpp"
#include "csk/tensor.hpp"

namespace csk {

/// Uniformly shaped samples with integer labels. `seed` records the
/// generation stream for synthetic/derived datasets (0 when not applicable).
struct LabeledDataset {
    std::string name;
    std::string source;
    std::uint64_t seed = 0;
    std::vector<Tensor> samples;
    std::vector<int> labels;

    std::size_t size() const { return samples.size(); }

    void validate() const {
        if (samples.size() != labels.size())
            throw ValueError("dataset " + name + ": " + std::to_string(samples.size()) +
                             " samples vs " + std::to_string(labels.size()) + " labels");
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (!samples[i].same_shape(samples[0]))
                throw ShapeError("dataset " + name + ": sample " + std::to_string(i) +
                                 " shape " + shape_to_string(samples[i].shape()) + " != " +
                                 shape_to_string(samples[0].shape()));
    }

    std::size_t class_count() const {
        int hi = -1;
        for (int l : labels) hi = std::max(hi, l);
        return static_cast<std::size_t>(hi + 1);
    }
};

namespace detail {

inline std::uint32_t get_u32_be(std::istream& is, const char* what) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError(std::string("IDX: truncated while reading ") + what);
    return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
           (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

}  // namespace detail

/// IDX ingestion (the MNIST container): big-endian magic 0x00000803 for
/// images, 0x00000801 for labels; unsigned-byte pixels scaled to [0, 1].
inline LabeledDataset load_idx(const std::string& images_path, const std::string& labels_path) {
    std::ifstream img(images_path, std::ios::binary);
    if (!img) throw IoError("load_idx: cannot open " + images_path);
    std::ifstream lab(labels_path, std::ios::binary);
    if (!lab) throw IoError("load_idx: cannot open " + labels_path);

    const std::uint32_t img_magic = detail::get_u32_be(img, "image magic");
    if (img_magic != 0x00000803)
        throw IoError("load_idx: image magic expected 0x00000803, got 0x" + [&] {
            std::ostringstream os;
            os << std::hex << img_magic;
            return os.str();
        }());
    const std::uint32_t lab_magic = detail::get_u32_be(lab, "label magic");
    if (lab_magic != 0x00000801)
        throw IoError("load_idx: label magic expected 0x00000801, got 0x" + [&] {
            std::ostringstream os;
            os << std::hex << lab_magic;
            return os.str();
        }());

    const std::uint32_t n_img = detail::get_u32_be(img, "image count");
    const std::uint32_t rows = detail::get_u32_be(img, "row count");
    const std::uint32_t cols = detail::get_u32_be(img, "column count");
    const std::uint32_t n_lab = detail::get_u32_be(lab, "label count");
    if (n_img != n_lab)
        throw IoError("load_idx: " + std::to_string(n_img) + " images vs " +
                      std::to_string(n_lab) + " labels");
    if (rows == 0 || cols == 0) throw IoError("load_idx: zero image extent");

    LabeledDataset data;
    data.name = "idx";
    data.source = images_path;
    data.samples.reserve(n_img);
    data.labels.reserve(n_img);
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    for (std::uint32_t i = 0; i < n_img; ++i) {
        img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        if (!img) throw IoError("load_idx: image payload truncated at sample " + std::to_string(i));
        std::vector<double> px(buf.size());
        for (std::size_t v = 0; v < buf.size(); ++v) px[v] = buf[v] / 255.0;
        data.samples.push_back(Tensor::from_data({rows, cols}, std::move(px)));
        const int l = lab.get();
        if (l == EOF) throw IoError("load_idx: label payload truncated at sample " + std::to_string(i));
        data.labels.push_back(l);
    }
    data.validate();
    return data;
}

/// One sample per row: `length` numeric cells plus an integer label at column
/// `label_col` (0-based position among the row's cells).
inline LabeledDataset load_csv_series(const std::string& path, std::size_t length,
                                      std::size_t label_col = 0, char delimiter = ',') {
    std::ifstream in(path);
    if (!in) throw IoError("load_csv_series: cannot open " + path);
    if (length == 0) throw ValueError("load_csv_series: length must be positive");

    LabeledDataset data;
    data.name = "csv";
    data.source = path;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, delimiter)) cells.push_back(cell);
        if (cells.size() != length + 1)
            throw IoError("load_csv_series: row " + std::to_string(row) + " has " +
                          std::to_string(cells.size()) + " cells, expected " +
                          std::to_string(length + 1));
        if (label_col >= cells.size())
            throw ValueError("load_csv_series: label column " + std::to_string(label_col) +
                             " out of range");
        std::vector<double> values;
        values.reserve(length);
        int label = 0;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(cells[c], &pos);
            } catch (const std::exception&) {
                throw IoError("load_csv_series: row " + std::to_string(row) + " cell " +
                              std::to_string(c) + " is not numeric: \"" + cells[c] + "\"");
            }
            if (pos != cells[c].size())
                throw IoError("load_csv_series: row " + std::to_string(row) + " cell " +
                              std::to_string(c) + " has trailing junk: \"" + cells[c] + "\"");
            if (c == label_col) label = static_cast<int>(std::llround(v));
            else values.push_back(v);
        }
        data.samples.push_back(Tensor::from_data({length}, std::move(values)));
        data.labels.push_back(label);
    }
    data.validate();
    return data;
}

/// Place every sample into a zero frame of extent `frame` per axis, at an
/// integer offset drawn uniformly and independently per axis from
/// [0, frame - extent]; axis 0 is drawn first. Labels carry over.
inline LabeledDataset make_shifted(const LabeledDataset& data, std::size_t frame, Rng& rng) {
    data.validate();
    if (data.samples.empty()) throw ValueError("make_shifted: empty dataset");
    const Shape& s = data.samples[0].shape();
    for (std::size_t e : s)
        if (frame < e)
            throw ValueError("make_shifted: frame " + std::to_string(frame) +
                             " smaller than sample extent " + std::to_string(e));

    LabeledDataset out;
    out.name = data.name + "-shift" + std::to_string(frame);
    out.source = data.source;
    out.seed = rng.seed();
    out.labels = data.labels;
    out.samples.reserve(data.size());
    const Shape fshape(s.size(), frame);
    for (const Tensor& y : data.samples) {
        Tensor f = Tensor::zeros(fshape);
        if (s.size() == 1) {
            const auto off = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(frame - s[0])));
            for (std::size_t i = 0; i < s[0]; ++i) f[off + i] = y[i];
        } else {
            const auto r0 = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(frame - s[0])));
            const auto c0 = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<std::int64_t>(frame - s[1])));
            for (std::size_t i = 0; i < s[0]; ++i)
                for (std::size_t j = 0; j < s[1]; ++j) f(r0 + i, c0 + j) = y(i, j);
        }
        out.samples.push_back(std::move(f));
    }
    return out;
}

/// First `per_class` occurrences of every class in file order, or a seeded
/// random selection per class when `random` is set.
inline LabeledDataset subset_per_class(const LabeledDataset& data, std::size_t per_class,
                                       Rng& rng, bool random = false) {
    data.validate();
    LabeledDataset out;
    out.name = data.name + "-per" + std::to_string(per_class);
    out.source = data.source;
    out.seed = random ? rng.seed() : 0;
    if (per_class == 0) return out;

    std::vector<int> classes;
    for (int l : data.labels)
        if (std::find(classes.begin(), classes.end(), l) == classes.end()) classes.push_back(l);
    std::sort(classes.begin(), classes.end());

    std::vector<std::size_t> chosen;
    for (int c : classes) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < data.size(); ++i)
            if (data.labels[i] == c) members.push_back(i);
        if (members.size() < per_class)
            throw ValueError("subset_per_class: class " + std::to_string(c) + " has " +
                             std::to_string(members.size()) + " samples, need " +
                             std::to_string(per_class));
        if (random) {
            std::vector<std::size_t> pick = rng.sample_indices(members.size(), per_class);
            std::sort(pick.begin(), pick.end());
            for (std::size_t p : pick) chosen.push_back(members[p]);
        } else {
            chosen.insert(chosen.end(), members.begin(), members.begin() + per_class);
        }
    }
    std::sort(chosen.begin(), chosen.end());  // preserve file order across classes
    for (std::size_t i : chosen) {
        out.samples.push_back(data.samples[i]);
        out.labels.push_back(data.labels[i]);
    }
    return out;
}

// Container format, little-endian:
//   magic "CSKD" | name | source | u64 seed | u64 count | per sample:
//   u64 label (two's complement) + tensor record
inline void write_dataset(std::ostream& os, const LabeledDataset& data) {
    data.validate();
    os.write("CSKD", 4);
    detail::put_string(os, data.name);
    detail::put_string(os, data.source);
    detail::put_u64(os, data.seed);
    detail::put_u64(os, data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        detail::put_u64(os, static_cast<std::uint64_t>(static_cast<std::int64_t>(data.labels[i])));
        write_tensor(os, data.samples[i]);
    }
    if (!os) throw IoError("write_dataset: stream failure");
}

inline LabeledDataset read_dataset(std::istream& is) {
    char magic[4] = {};
    is.read(magic, 4);
    if (!is || std::string(magic, 4) != "CSKD") throw IoError("read_dataset: bad magic");
    LabeledDataset data;
    data.name = detail::get_string(is);
    data.source = detail::get_string(is);
    data.seed = detail::get_u64(is);
    const std::uint64_t n = detail::get_u64(is);
    data.samples.reserve(n);
    data.labels.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        data.labels.push_back(
            static_cast<int>(static_cast<std::int64_t>(detail::get_u64(is))));
        data.samples.push_back(read_tensor(is));
    }
    data.validate();
    return data;
}

inline void save_dataset(const std::string& path, const LabeledDataset& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_dataset: cannot open " + path);
    write_dataset(os, data);
}

inline LabeledDataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_dataset: cannot open " + path);
    return read_dataset(is);
}

}  // namespace csk
