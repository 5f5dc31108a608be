#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

#include "csk/error.hpp"
#include "csk/tensor.hpp"

namespace csk {

// Flat binary tensor format, little-endian:
//   magic "CSKT" | u8 rank | u64 extent per axis | f64 payload, row-major
namespace detail {

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 8);
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw IoError("tensor stream truncated while reading u64");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline void put_f64(std::ostream& os, double d) {
    put_u64(os, std::bit_cast<std::uint64_t>(d));
}

inline double get_f64(std::istream& is) {
    return std::bit_cast<double>(get_u64(is));
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    os.write(reinterpret_cast<const char*>(b), 4);
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    if (!is) throw IoError("stream truncated while reading u32");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline void put_string(std::ostream& os, const std::string& s) {
    put_u32(os, static_cast<std::uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& is) {
    const std::uint32_t n = get_u32(is);
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw IoError("stream truncated while reading string");
    return s;
}

}  // namespace detail

inline void write_tensor(std::ostream& os, const Tensor& t) {
    os.write("CSKT", 4);
    const unsigned char rank = static_cast<unsigned char>(t.rank());
    os.write(reinterpret_cast<const char*>(&rank), 1);
    for (std::size_t e : t.shape()) detail::put_u64(os, e);
    for (std::size_t i = 0; i < t.size(); ++i) detail::put_f64(os, t[i]);
    if (!os) throw IoError("tensor write failed");
}

inline Tensor read_tensor(std::istream& is) {
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "CSKT", 4) != 0) {
        throw IoError("bad tensor magic, expected \"CSKT\"");
    }
    unsigned char rank = 0;
    is.read(reinterpret_cast<char*>(&rank), 1);
    if (!is || rank < 1 || rank > 2) {
        throw IoError("bad tensor rank " + std::to_string(int(rank)) + ", expected 1 or 2");
    }
    Shape shape(rank);
    for (auto& e : shape) {
        e = static_cast<std::size_t>(detail::get_u64(is));
        if (e == 0) throw IoError("tensor extent 0 in stream");
    }
    const std::size_t n = Tensor::count(shape);
    std::vector<double> data(n);
    for (auto& d : data) d = detail::get_f64(is);
    return Tensor::from_data(std::move(shape), std::move(data));
}

inline void save_tensor(const std::string& path, const Tensor& t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for write: " + path);
    write_tensor(os, t);
}

inline Tensor load_tensor(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open: " + path);
    return read_tensor(is);
}

}  // namespace csk
