#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "csk/error.hpp"

namespace csk {

using Shape = std::vector<std::size_t>;
/// Per-axis integer displacement (shifts, placement offsets).
using Offsets = std::vector<std::ptrdiff_t>;

inline std::string shape_to_string(const Shape& s) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? ", " : "") << s[i];
    os << ")";
    return os.str();
}

/// Dense real-valued 1D/2D array with explicit shape, row-major storage.
///
/// The one sample/atom/coefficient-map container used everywhere. Constructors
/// reject NaN/Inf and empty axes; library functions take tensors by const
/// reference and never mutate their inputs.
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape) {
        validate_shape(shape);
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_.assign(count(t.shape_), 0.0);
        return t;
    }

    static Tensor from_data(Shape shape, std::vector<double> data) {
        validate_shape(shape);
        if (count(shape) != data.size()) {
            throw ShapeError("tensor shape " + shape_to_string(shape) + " expects " +
                             std::to_string(count(shape)) + " values, got " +
                             std::to_string(data.size()));
        }
        for (double v : data) {
            if (!std::isfinite(v)) throw ValueError("tensor rejects non-finite value");
        }
        Tensor t;
        t.shape_ = std::move(shape);
        t.data_ = std::move(data);
        return t;
    }

    /// 1D convenience constructor.
    static Tensor vector(std::vector<double> v) {
        Shape shape{v.size()};
        return from_data(std::move(shape), std::move(v));
    }

    std::size_t rank() const { return shape_.size(); }
    const Shape& shape() const { return shape_; }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    const std::vector<double>& values() const { return data_; }
    std::vector<double>& values() { return data_; }
    const double* data() const { return data_.data(); }
    double* data() { return data_.data(); }

    double operator[](std::size_t flat) const { return data_[flat]; }
    double& operator[](std::size_t flat) { return data_[flat]; }

    double operator()(std::size_t i) const { return data_[i]; }
    double& operator()(std::size_t i) { return data_[i]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }

    bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

    bool operator==(const Tensor& other) const {
        return shape_ == other.shape_ && data_ == other.data_;
    }

    static std::size_t count(const Shape& s) {
        return std::accumulate(s.begin(), s.end(), std::size_t{1}, std::multiplies<>());
    }

private:
    static void validate_shape(const Shape& s) {
        if (s.empty() || s.size() > 2) {
            throw ShapeError("tensor rank must be 1 or 2, got shape " + shape_to_string(s));
        }
        for (std::size_t e : s) {
            if (e == 0) throw ShapeError("tensor extents must be positive, got " + shape_to_string(s));
        }
    }

    Shape shape_;
    std::vector<double> data_;
};

inline void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (!a.same_shape(b)) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) +
                         " vs " + shape_to_string(b.shape()));
    }
}

inline Tensor add(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "add");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
    return Tensor::from_data(a.shape(), std::move(out));
}

inline Tensor subtract(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "subtract");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
    return Tensor::from_data(a.shape(), std::move(out));
}

inline Tensor scale(const Tensor& a, double c) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * c;
    return Tensor::from_data(a.shape(), std::move(out));
}

inline double dot(const Tensor& a, const Tensor& b) {
    require_same_shape(a, b, "dot");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l2_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

inline double l1_norm(const Tensor& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]);
    return s;
}

inline std::size_t l0_count(const Tensor& a) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != 0.0);
    return n;
}

}  // namespace csk
