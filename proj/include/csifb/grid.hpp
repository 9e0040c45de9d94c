// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace csifb {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
    using Error::Error;
};
struct NumericError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DegenerateInputError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

using Shape = std::vector<int>;

inline int64_t shape_size(const Shape& s) {
    int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

// Dense row-major tensor of doubles. The carrier of all network-internal
// (real-valued) computation.
struct RealGrid {
    Shape shape;
    std::vector<double> data;

    RealGrid() = default;
    explicit RealGrid(Shape s) : shape(std::move(s)), data(shape_size(shape), 0.0) {}
    RealGrid(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
        if ((int64_t)data.size() != shape_size(shape))
            throw DimensionError("RealGrid: data size does not match shape " + shape_str(shape));
    }

    static RealGrid zeros(Shape s) { return RealGrid(std::move(s)); }
    static RealGrid full(Shape s, double v) {
        RealGrid g(std::move(s));
        std::fill(g.data.begin(), g.data.end(), v);
        return g;
    }
    static RealGrid scalar(double v) { return RealGrid({1}, {v}); }

    int rank() const { return (int)shape.size(); }
    int64_t size() const { return (int64_t)data.size(); }

    double& operator[](int64_t i) { return data[(size_t)i]; }
    double operator[](int64_t i) const { return data[(size_t)i]; }

    // Row-major flat index for a 2-D grid.
    double& at2(int i, int j) { return data[(size_t)(i * shape[1] + j)]; }
    double at2(int i, int j) const { return data[(size_t)(i * shape[1] + j)]; }
    double& at3(int i, int j, int k) {
        return data[(size_t)((i * shape[1] + j) * shape[2] + k)];
    }
    double at3(int i, int j, int k) const {
        return data[(size_t)((i * shape[1] + j) * shape[2] + k)];
    }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
    void ensure_finite(const std::string& what) const {
        if (!all_finite()) throw NumericError("non-finite values in " + what);
    }

    double frob_norm() const {
        double s = 0;
        for (double v : data) s += v * v;
        return std::sqrt(s);
    }
};

// Complex tensor stored as separate real/imaginary planes.
struct ComplexGrid {
    RealGrid re, im;

    ComplexGrid() = default;
    explicit ComplexGrid(Shape s) : re(s), im(std::move(s)) {}
    ComplexGrid(RealGrid r, RealGrid i) : re(std::move(r)), im(std::move(i)) {
        if (re.shape != im.shape)
            throw DimensionError("ComplexGrid: re/im shapes differ: " + shape_str(re.shape) +
                                 " vs " + shape_str(im.shape));
    }

    static ComplexGrid zeros(Shape s) { return ComplexGrid(std::move(s)); }

    const Shape& shape() const { return re.shape; }
    int64_t size() const { return re.size(); }

    std::complex<double> at(int64_t i) const { return {re[i], im[i]}; }
    void set(int64_t i, std::complex<double> v) {
        re[i] = v.real();
        im[i] = v.imag();
    }
    std::complex<double> at2(int i, int j) const { return {re.at2(i, j), im.at2(i, j)}; }
    void set2(int i, int j, std::complex<double> v) {
        re.at2(i, j) = v.real();
        im.at2(i, j) = v.imag();
    }

    bool all_finite() const { return re.all_finite() && im.all_finite(); }
    void ensure_finite(const std::string& what) const {
        if (!all_finite()) throw NumericError("non-finite values in " + what);
    }

    double frob_norm_sq() const {
        double s = 0;
        for (int64_t i = 0; i < size(); ++i) s += re[i] * re[i] + im[i] * im[i];
        return s;
    }
};

// Strides of a row-major layout.
inline std::vector<int64_t> row_major_strides(const Shape& s) {
    std::vector<int64_t> st(s.size(), 1);
    for (int i = (int)s.size() - 2; i >= 0; --i) st[i] = st[i + 1] * s[i + 1];
    return st;
}

}  // namespace csifb
