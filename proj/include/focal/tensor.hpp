#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "focal/errors.hpp"

namespace focal::nd {

// Dense row-major tensor of 64-bit floats. Shapes are checked at op time;
// a tensor is treated as an immutable value once handed to a Tape.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)), data(count(shape), 0.0) {}

    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (count(shape) != data.size())
            throw ShapeError("tensor data length does not match shape");
    }

    static std::size_t count(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t e : s) n *= e;
        return n;
    }

    static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

    static Tensor full(std::vector<std::size_t> s, double v) {
        Tensor t(std::move(s));
        for (double& x : t.data) x = v;
        return t;
    }

    static Tensor scalar(double v) { return Tensor({1}, {v}); }

    static Tensor row_matrix(std::size_t rows, std::size_t cols,
                             std::initializer_list<double> d) {
        return Tensor({rows, cols}, std::vector<double>(d));
    }

    static Tensor vec(std::initializer_list<double> d) {
        std::vector<double> v(d);
        const std::size_t n = v.size();
        return Tensor({n}, std::move(v));
    }

    std::size_t numel() const { return data.size(); }
    std::size_t ndim() const { return shape.size(); }

    double& at(std::size_t i) { return data[i]; }
    double at(std::size_t i) const { return data[i]; }

    double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }

    double item() const {
        if (numel() != 1) throw ShapeError("item() on non-scalar tensor");
        return data[0];
    }
};

} // namespace focal::nd
