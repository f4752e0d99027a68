#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dynframe/common.hpp"

namespace dynframe {

// Dense row-major tensor. Rank is arbitrary but the graph ops treat
// everything as matrices ([rows, cols]); vectors are [1, n].
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<real> data;
    bool requires_grad = false;

    Tensor() = default;

    static Tensor zeros(std::vector<int64_t> s);
    static Tensor full(std::vector<int64_t> s, real v);
    static Tensor scalar(real v);
    static Tensor row(const std::vector<real>& v);  // [1, n]

    int64_t numel() const;
    int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
    int64_t cols() const { return shape.size() < 2 ? (shape.empty() ? 0 : 1) : shape[1]; }

    real& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
    real at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    bool all_finite() const;
};

std::string shape_str(const std::vector<int64_t>& s);

}  // namespace dynframe
