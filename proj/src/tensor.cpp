#include "dynframe/tensor.hpp"

#include <cmath>

namespace dynframe {

Tensor Tensor::zeros(std::vector<int64_t> s) {
    Tensor t;
    t.shape = std::move(s);
    t.data.assign(static_cast<size_t>(t.numel()), real(0));
    return t;
}

Tensor Tensor::full(std::vector<int64_t> s, real v) {
    Tensor t = zeros(std::move(s));
    for (auto& x : t.data) x = v;
    return t;
}

Tensor Tensor::scalar(real v) {
    Tensor t;
    t.shape = {1, 1};
    t.data = {v};
    return t;
}

Tensor Tensor::row(const std::vector<real>& v) {
    Tensor t;
    t.shape = {1, static_cast<int64_t>(v.size())};
    t.data = v;
    return t;
}

int64_t Tensor::numel() const {
    int64_t n = 1;
    for (int64_t d : shape) n *= d;
    return shape.empty() ? 0 : n;
}

bool Tensor::all_finite() const {
    for (real x : data)
        if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
}

std::string shape_str(const std::vector<int64_t>& s) {
    std::string out = "[";
    for (size_t i = 0; i < s.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + "]";
}

}  // namespace dynframe
